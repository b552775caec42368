#include "mlens/git.hpp"

#include <algorithm>
#include <sstream>

#include "mlens/strutil.hpp"
#include "mlens/subprocess.hpp"

namespace mlens::git {

namespace {

bool is_hex40(std::string_view s) {
  return s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

// Replace invalid UTF-8 sequences with U+FFFD, preserving all newlines so
// method line spans survive the decode.
std::string sanitize_utf8(std::string_view raw) {
  static const std::string kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    unsigned char c = raw[i];
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    }
    int len = 0;
    unsigned int min_cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      min_cp = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min_cp = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min_cp = 0x10000;
    }
    bool valid = len > 0 && i + static_cast<std::size_t>(len) <= raw.size();
    unsigned int cp = valid ? (c & (0xFF >> (len + 1))) : 0;
    for (int k = 1; valid && k < len; ++k) {
      unsigned char cc = raw[i + static_cast<std::size_t>(k)];
      if ((cc & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    if (valid && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) {
      valid = false;
    }
    if (valid) {
      out.append(raw.substr(i, static_cast<std::size_t>(len)));
      i += static_cast<std::size_t>(len);
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

bool matches_any(const std::vector<std::string>& patterns, std::string_view path) {
  if (patterns.empty()) {
    return true;
  }
  for (const auto& p : patterns) {
    if (glob_match(p, path)) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  // Recursive matcher with `**` spanning path separators.
  if (pattern.empty()) {
    return path.empty();
  }
  if (pattern.substr(0, 2) == "**") {
    std::string_view rest = pattern.substr(2);
    while (!rest.empty() && rest.front() == '/') {
      rest.remove_prefix(1);
    }
    if (rest.empty()) {
      return true;
    }
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if ((i == 0 || path[i - 1] == '/') && glob_match(rest, path.substr(i))) {
        return true;
      }
    }
    return false;
  }
  char pc = pattern.front();
  if (pc == '*') {
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (glob_match(pattern.substr(1), path.substr(i))) {
        return true;
      }
      if (i < path.size() && path[i] == '/') {
        break;
      }
    }
    return false;
  }
  if (path.empty()) {
    return false;
  }
  if (pc == '?') {
    return path.front() != '/' && glob_match(pattern.substr(1), path.substr(1));
  }
  return pc == path.front() && glob_match(pattern.substr(1), path.substr(1));
}

Repo::Repo(std::filesystem::path path) : path_(std::move(path)) {
  auto probe = run({"rev-parse", "--git-dir"});
  if (probe.exit_code != 0) {
    throw GitError("not a git repository: " + path_.string() + ": " + probe.err);
  }
}

Repo::GitOutput Repo::run(const std::vector<std::string>& args,
                          const std::string* stdin_data) const {
  std::vector<std::string> argv = {"git", "-C", path_.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions opts;
  if (stdin_data != nullptr) {
    opts.stdin_data = *stdin_data;
  }
  auto res = run_process(argv, opts);
  return {res.exit_code, std::move(res.out), std::move(res.err)};
}

std::string Repo::resolve(const std::string& ref) const {
  auto res = run({"rev-parse", "--verify", "--quiet", ref + "^{commit}"});
  if (res.exit_code != 0) {
    throw UnresolvableRef("cannot resolve '" + ref + "' in " + path_.string());
  }
  std::string id(trim(res.out));
  if (!is_hex40(id)) {
    throw UnresolvableRef("unexpected rev-parse output for '" + ref + "': " + id);
  }
  return id;
}

bool Repo::is_ancestor(const std::string& ancestor, const std::string& descendant) const {
  auto res = run({"merge-base", "--is-ancestor", ancestor, descendant});
  if (res.exit_code == 0) {
    return true;
  }
  if (res.exit_code == 1) {
    return false;
  }
  throw GitError("merge-base failed: " + res.err);
}

RevisionTriple Repo::resolve_triple(const std::string& pr_id, const std::string& base,
                                    const std::string& head, const std::string& merge) const {
  RevisionTriple t;
  t.pr_id = pr_id;
  t.base = resolve(base);
  t.head = resolve(head);
  t.merge = resolve(merge);
  if (!is_ancestor(t.base, t.head)) {
    throw AncestryViolation("base " + t.base + " is not an ancestor of head " + t.head);
  }
  if (!is_ancestor(t.head, t.merge)) {
    throw AncestryViolation("head " + t.head + " is not an ancestor of merge " + t.merge);
  }
  return t;
}

FileSnapshot Repo::snapshot(const std::string& revision,
                            const std::vector<std::string>& path_filters) const {
  const std::string rev = resolve(revision);
  auto ls = run({"ls-tree", "-r", "-z", rev});
  if (ls.exit_code != 0) {
    throw GitError("ls-tree failed for " + rev + ": " + ls.err);
  }

  // Entries are "<mode> <type> <hash>\t<path>\0".
  struct Entry {
    std::string hash;
    std::string path;
  };
  std::vector<Entry> wanted;
  std::size_t pos = 0;
  while (pos < ls.out.size()) {
    std::size_t nul = ls.out.find('\0', pos);
    if (nul == std::string::npos) {
      break;
    }
    std::string_view entry(ls.out.data() + pos, nul - pos);
    pos = nul + 1;
    std::size_t tab = entry.find('\t');
    if (tab == std::string_view::npos) {
      continue;
    }
    std::string_view meta = entry.substr(0, tab);
    std::string_view file_path = entry.substr(tab + 1);
    std::size_t sp1 = meta.find(' ');
    std::size_t sp2 = meta.find(' ', sp1 + 1);
    if (sp1 == std::string_view::npos || sp2 == std::string_view::npos) {
      continue;
    }
    std::string_view type = meta.substr(sp1 + 1, sp2 - sp1 - 1);
    std::string_view hash = meta.substr(sp2 + 1);
    if (type != "blob") {
      continue;
    }
    if (file_path.size() < 3 || file_path.substr(file_path.size() - 3) != ".py") {
      continue;
    }
    if (!matches_any(path_filters, file_path)) {
      continue;
    }
    wanted.push_back({std::string(hash), std::string(file_path)});
  }

  FileSnapshot snap;
  snap.revision = rev;
  if (wanted.empty()) {
    return snap;
  }

  // One cat-file process for all blobs; request each distinct hash once.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> paths_by_hash;
  for (const auto& e : wanted) {
    auto [it, inserted] = paths_by_hash.try_emplace(e.hash);
    if (inserted) {
      order.push_back(e.hash);
    }
    it->second.push_back(e.path);
  }
  std::string batch_input;
  for (const auto& h : order) {
    batch_input += h;
    batch_input += '\n';
  }
  auto cat = run({"cat-file", "--batch"}, &batch_input);
  if (cat.exit_code != 0) {
    throw GitError("cat-file failed: " + cat.err);
  }

  std::size_t cursor = 0;
  for (const auto& h : order) {
    std::size_t eol = cat.out.find('\n', cursor);
    if (eol == std::string::npos) {
      throw GitError("truncated cat-file output");
    }
    std::string header = cat.out.substr(cursor, eol - cursor);
    cursor = eol + 1;
    std::istringstream hs(header);
    std::string hash_out;
    std::string type;
    std::size_t size = 0;
    hs >> hash_out >> type;
    if (type == "missing") {
      throw GitError("blob " + h + " missing from object store");
    }
    hs >> size;
    if (cursor + size > cat.out.size()) {
      throw GitError("truncated cat-file payload");
    }
    std::string_view raw(cat.out.data() + cursor, size);
    cursor += size + 1;  // trailing newline after each object

    // NUL bytes mark binary content; such files are skipped entirely.
    if (raw.find('\0') != std::string_view::npos) {
      continue;
    }
    std::string text = sanitize_utf8(raw);
    for (const auto& p : paths_by_hash.at(h)) {
      snap.files[p] = text;
    }
  }
  return snap;
}

std::vector<std::string> Repo::intermediate_revisions(const std::string& from,
                                                      const std::string& to) const {
  const std::string a = resolve(from);
  const std::string b = resolve(to);
  if (!is_ancestor(a, b)) {
    throw AncestryViolation(a + " is not an ancestor of " + b);
  }
  if (a == b) {
    return {};
  }
  auto res = run({"rev-list", "--first-parent", "--reverse", a + ".." + b});
  if (res.exit_code != 0) {
    throw GitError("rev-list failed: " + res.err);
  }
  std::vector<std::string> out;
  std::istringstream is(res.out);
  std::string line;
  while (std::getline(is, line)) {
    if (is_hex40(line)) {
      out.push_back(line);
    }
  }
  if (out.empty() || out.back() != b) {
    throw AncestryViolation(b + " is not first-parent reachable from " + a);
  }
  return out;
}

}  // namespace mlens::git
