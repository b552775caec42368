#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mlens/errors.hpp"

namespace mlens::git {

// The three commits bracketing a pull request's life: branch point,
// PR creation, and integration.
struct RevisionTriple {
  std::string pr_id;
  std::string base;
  std::string head;
  std::string merge;
};

// Python files at one revision, path -> UTF-8 text. Paths are repo-relative
// with forward slashes; binary blobs are skipped and invalid UTF-8 is decoded
// lossily so line offsets stay stable.
struct FileSnapshot {
  std::string revision;
  std::map<std::string, std::string> files;
};

// `*` matches within a path segment, `**` across segments, `?` one character.
bool glob_match(std::string_view pattern, std::string_view path);

// Read-only access to a git repository through the system `git` executable.
// Safe to use from multiple threads; every call spawns its own process.
class Repo {
 public:
  explicit Repo(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  // Resolve a ref (name, tag, hash prefix) to a full commit id.
  // Throws UnresolvableRef.
  std::string resolve(const std::string& ref) const;

  bool is_ancestor(const std::string& ancestor, const std::string& descendant) const;

  // Resolve all three refs and verify base ⊑ head ⊑ merge.
  // Throws UnresolvableRef or AncestryViolation.
  RevisionTriple resolve_triple(const std::string& pr_id, const std::string& base,
                                const std::string& head, const std::string& merge) const;

  // Every `.py` blob at the revision, optionally restricted by glob filters
  // (empty filter list = all files). Deterministic: map ordered by path.
  FileSnapshot snapshot(const std::string& revision,
                        const std::vector<std::string>& path_filters = {}) const;

  // First-parent chain from `from` (exclusive) to `to` (inclusive), oldest
  // first. Empty when from == to. Throws AncestryViolation when `from` is
  // not an ancestor of `to`.
  std::vector<std::string> intermediate_revisions(const std::string& from,
                                                  const std::string& to) const;

 private:
  struct GitOutput {
    int exit_code;
    std::string out;
    std::string err;
  };
  GitOutput run(const std::vector<std::string>& args, const std::string* stdin_data = nullptr) const;

  std::filesystem::path path_;
};

}  // namespace mlens::git
