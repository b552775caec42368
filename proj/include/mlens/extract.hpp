#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlens/git.hpp"
#include "mlens/pytokens.hpp"

namespace mlens {

// Unique key of one definition within a revision snapshot:
// (file path, enclosing class/function names outermost-first, name).
struct MethodIdentity {
  std::string file_path;
  std::vector<std::string> scope_path;
  std::string name;

  auto operator<=>(const MethodIdentity&) const = default;

  std::string qualified() const {
    std::string out = file_path + "::";
    for (const auto& s : scope_path) {
      out += s + ".";
    }
    return out + name;
  }
};

// Counts collected while parsing, consumed by feature computation.
// All counts cover the full method span, nested definitions included;
// max_control_depth alone skips nested function bodies (they get their
// own records).
struct BodySummary {
  std::vector<std::string> param_names;
  int return_count = 0;
  int valued_return_count = 0;
  int call_count = 0;
  int print_call_count = 0;
  std::vector<std::string> assigned_names;  // distinct, sorted
  int max_control_depth = 0;
  int decorator_count = 0;
};

struct MethodRecord {
  MethodIdentity identity;
  std::string source_text;  // exact slice, `def`/`async def` through end of last body line
  int start_line = 0;       // 1-based, decorators excluded
  int end_line = 0;
  bool is_async = false;
  std::optional<std::string> docstring;  // raw inner text, set iff the first body statement is a string literal
  BodySummary summary;
};

// One record per def/async-def in document order, nested and class-level
// definitions included. Throws ParseError on syntactically broken source.
std::vector<MethodRecord> extract_methods(std::string_view source, const std::string& file_path);

struct SkipEntry {
  std::string file_path;
  std::string reason;
};

struct SnapshotExtraction {
  std::map<MethodIdentity, MethodRecord> methods;
  std::vector<SkipEntry> skipped;
};

// Union of extract_methods over every file in the snapshot. Files that fail
// to parse are recorded in `skipped` and never abort the whole snapshot.
// Duplicate identities within one file keep the last definition.
SnapshotExtraction extract_snapshot(const git::FileSnapshot& snap);

}  // namespace mlens
