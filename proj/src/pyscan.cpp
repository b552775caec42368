#include "mlens/pyscan.hpp"

#include <optional>

namespace mlens::py {

namespace {

bool is_compound_keyword(const Token& t) {
  if (t.type != Tok::Name) {
    return false;
  }
  return t.text == "if" || t.text == "elif" || t.text == "else" || t.text == "for" ||
         t.text == "while" || t.text == "try" || t.text == "except" || t.text == "finally" ||
         t.text == "with" || t.text == "def" || t.text == "class" || t.text == "async";
}

// Split one logical line into simple statements, dropping compound headers
// (`if cond:` ... the part before the colon). Returns token index ranges.
std::vector<std::pair<std::size_t, std::size_t>> simple_statements(std::span<const Token> span) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  const std::size_t n = span.size();
  while (i < n) {
    while (i < n && !is_significant(span[i])) {
      ++i;
    }
    if (i >= n) {
      break;
    }
    if (is_compound_keyword(span[i])) {
      // Skip the header through the block-opening colon at depth 0.
      int depth = 0;
      while (i < n && is_significant(span[i])) {
        const Token& t = span[i];
        if (t.type == Tok::Op) {
          if (t.text == "(" || t.text == "[" || t.text == "{") {
            ++depth;
          } else if (t.text == ")" || t.text == "]" || t.text == "}") {
            --depth;
          } else if (t.text == ":" && depth == 0) {
            ++i;
            break;
          }
        }
        ++i;
      }
      continue;
    }
    // Simple statement: up to `;` at depth 0 or end of logical line.
    std::size_t start = i;
    int depth = 0;
    while (i < n && is_significant(span[i])) {
      const Token& t = span[i];
      if (t.type == Tok::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
        } else if (t.text == ";" && depth == 0) {
          break;
        }
      }
      ++i;
    }
    if (i > start) {
      out.emplace_back(start, i);
    }
    if (i < n && span[i].is_op(";")) {
      ++i;
    }
  }
  return out;
}

// Extract simple-name targets from one assignment target group.
void collect_targets(std::span<const Token> group, std::set<std::string>& names);

void collect_element(std::span<const Token> element, std::set<std::string>& names) {
  std::size_t b = 0;
  std::size_t e = element.size();
  while (b < e && (element[b].is_op("*") || element[b].is_op("**"))) {
    ++b;
  }
  if (b >= e) {
    return;
  }
  // Unwrap one level of enclosing parens/brackets covering the whole element.
  if ((element[b].is_op("(") || element[b].is_op("[")) &&
      (element[e - 1].is_op(")") || element[e - 1].is_op("]"))) {
    int depth = 0;
    bool covers = true;
    for (std::size_t i = b; i < e; ++i) {
      if (element[i].is_op("(") || element[i].is_op("[")) {
        ++depth;
      } else if (element[i].is_op(")") || element[i].is_op("]")) {
        --depth;
        if (depth == 0 && i + 1 != e) {
          covers = false;
          break;
        }
      }
    }
    if (covers) {
      collect_targets(element.subspan(b + 1, e - b - 2), names);
      return;
    }
  }
  if (e - b == 1 && element[b].type == Tok::Name && !is_keyword(element[b].text)) {
    names.insert(element[b].text);
  }
}

void collect_targets(std::span<const Token> group, std::set<std::string>& names) {
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= group.size(); ++i) {
    bool at_comma = false;
    if (i < group.size()) {
      const Token& t = group[i];
      if (t.type == Tok::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
        } else if (t.text == "," && depth == 0) {
          at_comma = true;
        }
      }
    }
    if (at_comma || i == group.size()) {
      if (i > start) {
        collect_element(group.subspan(start, i - start), names);
      }
      start = i + 1;
    }
  }
}

}  // namespace

bool ends_primary(const Token& t) {
  switch (t.type) {
    case Tok::Name:
      return !is_keyword(t.text);
    case Tok::String:
      return true;
    case Tok::Number:
      return true;
    case Tok::Op:
      return t.text == ")" || t.text == "]";
    default:
      return false;
  }
}

CallCounts count_calls(std::span<const Token> span) {
  CallCounts counts;
  const Token* prev = nullptr;
  const Token* prev2 = nullptr;
  for (const Token& t : span) {
    if (!is_significant(t)) {
      continue;
    }
    if (t.is_op("(") && prev != nullptr && ends_primary(*prev)) {
      bool definition_header =
          prev->type == Tok::Name && prev2 != nullptr &&
          (prev2->is_name("def") || prev2->is_name("class"));
      if (!definition_header) {
        ++counts.calls;
        if (prev->is_name("print") && (prev2 == nullptr || !prev2->is_op("."))) {
          ++counts.prints;
        }
      }
    }
    prev2 = prev;
    prev = &t;
  }
  return counts;
}

ReturnCounts count_returns(std::span<const Token> span) {
  ReturnCounts counts;
  for (std::size_t i = 0; i < span.size(); ++i) {
    if (!span[i].is_name("return")) {
      continue;
    }
    ++counts.total;
    std::size_t j = i + 1;
    while (j < span.size() && span[j].type == Tok::Comment) {
      ++j;
    }
    if (j < span.size() && is_significant(span[j]) && !span[j].is_op(";")) {
      ++counts.valued;
    }
  }
  return counts;
}

std::set<std::string> assigned_simple_names(std::span<const Token> span) {
  std::set<std::string> names;
  for (auto [start, end] : simple_statements(span)) {
    auto stmt = span.subspan(start, end - start);
    // Annotated assignment: NAME ':' annotation ['=' value].
    if (stmt.size() >= 2 && stmt[0].type == Tok::Name && !is_keyword(stmt[0].text) &&
        stmt[1].is_op(":")) {
      int depth = 0;
      for (std::size_t i = 2; i < stmt.size(); ++i) {
        const Token& t = stmt[i];
        if (t.type != Tok::Op) {
          continue;
        }
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
        } else if (t.text == "=" && depth == 0) {
          names.insert(stmt[0].text);
          break;
        }
      }
      continue;
    }
    // Plain (possibly chained) assignment: groups before each depth-0 '='.
    std::vector<std::size_t> eq_positions;
    int depth = 0;
    bool lambda_seen = false;
    for (std::size_t i = 0; i < stmt.size(); ++i) {
      const Token& t = stmt[i];
      if (t.is_name("lambda")) {
        lambda_seen = true;
      }
      if (t.type != Tok::Op) {
        continue;
      }
      if (t.text == "(" || t.text == "[" || t.text == "{") {
        ++depth;
      } else if (t.text == ")" || t.text == "]" || t.text == "}") {
        --depth;
      } else if (t.text == "=" && depth == 0 && !lambda_seen) {
        eq_positions.push_back(i);
      }
    }
    std::size_t group_start = 0;
    for (std::size_t eq : eq_positions) {
      collect_targets(stmt.subspan(group_start, eq - group_start), names);
      group_start = eq + 1;
    }
  }
  return names;
}

std::size_t body_start(std::span<const Token> span) {
  int depth = 0;
  for (std::size_t i = 0; i < span.size(); ++i) {
    const Token& t = span[i];
    if (t.type != Tok::Op) {
      continue;
    }
    if (t.text == "(" || t.text == "[" || t.text == "{") {
      ++depth;
    } else if (t.text == ")" || t.text == "]" || t.text == "}") {
      --depth;
    } else if (t.text == ":" && depth == 0) {
      return i + 1;
    }
  }
  return span.size();
}

}  // namespace mlens::py
