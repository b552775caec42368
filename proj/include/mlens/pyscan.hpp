#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlens/pytokens.hpp"

namespace mlens::py {

// Token-level analyses over a definition span (first token is `def` or
// `async`). They treat the span as flat token text: nested definitions are
// included, which matches how the downstream features are defined.

struct CallCounts {
  int calls = 0;
  int prints = 0;
};

// Call sites: `(` preceded by a primary expression (name, `)`, `]`, or a
// literal), excluding def/class headers. Prints: calls whose callee is the
// bare name `print`.
CallCounts count_calls(std::span<const Token> span);

struct ReturnCounts {
  int total = 0;
  int valued = 0;
};

ReturnCounts count_returns(std::span<const Token> span);

// Distinct simple names bound by assignment or annotated-assignment
// statements; tuple/list targets are flattened, attribute and subscript
// targets are ignored, augmented assignment and walrus do not bind here.
std::set<std::string> assigned_simple_names(std::span<const Token> span);

// Index just past the `:` that opens the definition body, or span.size()
// when the header never closes (malformed input).
std::size_t body_start(std::span<const Token> span);

// True when the previous significant token ends a primary expression, i.e.
// a following `(` is a call and a following `[` a subscription.
bool ends_primary(const Token& t);

}  // namespace mlens::py
