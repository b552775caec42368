#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mlens/errors.hpp"

namespace mlens::py {

enum class Tok {
  Name,
  Number,
  String,
  Op,
  Comment,
  Newline,  // ends a logical line
  Nl,       // newline that does not end a logical line (blank, comment-only, bracketed)
  Indent,
  Dedent,
  End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  int line = 0;  // 1-based physical line of the first character
  int col = 0;   // 0-based byte column
  int end_line = 0;
  std::size_t offset = 0;
  std::size_t end_offset = 0;

  bool is(Tok t) const { return type == t; }
  bool is_op(std::string_view s) const { return type == Tok::Op && text == s; }
  bool is_name(std::string_view s) const { return type == Tok::Name && text == s; }
};

// Reserved words ("match"/"case"/"type" are soft keywords and excluded).
bool is_keyword(std::string_view word);

// True for Name/Number/String/Op — the tokens that carry program text.
inline bool is_significant(const Token& t) {
  return t.type == Tok::Name || t.type == Tok::Number || t.type == Tok::String ||
         t.type == Tok::Op;
}

// Lex Python source into a token stream ending with Tok::End. Follows the
// CPython tokenizer for indentation, logical lines, strings (one token per
// literal, f-strings included), numbers, and operators. Throws ParseError
// for unterminated strings, inconsistent dedents, unbalanced brackets, and
// characters outside the language.
std::vector<Token> tokenize(std::string_view source);

// The raw text between the quotes of a string literal token (prefix and
// quotes stripped, escapes untouched).
std::string string_inner_text(std::string_view literal);

}  // namespace mlens::py
