#include "mlens/pytokens.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

namespace mlens::py {

namespace {

const std::unordered_set<std::string_view> kKeywords = {
    "False",  "None",   "True",  "and",    "as",     "assert", "async",
    "await",  "break",  "class", "continue", "def",  "del",    "elif",
    "else",   "except", "finally", "for",  "from",   "global", "if",
    "import", "in",     "is",    "lambda", "nonlocal", "not",  "or",
    "pass",   "raise",  "return", "try",  "while",  "with",   "yield",
};

constexpr std::array<std::string_view, 5> kOps3 = {"**=", "//=", ">>=", "<<=", "..."};
constexpr std::array<std::string_view, 19> kOps2 = {
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", "+=",
    "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=", ":="};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:.;=";

bool is_name_start(unsigned char c) {
  return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_name_continue(unsigned char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_string_prefix(std::string_view word) {
  if (word.empty() || word.size() > 3) {
    return false;
  }
  for (char c : word) {
    char l = static_cast<char>(c | 0x20);
    if (l != 'r' && l != 'b' && l != 'u' && l != 'f') {
      return false;
    }
  }
  return true;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : s_(src) {
    if (s_.size() >= 3 && s_.substr(0, 3) == "\xEF\xBB\xBF") {
      p_ = 3;
    }
  }

  std::vector<Token> run() {
    while (p_ < s_.size()) {
      if (at_line_start_ && brackets_.empty()) {
        handle_line_start();
        continue;
      }
      lex_in_line();
    }
    finish();
    return std::move(out_);
  }

 private:
  void handle_line_start() {
    int col = 0;
    std::size_t start = p_;
    while (p_ < s_.size()) {
      char c = s_[p_];
      if (c == ' ') {
        ++col;
      } else if (c == '\t') {
        col = (col / 8 + 1) * 8;
      } else if (c == '\f') {
        col = 0;
      } else {
        break;
      }
      ++p_;
    }
    col_ = static_cast<int>(p_ - start);
    if (p_ >= s_.size()) {
      return;
    }
    char c = s_[p_];
    if (c == '\r' && p_ + 1 < s_.size() && s_[p_ + 1] == '\n') {
      ++p_;
      c = '\n';
    }
    if (c == '\n') {
      emit(Tok::Nl, p_, p_ + 1);
      consume_newline();
      return;
    }
    if (c == '#') {
      lex_comment();
      if (p_ < s_.size()) {
        if (s_[p_] == '\r') {
          ++p_;
        }
        if (p_ < s_.size() && s_[p_] == '\n') {
          emit(Tok::Nl, p_, p_ + 1);
          consume_newline();
        }
      }
      return;
    }
    if (col > indents_.back()) {
      indents_.push_back(col);
      emit(Tok::Indent, start, p_);
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        emit(Tok::Dedent, p_, p_);
      }
      if (col != indents_.back()) {
        throw ParseError("unindent does not match any outer indentation level", line_);
      }
    }
    at_line_start_ = false;
  }

  void lex_in_line() {
    while (p_ < s_.size()) {
      char c = s_[p_];
      if (c == ' ' || c == '\t' || c == '\f') {
        ++p_;
        ++col_;
        continue;
      }
      if (c == '\r' && p_ + 1 < s_.size() && s_[p_ + 1] == '\n') {
        ++p_;
        c = '\n';
      } else if (c == '\r') {
        ++p_;
        continue;
      }
      if (c == '\n') {
        if (brackets_.empty()) {
          if (line_has_token_) {
            emit(Tok::Newline, p_, p_ + 1);
          } else {
            emit(Tok::Nl, p_, p_ + 1);
          }
          consume_newline();
          at_line_start_ = true;
          line_has_token_ = false;
          return;
        }
        emit(Tok::Nl, p_, p_ + 1);
        consume_newline();
        continue;
      }
      if (c == '\\') {
        std::size_t q = p_ + 1;
        if (q < s_.size() && s_[q] == '\r') {
          ++q;
        }
        if (q < s_.size() && s_[q] == '\n') {
          p_ = q;
          consume_newline();
          continue;
        }
        throw ParseError("unexpected character after line continuation character", line_);
      }
      if (c == '#') {
        lex_comment();
        continue;
      }
      if (is_digit(static_cast<unsigned char>(c)) ||
          (c == '.' && p_ + 1 < s_.size() && is_digit(static_cast<unsigned char>(s_[p_ + 1])))) {
        lex_number();
        continue;
      }
      if (c == '\'' || c == '"') {
        lex_string(p_);
        continue;
      }
      if (is_name_start(static_cast<unsigned char>(c))) {
        lex_name_or_prefixed_string();
        continue;
      }
      lex_operator();
    }
  }

  void lex_comment() {
    std::size_t start = p_;
    while (p_ < s_.size() && s_[p_] != '\n' && !(s_[p_] == '\r' && p_ + 1 < s_.size() && s_[p_ + 1] == '\n')) {
      ++p_;
    }
    emit(Tok::Comment, start, p_);
  }

  void lex_name_or_prefixed_string() {
    std::size_t start = p_;
    while (p_ < s_.size() && is_name_continue(static_cast<unsigned char>(s_[p_]))) {
      ++p_;
    }
    std::string_view word = s_.substr(start, p_ - start);
    if (p_ < s_.size() && (s_[p_] == '\'' || s_[p_] == '"') && is_string_prefix(word)) {
      lex_string(start);
      return;
    }
    emit(Tok::Name, start, p_);
    line_has_token_ = true;
  }

  void lex_string(std::size_t start) {
    // p_ points at the opening quote; start may include a prefix.
    int start_line = line_;
    std::size_t start_line_offset = line_start_;
    char quote = s_[p_];
    bool triple = p_ + 2 < s_.size() && s_[p_ + 1] == quote && s_[p_ + 2] == quote;
    p_ += triple ? 3 : 1;
    while (true) {
      if (p_ >= s_.size()) {
        throw ParseError(triple ? "unterminated triple-quoted string literal"
                                : "unterminated string literal",
                         start_line);
      }
      char c = s_[p_];
      if (c == '\\') {
        // Escapes consume the next character even in raw strings; a raw
        // string cannot end in a lone backslash.
        p_ += 2;
        if (p_ <= s_.size() && p_ >= 1 && s_[p_ - 1] == '\n') {
          ++line_;
        }
        continue;
      }
      if (c == '\n') {
        if (!triple) {
          throw ParseError("unterminated string literal (EOL)", start_line);
        }
        ++line_;
        ++p_;
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++p_;
          break;
        }
        if (s_.substr(p_, 3) == std::string(3, quote)) {
          p_ += 3;
          break;
        }
        ++p_;
        continue;
      }
      ++p_;
    }
    Token t;
    t.type = Tok::String;
    t.text = std::string(s_.substr(start, p_ - start));
    t.line = start_line;
    t.col = start >= start_line_offset ? static_cast<int>(start - start_line_offset) : 0;
    t.end_line = line_;
    t.offset = start;
    t.end_offset = p_;
    out_.push_back(std::move(t));
    line_has_token_ = true;
  }

  void lex_number() {
    std::size_t start = p_;
    if (s_[p_] == '0' && p_ + 1 < s_.size() &&
        (s_[p_ + 1] == 'x' || s_[p_ + 1] == 'X' || s_[p_ + 1] == 'o' || s_[p_ + 1] == 'O' ||
         s_[p_ + 1] == 'b' || s_[p_ + 1] == 'B')) {
      p_ += 2;
      while (p_ < s_.size() && (std::isxdigit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) {
        ++p_;
      }
    } else {
      while (p_ < s_.size() && (is_digit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) {
        ++p_;
      }
      if (p_ < s_.size() && s_[p_] == '.' &&
          !(p_ + 1 < s_.size() && s_[p_ + 1] == '.')) {
        ++p_;
        while (p_ < s_.size() && (is_digit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) {
          ++p_;
        }
      }
      if (p_ < s_.size() && (s_[p_] == 'e' || s_[p_] == 'E')) {
        std::size_t q = p_ + 1;
        if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) {
          ++q;
        }
        if (q < s_.size() && is_digit(static_cast<unsigned char>(s_[q]))) {
          p_ = q;
          while (p_ < s_.size() && (is_digit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) {
            ++p_;
          }
        }
      }
    }
    if (p_ < s_.size() && (s_[p_] == 'j' || s_[p_] == 'J')) {
      ++p_;
    }
    emit(Tok::Number, start, p_);
    line_has_token_ = true;
  }

  void lex_operator() {
    for (auto op : kOps3) {
      if (s_.substr(p_, 3) == op) {
        emit(Tok::Op, p_, p_ + 3);
        line_has_token_ = true;
        p_ += 3;
        return;
      }
    }
    for (auto op : kOps2) {
      if (s_.substr(p_, 2) == op) {
        emit(Tok::Op, p_, p_ + 2);
        line_has_token_ = true;
        p_ += 2;
        return;
      }
    }
    char c = s_[p_];
    if (kOps1.find(c) != std::string_view::npos) {
      if (c == '(' || c == '[' || c == '{') {
        brackets_.push_back(c);
      } else if (c == ')' || c == ']' || c == '}') {
        char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
        if (brackets_.empty() || brackets_.back() != open) {
          throw ParseError(std::string("unmatched '") + c + "'", line_);
        }
        brackets_.pop_back();
      }
      emit(Tok::Op, p_, p_ + 1);
      line_has_token_ = true;
      ++p_;
      return;
    }
    throw ParseError(std::string("invalid character '") + c + "' in source", line_);
  }

  void consume_newline() {
    ++p_;
    ++line_;
    col_ = 0;
    line_start_ = p_;
  }

  void finish() {
    if (line_has_token_) {
      emit(Tok::Newline, p_, p_);
    }
    if (!brackets_.empty()) {
      throw ParseError(std::string("unexpected end of file inside '") + brackets_.back() + "'",
                       line_);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(Tok::Dedent, p_, p_);
    }
    emit(Tok::End, p_, p_);
  }

  void emit(Tok type, std::size_t start, std::size_t end) {
    Token t;
    t.type = type;
    t.text = std::string(s_.substr(start, end - start));
    t.line = line_;
    t.col = start >= line_start_ ? static_cast<int>(start - line_start_) : 0;
    t.end_line = line_;
    t.offset = start;
    t.end_offset = end;
    out_.push_back(std::move(t));
  }

  std::string_view s_;
  std::size_t p_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  int col_ = 0;
  bool at_line_start_ = true;
  bool line_has_token_ = false;
  std::vector<int> indents_{0};
  std::vector<char> brackets_;
  std::vector<Token> out_;
};

}  // namespace

bool is_keyword(std::string_view word) { return kKeywords.count(word) > 0; }

std::vector<Token> tokenize(std::string_view source) {
  Lexer lexer(source);
  return lexer.run();
}

std::string string_inner_text(std::string_view literal) {
  std::size_t i = 0;
  while (i < literal.size() && literal[i] != '\'' && literal[i] != '"') {
    ++i;
  }
  if (i >= literal.size()) {
    return std::string(literal);
  }
  char quote = literal[i];
  std::size_t body = i + 1;
  std::size_t tail = 1;
  if (literal.size() >= i + 6 && literal[i + 1] == quote && literal[i + 2] == quote) {
    body = i + 3;
    tail = 3;
  }
  if (literal.size() < body + tail) {
    return std::string();
  }
  return std::string(literal.substr(body, literal.size() - body - tail));
}

}  // namespace mlens::py
