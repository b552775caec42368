#include "mlens/extract.hpp"

#include <algorithm>
#include <span>

#include "mlens/pyscan.hpp"

namespace mlens {

namespace {

using py::Tok;
using py::Token;

bool is_control_keyword(const Token& t) {
  if (t.type != Tok::Name) {
    return false;
  }
  return t.text == "if" || t.text == "elif" || t.text == "else" || t.text == "for" ||
         t.text == "while" || t.text == "try" || t.text == "except" || t.text == "finally" ||
         t.text == "with";
}

class Scanner {
 public:
  Scanner(std::string_view source, std::string file_path, const std::vector<Token>& tokens)
      : source_(source), file_path_(std::move(file_path)), t_(tokens) {
    line_offsets_.push_back(0);  // line 1
    for (std::size_t i = 0; i < source_.size(); ++i) {
      if (source_[i] == '\n') {
        line_offsets_.push_back(i + 1);
      }
    }
  }

  std::vector<MethodRecord> run() {
    parse_suite(nullptr);
    if (!cur().is(Tok::End)) {
      throw ParseError("unexpected token '" + cur().text + "'", cur().line);
    }
    std::sort(out_.begin(), out_.end(), [](const MethodRecord& a, const MethodRecord& b) {
      return a.start_line < b.start_line;
    });
    return std::move(out_);
  }

 private:
  struct DefContext {
    MethodRecord rec;
    std::size_t span_begin = 0;
    int depth_cur = 0;
    int depth_max = 0;
  };

  const Token& cur() const { return t_[i_]; }

  const Token& take() {
    const Token& t = t_[i_];
    if (py::is_significant(t)) {
      last_sig_ = i_;
    }
    if (i_ + 1 < t_.size()) {
      ++i_;
    }
    return t;
  }

  void skip_blank() {
    while (cur().is(Tok::Nl) || cur().is(Tok::Comment)) {
      take();
    }
  }

  void parse_suite(DefContext* doc_target) {
    bool first = true;
    while (true) {
      skip_blank();
      if (cur().is(Tok::Dedent) || cur().is(Tok::End)) {
        return;
      }
      if (cur().is(Tok::Indent)) {
        throw ParseError("unexpected indent", cur().line);
      }
      parse_statement(first ? doc_target : nullptr);
      first = false;
    }
  }

  void parse_statement(DefContext* doc_target) {
    const Token& t = cur();
    if (t.is_op("@")) {
      ++pending_decorators_;
      consume_logical_line();
      return;
    }
    if (t.is_name("async")) {
      std::size_t start = i_;
      take();
      if (cur().is_name("def")) {
        parse_def(start, true);
        return;
      }
      // async for / async with
      parse_compound_from_here(is_control_keyword(cur()));
      return;
    }
    if (t.is_name("def")) {
      parse_def(i_, false);
      return;
    }
    if (t.is_name("class")) {
      parse_class();
      return;
    }
    if (is_control_keyword(t)) {
      parse_compound_from_here(true);
      return;
    }
    parse_simple(doc_target);
  }

  void parse_def(std::size_t start_tok, bool is_async) {
    const int decorators = pending_decorators_;
    pending_decorators_ = 0;
    take();  // def
    if (!cur().is(Tok::Name) || py::is_keyword(cur().text)) {
      throw ParseError("expected function name after 'def'", cur().line);
    }
    const std::string name = take().text;

    DefContext ctx;
    ctx.span_begin = start_tok;
    ctx.rec.identity.file_path = file_path_;
    ctx.rec.identity.name = name;
    for (const auto& [kind, scope_name] : scope_) {
      (void)kind;
      ctx.rec.identity.scope_path.push_back(scope_name);
    }
    ctx.rec.is_async = is_async;
    ctx.rec.summary.decorator_count = decorators;

    if (!cur().is_op("(")) {
      throw ParseError("expected '(' in definition of '" + name + "'", cur().line);
    }
    take();
    parse_params(ctx);
    scan_to_block_colon("definition of '" + name + "'");

    scope_.emplace_back('F', name);
    defs_.push_back(std::move(ctx));
    parse_body(&defs_.back());
    DefContext done = std::move(defs_.back());
    defs_.pop_back();
    scope_.pop_back();
    finalize_def(std::move(done));
  }

  void parse_params(DefContext& ctx) {
    int depth = 1;
    std::vector<const Token*> element;
    auto flush = [&]() {
      std::size_t b = 0;
      while (b < element.size() && (element[b]->is_op("*") || element[b]->is_op("**"))) {
        ++b;
      }
      if (b >= element.size()) {
        element.clear();
        return;  // bare '*' separator or trailing comma
      }
      if (element[b]->is_op("/")) {
        element.clear();
        return;  // positional-only marker
      }
      if (element[b]->type != Tok::Name || py::is_keyword(element[b]->text)) {
        throw ParseError("malformed parameter list", element[b]->line);
      }
      ctx.rec.summary.param_names.push_back(element[b]->text);
      element.clear();
    };
    while (true) {
      if (cur().is(Tok::End)) {
        throw ParseError("unexpected end of file in parameter list", cur().line);
      }
      if (!py::is_significant(cur())) {
        take();
        continue;
      }
      const Token& t = take();
      if (t.type == Tok::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
          if (depth == 0) {
            flush();
            return;
          }
        } else if (t.text == "," && depth == 1) {
          flush();
          continue;
        }
      }
      element.push_back(&t);
    }
  }

  void parse_class() {
    take();  // class
    if (!cur().is(Tok::Name) || py::is_keyword(cur().text)) {
      throw ParseError("expected class name", cur().line);
    }
    const std::string name = take().text;
    pending_decorators_ = 0;
    scan_to_block_colon("class '" + name + "'");
    scope_.emplace_back('C', name);
    parse_body(nullptr);
    scope_.pop_back();
  }

  // if/elif/else/for/while/try/except/finally/with blocks; also the
  // `async for`/`async with` tail after `async` was consumed.
  void parse_compound_from_here(bool control) {
    pending_decorators_ = 0;
    DefContext* ctx = defs_.empty() ? nullptr : &defs_.back();
    if (control && ctx != nullptr) {
      ++ctx->depth_cur;
      ctx->depth_max = std::max(ctx->depth_max, ctx->depth_cur);
    }
    scan_to_block_colon("compound statement");
    parse_body(nullptr);
    if (control && ctx != nullptr) {
      --ctx->depth_cur;
    }
  }

  // Consumes up to and including the ':' that opens a block.
  void scan_to_block_colon(const std::string& what) {
    int depth = 0;
    while (true) {
      const Token& t = cur();
      if (t.is(Tok::Newline) || t.is(Tok::End)) {
        throw ParseError("expected ':' in " + what, t.line);
      }
      take();
      if (t.type != Tok::Op) {
        continue;
      }
      if (t.text == "(" || t.text == "[" || t.text == "{") {
        ++depth;
      } else if (t.text == ")" || t.text == "]" || t.text == "}") {
        --depth;
      } else if (t.text == ":" && depth == 0) {
        return;
      }
    }
  }

  // Block or inline statement list following a block-opening ':'.
  void parse_body(DefContext* doc_target) {
    if (cur().is(Tok::Newline) || cur().is(Tok::Comment)) {
      while (cur().is(Tok::Comment)) {
        take();
      }
      take();  // newline
      skip_blank();
      if (!cur().is(Tok::Indent)) {
        throw ParseError("expected an indented block", cur().line);
      }
      take();
      parse_suite(doc_target);
      if (!cur().is(Tok::Dedent)) {
        throw ParseError("missing dedent", cur().line);
      }
      take();
      return;
    }
    parse_inline_statements(doc_target);
  }

  // Simple statements on the header line: `def f(): a(); return b`.
  void parse_inline_statements(DefContext* doc_target) {
    std::size_t stmt_start = i_;
    bool first = true;
    int depth = 0;
    while (!cur().is(Tok::Newline) && !cur().is(Tok::End)) {
      const Token& t = take();
      if (t.type == Tok::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
        } else if (t.text == ";" && depth == 0) {
          if (first && doc_target != nullptr) {
            try_capture_docstring(*doc_target, stmt_start, i_ - 1);
          }
          first = false;
          stmt_start = i_;
        }
      }
    }
    if (first && doc_target != nullptr) {
      try_capture_docstring(*doc_target, stmt_start, i_);
    }
    if (cur().is(Tok::Newline)) {
      take();
    }
  }

  void parse_simple(DefContext* doc_target) {
    pending_decorators_ = 0;
    std::size_t stmt_start = i_;
    bool ends_with_block_colon = false;
    bool first = true;
    int depth = 0;
    while (!cur().is(Tok::Newline) && !cur().is(Tok::End)) {
      const Token& t = take();
      if (!py::is_significant(t)) {
        continue;
      }
      if (t.type == Tok::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          --depth;
        } else if (t.text == ";" && depth == 0) {
          if (first && doc_target != nullptr) {
            try_capture_docstring(*doc_target, stmt_start, i_ - 1);
          }
          first = false;
          stmt_start = i_;
        }
        ends_with_block_colon = t.text == ":" && depth == 0;
      } else {
        ends_with_block_colon = false;
      }
    }
    if (first && doc_target != nullptr) {
      try_capture_docstring(*doc_target, stmt_start, i_);
    }
    if (cur().is(Tok::Newline)) {
      take();
    }
    if (ends_with_block_colon) {
      // Soft-keyword compound (match/case): a block may follow.
      std::size_t mark = i_;
      skip_blank();
      if (cur().is(Tok::Indent)) {
        take();
        parse_suite(nullptr);
        if (!cur().is(Tok::Dedent)) {
          throw ParseError("missing dedent", cur().line);
        }
        take();
      } else {
        i_ = mark;
      }
    }
  }

  void try_capture_docstring(DefContext& ctx, std::size_t begin, std::size_t end) {
    if (ctx.rec.docstring.has_value()) {
      return;
    }
    std::string text;
    bool any = false;
    for (std::size_t k = begin; k < end; ++k) {
      const Token& t = t_[k];
      if (t.is(Tok::Comment) || t.is(Tok::Nl)) {
        continue;
      }
      if (!t.is(Tok::String)) {
        return;
      }
      text += py::string_inner_text(t.text);
      any = true;
    }
    if (any) {
      ctx.rec.docstring = std::move(text);
    }
  }

  void consume_logical_line() {
    while (!cur().is(Tok::Newline) && !cur().is(Tok::End)) {
      take();
    }
    if (cur().is(Tok::Newline)) {
      take();
    }
  }

  void finalize_def(DefContext ctx) {
    MethodRecord rec = std::move(ctx.rec);
    const Token& first = t_[ctx.span_begin];
    const Token& last = t_[last_sig_];
    rec.start_line = first.line;
    rec.end_line = last.end_line;
    rec.source_text = std::string(slice_lines(first.offset, rec.end_line));
    rec.summary.max_control_depth = ctx.depth_max;

    std::span<const Token> span(t_.data() + ctx.span_begin, last_sig_ - ctx.span_begin + 1);
    auto calls = py::count_calls(span);
    rec.summary.call_count = calls.calls;
    rec.summary.print_call_count = calls.prints;
    auto returns = py::count_returns(span);
    rec.summary.return_count = returns.total;
    rec.summary.valued_return_count = returns.valued;
    auto assigned = py::assigned_simple_names(span);
    rec.summary.assigned_names.assign(assigned.begin(), assigned.end());

    out_.push_back(std::move(rec));
  }

  // Characters from `begin` through the end of 1-based line `end_line`,
  // excluding the trailing newline.
  std::string_view slice_lines(std::size_t begin, int end_line) const {
    std::size_t end = source_.size();
    if (static_cast<std::size_t>(end_line) < line_offsets_.size()) {
      end = line_offsets_[static_cast<std::size_t>(end_line)] - 1;
    }
    return source_.substr(begin, end - begin);
  }

  std::string_view source_;
  std::string file_path_;
  const std::vector<Token>& t_;
  std::size_t i_ = 0;
  std::size_t last_sig_ = 0;
  int pending_decorators_ = 0;
  std::vector<std::pair<char, std::string>> scope_;
  std::vector<DefContext> defs_;
  std::vector<MethodRecord> out_;
  std::vector<std::size_t> line_offsets_;
};

}  // namespace

std::vector<MethodRecord> extract_methods(std::string_view source, const std::string& file_path) {
  auto tokens = py::tokenize(source);
  Scanner scanner(source, file_path, tokens);
  return scanner.run();
}

SnapshotExtraction extract_snapshot(const git::FileSnapshot& snap) {
  SnapshotExtraction out;
  for (const auto& [path, text] : snap.files) {
    try {
      for (auto& rec : extract_methods(text, path)) {
        out.methods[rec.identity] = std::move(rec);
      }
    } catch (const ParseError& e) {
      out.skipped.push_back({path, e.what()});
    }
  }
  return out;
}

}  // namespace mlens
