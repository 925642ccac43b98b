#include "rcndl/evidence.hpp"

#include <cctype>
#include <charconv>
#include <string>

namespace rcndl {

namespace {

class EvidenceParser {
 public:
  explicit EvidenceParser(std::string_view text) : text_(text) {}

  std::vector<ConstraintSet> run() {
    std::vector<ConstraintSet> out;
    while (true) {
      skip_blank(true);
      if (at_end()) break;
      if (peek() == ';') {
        advance();
        continue;
      }
      out.push_back(statement());
      skip_blank(false);
      if (at_end()) break;
      if (peek() == ';' || peek() == '\n') {
        advance();
        continue;
      }
      fail("expected end of statement");
    }
    return out;
  }

 private:
  ConstraintSet statement() {
    const SourcePos start = pos();
    ConstraintSet c;
    if (peek() == 'P' && lookahead_paren()) {
      advance();
      expect('(');
      std::vector<VariableId> vars{ident()};
      std::vector<Literal> condition;
      bool conditional = false;
      skip_blank(false);
      while (peek() == ',') {
        advance();
        vars.push_back(ident());
        skip_blank(false);
      }
      if (peek() == '|') {
        advance();
        conditional = true;
        do {
          skip_blank(false);
          bool value = true;
          if (peek() == '!') {
            advance();
            value = false;
          }
          condition.push_back({ident(), value});
          skip_blank(false);
        } while (peek() == ',' && (advance(), true));
      }
      expect(')');
      expect('=');
      if (conditional) {
        if (vars.size() != 1) {
          fail("a conditional constraint has one target variable", start);
        }
        c.kind = ConditionalConstraint{vars[0], std::move(condition), number()};
      } else {
        Scope scope;
        try {
          scope = Scope(vars);
        } catch (const Error& e) {
          fail(e.what(), start);
        }
        std::vector<double> targets;
        skip_blank(false);
        if (peek() == '[') {
          advance();
          targets.push_back(number());
          skip_blank(false);
          while (peek() == ',') {
            advance();
            targets.push_back(number());
            skip_blank(false);
          }
          expect(']');
        } else {
          if (vars.size() != 1) {
            fail("a joint marginal needs a bracketed list", start);
          }
          const double p = number();
          targets = {1.0 - p, p};
        }
        c.kind = MarginalConstraint{std::move(scope), std::move(targets)};
      }
    } else {
      const VariableId v = ident();
      expect('=');
      const std::string word = ident().name();
      if (word != "true" && word != "false") {
        fail("expected true or false");
      }
      const double p = word == "true" ? 1.0 : 0.0;
      c.kind = MarginalConstraint{Scope(std::vector<VariableId>{v}), {1.0 - p, p}};
    }
    skip_blank(false);
    if (std::isalpha(static_cast<unsigned char>(peek()))) {
      const SourcePos at = pos();
      if (ident().name() != "threshold") fail("expected 'threshold'", at);
      c.threshold = number();
      if (*c.threshold < 0.0) fail("threshold must be non-negative", at);
    }
    try {
      validate(c);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), start);
    }
    return c;
  }

  bool lookahead_paren() const {
    std::size_t i = i_ + 1;
    while (i < text_.size() && (text_[i] == ' ' || text_[i] == '\t')) ++i;
    return i < text_.size() && text_[i] == '(';
  }

  VariableId ident() {
    skip_blank(false);
    const SourcePos at = pos();
    const std::size_t begin = i_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                         peek() == '_')) {
      advance();
    }
    if (begin == i_ || std::isdigit(static_cast<unsigned char>(text_[begin]))) {
      fail("expected a variable name", at);
    }
    return VariableId(std::string(text_.substr(begin, i_ - begin)));
  }

  double number() {
    skip_blank(false);
    const SourcePos at = pos();
    double v = 0.0;
    const char* first = text_.data() + i_;
    const char* last = text_.data() + text_.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) fail("expected a number", at);
    while (text_.data() + i_ < ptr) advance();
    return v;
  }

  void expect(char ch) {
    skip_blank(false);
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    advance();
  }

  void skip_blank(bool newlines) {
    while (!at_end()) {
      const char ch = peek();
      if (ch == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || (newlines && ch == '\n')) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& message) { fail(message, pos()); }
  [[noreturn]] void fail(const std::string& message, SourcePos at) {
    throw Error(ErrorKind::syntax, message, at);
  }

  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[i_]; }
  SourcePos pos() const { return {line_, column_}; }
  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++i_;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

std::vector<ConstraintSet> parse_evidence(std::string_view text) {
  return EvidenceParser(text).run();
}

}  // namespace rcndl
