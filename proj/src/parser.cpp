#include "rcndl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace rcndl {

const QueryClause* SourceProgram::query() const {
  for (const auto& c : clauses) {
    if (const auto* q = std::get_if<QueryClause>(&c.kind)) return q;
  }
  return nullptr;
}

namespace {

enum class Tok {
  ident,
  number,
  query,
  arrow,
  colon,
  comma,
  semicolon,
  lbracket,
  rbracket,
  dot,
  end,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::query: return "'?-'";
    case Tok::arrow: return "'->'";
    case Tok::colon: return "':'";
    case Tok::comma: return "','";
    case Tok::semicolon: return "';'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::dot: return "'.'";
    case Tok::end: return "end of input";
  }
  return "token";
}

struct Token {
  Tok type = Tok::end;
  std::string text;
  double value = 0.0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t;
      t.pos = {line_, col_};
      if (at_end()) {
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c))) {
        t.type = Tok::ident;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                             peek() == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+' || c == '.') && starts_number())) {
        lex_number(t);
      } else if (c == '?') {
        advance();
        skip_spaces();
        if (at_end() || peek() != '-') {
          throw Error(ErrorKind::syntax, "expected '-' after '?'", t.pos);
        }
        advance();
        t.type = Tok::query;
      } else if (c == '-') {
        advance();
        if (at_end() || peek() != '>') {
          throw Error(ErrorKind::syntax, "expected '->'", t.pos);
        }
        advance();
        t.type = Tok::arrow;
      } else if (text_.substr(pos_).starts_with("\xE2\x86\x92")) {
        pos_ += 3;  // U+2192, same as "->"
        ++col_;
        t.type = Tok::arrow;
      } else {
        advance();
        switch (c) {
          case ':': t.type = Tok::colon; break;
          case ',': t.type = Tok::comma; break;
          case ';': t.type = Tok::semicolon; break;
          case '[': t.type = Tok::lbracket; break;
          case ']': t.type = Tok::rbracket; break;
          case '.': t.type = Tok::dot; break;
          default:
            throw Error(ErrorKind::syntax,
                        std::string("unexpected character '") + c + "'",
                        t.pos);
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) advance();
  }
  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }
  bool starts_number() const {
    std::size_t k = 0;
    if (peek(k) == '-' || peek(k) == '+') ++k;
    if (peek(k) == '.') ++k;
    return std::isdigit(static_cast<unsigned char>(peek(k))) != 0;
  }
  void lex_number(Token& t) {
    t.type = Tok::number;
    auto digits = [&] {
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        t.text += advance();
      }
    };
    if (peek() == '-' || peek() == '+') t.text += advance();
    digits();
    // A '.' is a decimal point only when a digit follows; otherwise it ends
    // the clause ("1." never occurs inside a list in practice).
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      t.text += advance();
      digits();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t k = 1;
      if (peek(k) == '-' || peek(k) == '+') ++k;
      if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
        t.text += advance();
        if (peek() == '-' || peek() == '+') t.text += advance();
        digits();
      }
    }
    std::string_view sv = t.text;
    if (sv.starts_with('+')) sv.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), t.value);
    if (ec != std::errc{} || ptr != sv.data() + sv.size()) {
      throw Error(ErrorKind::syntax, "malformed number '" + t.text + "'",
                  t.pos);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SourceProgram run() {
    SourceProgram program;
    std::optional<SourcePos> query_at;
    while (peek().type != Tok::end) {
      SourceClause clause = parse_clause();
      if (std::holds_alternative<QueryClause>(clause.kind)) {
        if (query_at) {
          throw Error(ErrorKind::redefinition,
                      "second query clause (first at line " +
                          std::to_string(query_at->line) + ")",
                      clause.pos);
        }
        query_at = clause.pos;
      }
      program.clauses.push_back(std::move(clause));
    }
    return program;
  }

 private:
  const Token& peek() const { return toks_[at_]; }
  const Token& next() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
  const Token& expect(Tok t, const char* context) {
    const Token& tok = peek();
    if (tok.type != t) {
      throw Error(ErrorKind::syntax,
                  std::string("expected ") + tok_name(t) + " " + context +
                      ", found " +
                      (tok.type == Tok::ident || tok.type == Tok::number
                           ? "'" + tok.text + "'"
                           : std::string(tok_name(tok.type))),
                  tok.pos);
    }
    return next();
  }

  SourceClause parse_clause() {
    SourceClause clause;
    clause.pos = peek().pos;
    if (peek().type == Tok::query) {
      next();
      QueryClause q;
      do {
        q.cliques.push_back(parse_clique());
      } while (peek().type == Tok::semicolon && (next(), true));
      expect(Tok::dot, "at end of query");
      clause.kind = std::move(q);
      return clause;
    }
    Scope vars = parse_props("at start of clause");
    if (peek().type == Tok::arrow) {
      next();
      const Token& body = expect(Tok::ident, "as rule body");
      RuleClause r{vars, VariableId(body.text), {}};
      if (peek().type == Tok::comma) {
        throw Error(ErrorKind::syntax,
                    "rule body must be a single proposition", peek().pos);
      }
      expect(Tok::colon, "after rule body");
      SourcePos list_pos = peek().pos;
      r.cond = parse_prs();
      if (r.cond.size() != r.head.state_count()) {
        throw Error(ErrorKind::arity,
                    "rule for '" + r.body.name() + "' with head " +
                        r.head.to_string() + " needs " +
                        std::to_string(r.head.state_count()) +
                        " conditionals, got " + std::to_string(r.cond.size()),
                    list_pos);
      }
      if (r.head.contains(r.body)) {
        throw Error(ErrorKind::cycle,
                    "'" + r.body.name() + "' depends on itself", clause.pos);
      }
      expect(Tok::dot, "at end of rule");
      clause.kind = std::move(r);
      return clause;
    }
    expect(Tok::dot, "at end of observation");
    clause.kind = ObservationClause{std::move(vars)};
    return clause;
  }

  QueryClique parse_clique() {
    QueryClique c;
    c.scope = parse_props("in query");
    expect(Tok::colon, "after query propositions");
    SourcePos list_pos = peek().pos;
    c.prior = parse_prs();
    if (c.prior.size() != c.scope.state_count()) {
      throw Error(ErrorKind::arity,
                  "prior for clique " + c.scope.to_string() + " needs " +
                      std::to_string(c.scope.state_count()) +
                      " entries, got " + std::to_string(c.prior.size()),
                  list_pos);
    }
    return c;
  }

  Scope parse_props(const char* context) {
    std::vector<VariableId> vars;
    SourcePos first = peek().pos;
    vars.emplace_back(expect(Tok::ident, context).text);
    while (peek().type == Tok::comma) {
      next();
      vars.emplace_back(expect(Tok::ident, "after ','").text);
    }
    try {
      return Scope(std::move(vars));
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), first);
    }
  }

  std::vector<double> parse_prs() {
    expect(Tok::lbracket, "to open probability list");
    std::vector<double> out;
    for (;;) {
      const Token& t = expect(Tok::number, "in probability list");
      if (t.value != kUnknownProbability && !(t.value >= 0.0 && t.value <= 1.0)) {
        throw Error(ErrorKind::range,
                    "probability " + t.text + " outside [0, 1]", t.pos);
      }
      out.push_back(t.value);
      if (peek().type == Tok::comma) {
        next();
      } else if (peek().type == Tok::rbracket) {
        next();
        return out;
      } else if (peek().type != Tok::number) {
        expect(Tok::rbracket, "to close probability list");
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string render_props(const Scope& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ", ";
    out += s[k].name();
  }
  return out;
}

std::string render_list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ", ";
    out += format_number(xs[k]);
  }
  return out + "]";
}

}  // namespace

SourceProgram parse_program(std::string_view text) {
  return Parser(Lexer(text).run()).run();
}

std::string render_program(const SourceProgram& program) {
  std::string out;
  for (const auto& clause : program.clauses) {
    if (const auto* q = std::get_if<QueryClause>(&clause.kind)) {
      out += "?- ";
      for (std::size_t k = 0; k < q->cliques.size(); ++k) {
        if (k) out += "; ";
        out += render_props(q->cliques[k].scope) + " : " +
               render_list(q->cliques[k].prior);
      }
    } else if (const auto* r = std::get_if<RuleClause>(&clause.kind)) {
      out += render_props(r->head) + " -> " + r->body.name() + " : " +
             render_list(r->cond);
    } else {
      out += render_props(std::get<ObservationClause>(clause.kind).vars);
    }
    out += ".\n";
  }
  return out;
}

}  // namespace rcndl
