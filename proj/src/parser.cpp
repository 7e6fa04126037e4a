#include <cctype>
#include <sstream>

#include "fo2/errors.hpp"
#include "fo2/problem.hpp"

namespace fo2 {

namespace {

enum class Tok { Ident, Number, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  static const char* const kSymbols[] = {"<->", "->", "!=", "<=", ">=", "(",
                                         ")",   ",",  ".",  "{",  "}",  "=",
                                         "<",   ">",  "!",  "&",  "|",  "+",
                                         "-",   "*",  "/",  "^"};
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      if (j + 1 < src.size() && src[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[j])))
          ++j;
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      bool matched = false;
      for (const char* sym : kSymbols) {
        std::string_view s(sym);
        if (src.substr(i, s.size()) == s) {
          t.kind = Tok::Symbol;
          t.text = std::string(s);
          advance(s.size());
          matched = true;
          break;
        }
      }
      if (!matched)
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "predicate" || s == "constraint" || s == "weight" ||
         s == "profileweight" || s == "forall" || s == "exists" ||
         s == "true" || s == "false";
}

class Parser {
 public:
  Parser(std::string_view src, Signature* sig, const ParseOptions& options)
      : toks_(lex(src)), sig_(sig), options_(options) {}

  Problem problem() {
    Problem p;
    std::vector<Formula> sentences;
    std::vector<CardConstraint> constraints;
    while (!at_end()) {
      if (accept_ident("predicate")) {
        declaration();
      } else if (accept_ident("constraint")) {
        constraints.push_back(constraint());
      } else if (accept_ident("weight")) {
        weight_line(p);
      } else if (accept_ident("profileweight")) {
        if (p.profile_weight) fail("duplicate profileweight");
        p.profile_weight = num_expr();
      } else {
        Formula f = formula();
        check_sentence(f);
        sentences.push_back(f);
      }
    }
    if (sentences.empty()) fail("problem has no sentence");
    p.sentence = make_and(std::move(sentences));
    p.constraint = card_and(std::move(constraints));
    p.signature = *sig_;
    check_references(referenced_predicates(p.constraint), "constraint");
    if (p.profile_weight)
      check_references(referenced_predicates(p.profile_weight),
                       "profileweight");
    return p;
  }

  Formula sentence_only() {
    Formula f = formula();
    expect_end();
    check_sentence(f);
    return f;
  }

  CardConstraint constraint_only() {
    CardConstraint c = constraint();
    expect_end();
    check_references(referenced_predicates(c), "constraint");
    return c;
  }

  NumExpr num_expr_only() {
    NumExpr e = num_expr();
    expect_end();
    check_references(referenced_predicates(e), "expression");
    return e;
  }

 private:
  // --- token helpers -------------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_symbol(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool is_ident(const char* s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  bool accept_symbol(const char* s) {
    if (!is_symbol(s)) return false;
    ++pos_;
    return true;
  }
  bool accept_ident(const char* s) {
    if (!is_ident(s)) return false;
    ++pos_;
    return true;
  }
  void expect_symbol(const char* s) {
    if (!accept_symbol(s)) fail(std::string("expected '") + s + "'");
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string near = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + " near " + near, t.line, t.column);
  }
  [[noreturn]] void semantic(const std::string& msg) const {
    const Token& t = peek();
    throw SemanticError(std::to_string(t.line) + ":" + std::to_string(t.column) +
                        ": " + msg);
  }
  std::string name() {
    if (peek().kind != Tok::Ident || is_keyword(peek().text))
      fail("expected a predicate name");
    return toks_[pos_++].text;
  }
  int integer() {
    if (peek().kind != Tok::Number ||
        peek().text.find('.') != std::string::npos)
      fail("expected a non-negative integer");
    const std::string& text = toks_[pos_++].text;
    if (text.size() > 9) fail("integer too large");
    return std::stoi(text);
  }

  // --- declarations --------------------------------------------------------
  void check_name(const std::string& n) const {
    if (!options_.allow_reserved && n.rfind("__", 0) == 0)
      semantic("names starting with '__' are reserved: " + n);
  }

  void declaration() {
    std::string n = name();
    check_name(n);
    expect_symbol("/");
    int arity = integer();
    if (arity != 1 && arity != 2) semantic("arity must be 1 or 2");
    sig_->add(n, arity, n.rfind("__", 0) == 0);
  }

  Rational signed_number() {
    bool negative = accept_symbol("-");
    if (peek().kind != Tok::Number) fail("expected a number");
    Rational r = parse_rational(toks_[pos_++].text);
    if (accept_symbol("/")) {
      if (peek().kind != Tok::Number) fail("expected a denominator");
      Rational d = parse_rational(toks_[pos_++].text);
      if (d == 0) semantic("zero denominator");
      r /= d;
      r.canonicalize();
    }
    return negative ? Rational(-r) : r;
  }

  void weight_line(Problem& p) {
    std::string n = name();
    if (!sig_->contains(n)) semantic("weight for undeclared predicate " + n);
    if (p.weights.count(n)) semantic("duplicate weight for " + n);
    WeightPair w;
    w.w1 = signed_number();
    w.w0 = signed_number();
    p.weights[n] = w;
  }

  void check_references(const std::vector<std::string>& preds,
                        const char* where) const {
    for (const auto& q : preds)
      if (!sig_->contains(q))
        throw SemanticError(std::string(where) +
                            " references undeclared predicate " + q);
  }

  void check_sentence(const Formula& f) const {
    auto fv = free_vars(f);
    if (!fv.empty())
      throw SemanticError(std::string("free variable ") +
                          var_name(*fv.begin()) + " in sentence " +
                          to_string(f));
  }

  // --- formulas ------------------------------------------------------------
  Formula formula() { return iff(); }

  Formula iff() {
    Formula lhs = implies();
    if (accept_symbol("<->")) return make_iff(lhs, iff());
    return lhs;
  }

  Formula implies() {
    Formula lhs = disjunction();
    if (accept_symbol("->")) return make_implies(lhs, implies());
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> kids{conjunction()};
    while (accept_symbol("|")) kids.push_back(conjunction());
    return make_or(std::move(kids));
  }

  Formula conjunction() {
    std::vector<Formula> kids{unary()};
    while (accept_symbol("&")) kids.push_back(unary());
    return make_and(std::move(kids));
  }

  Var variable() {
    if (peek().kind != Tok::Ident) fail("expected a variable");
    const std::string& v = peek().text;
    if (v != "x" && v != "y")
      semantic("only the variables x and y are supported, got '" + v + "'");
    ++pos_;
    return v == "x" ? Var::X : Var::Y;
  }

  Formula quantifier(Op op) {
    int count = 0;
    if (op == Op::Exists && accept_symbol("{")) {
      if (accept_symbol("=")) {
        op = Op::CountEq;
      } else if (accept_symbol("<=")) {
        op = Op::CountLe;
      } else if (accept_symbol(">=")) {
        op = Op::CountGe;
      } else {
        fail("expected '=', '<=' or '>=' in counting quantifier");
      }
      count = integer();
      expect_symbol("}");
    }
    Var v = variable();
    accept_symbol(".");
    return make_quant(op, v, formula(), count);
  }

  Formula unary() {
    if (accept_symbol("!")) return make_not(unary());
    if (accept_ident("forall")) return quantifier(Op::Forall);
    if (accept_ident("exists")) return quantifier(Op::Exists);
    if (accept_ident("true")) return make_true();
    if (accept_ident("false")) return make_false();
    if (accept_symbol("(")) {
      Formula f = formula();
      expect_symbol(")");
      return f;
    }
    if (peek().kind != Tok::Ident) fail("expected a formula");
    if (is_symbol("(", 1)) return atom();
    Var a = variable();
    bool negated = false;
    if (accept_symbol("!=")) {
      negated = true;
    } else {
      expect_symbol("=");
    }
    Var b = variable();
    Formula eq = make_eq(a, b);
    return negated ? make_not(eq) : eq;
  }

  Formula atom() {
    std::string n = name();
    check_name(n);
    expect_symbol("(");
    std::vector<Var> args{variable()};
    while (accept_symbol(",")) args.push_back(variable());
    expect_symbol(")");
    int arity = static_cast<int>(args.size());
    if (arity > 2) semantic("predicate " + n + " has more than two arguments");
    if (const Predicate* p = sig_->find(n)) {
      if (p->arity != arity)
        semantic("predicate " + n + " has arity " + std::to_string(p->arity) +
                 " but is used with " + std::to_string(arity) + " argument(s)");
    } else if (options_.strict) {
      semantic("undeclared predicate " + n);
    } else {
      sig_->add(n, arity, n.rfind("__", 0) == 0);
    }
    return make_atom(n, std::move(args));
  }

  // --- cardinality constraints ----------------------------------------------
  CardConstraint constraint() {
    std::vector<CardConstraint> kids{constraint_and()};
    while (accept_symbol("|")) kids.push_back(constraint_and());
    return card_or(std::move(kids));
  }

  CardConstraint constraint_and() {
    std::vector<CardConstraint> kids{constraint_unary()};
    while (accept_symbol("&")) kids.push_back(constraint_unary());
    if (kids.size() == 1) return kids[0];
    auto c = std::make_shared<CardNode>();
    c->op = CardOp::And;
    c->kids = std::move(kids);
    return c;
  }

  CardConstraint constraint_unary() {
    if (accept_symbol("!")) return card_not(constraint_unary());
    if (accept_ident("true")) return card_true();
    if (is_symbol("(")) {
      // Either a parenthesized constraint or a comparison whose left side
      // starts with a parenthesized sum; try the comparison first.
      std::size_t saved = pos_;
      try {
        return comparison();
      } catch (const ParseError&) {
        pos_ = saved;
      }
      expect_symbol("(");
      CardConstraint c = constraint();
      expect_symbol(")");
      return c;
    }
    return comparison();
  }

  CardConstraint comparison() {
    NumExpr lhs = num_expr();
    if (!is_linear(lhs)) semantic("cardinality constraints must be linear");
    CmpOp op;
    if (accept_symbol("=")) op = CmpOp::Eq;
    else if (accept_symbol("!=")) op = CmpOp::Ne;
    else if (accept_symbol("<=")) op = CmpOp::Le;
    else if (accept_symbol(">=")) op = CmpOp::Ge;
    else if (accept_symbol("<")) op = CmpOp::Lt;
    else if (accept_symbol(">")) op = CmpOp::Gt;
    else fail("expected a comparison operator");
    NumExpr rhs = num_expr();
    if (!is_linear(rhs)) semantic("cardinality constraints must be linear");
    return card_cmp(op, lhs, rhs);
  }

  // --- arithmetic ----------------------------------------------------------
  NumExpr num_expr() {
    NumExpr lhs = num_product();
    for (;;) {
      if (accept_symbol("+")) lhs = num_binary(NumOp::Add, lhs, num_product());
      else if (accept_symbol("-")) lhs = num_binary(NumOp::Sub, lhs, num_product());
      else return lhs;
    }
  }

  NumExpr num_product() {
    NumExpr lhs = num_unary_expr();
    for (;;) {
      if (accept_symbol("*")) lhs = num_binary(NumOp::Mul, lhs, num_unary_expr());
      else if (accept_symbol("/")) lhs = num_binary(NumOp::Div, lhs, num_unary_expr());
      else return lhs;
    }
  }

  NumExpr num_unary_expr() {
    if (accept_symbol("-")) return fo2::num_unary(NumOp::Neg, num_unary_expr());
    return num_power();
  }

  NumExpr num_power() {
    NumExpr base = num_primary();
    if (accept_symbol("^")) return num_binary(NumOp::Pow, base, num_unary_expr());
    return base;
  }

  NumExpr num_primary() {
    if (peek().kind == Tok::Number) return num_const(parse_rational(toks_[pos_++].text));
    if (accept_symbol("|")) {
      std::string n = name();
      if (!sig_->contains(n)) semantic("undeclared predicate " + n);
      expect_symbol("|");
      return num_card(n);
    }
    if (accept_ident("n")) return num_domain();
    if (accept_symbol("(")) {
      NumExpr e = num_expr();
      expect_symbol(")");
      return e;
    }
    fail("expected a number, |P| or n");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Signature* sig_;
  ParseOptions options_;
};

}  // namespace

Problem parse_problem(std::string_view text, const ParseOptions& options) {
  Signature sig;
  Parser parser(text, &sig, options);
  return parser.problem();
}

Formula parse_sentence(std::string_view text, Signature& sig,
                       const ParseOptions& options) {
  Parser parser(text, &sig, options);
  return parser.sentence_only();
}

CardConstraint parse_constraint(std::string_view text, const Signature& sig) {
  Signature copy = sig;
  Parser parser(text, &copy, ParseOptions{});
  return parser.constraint_only();
}

NumExpr parse_num_expr(std::string_view text, const Signature& sig) {
  Signature copy = sig;
  Parser parser(text, &copy, ParseOptions{});
  return parser.num_expr_only();
}

std::string to_source(const Problem& p) {
  std::ostringstream os;
  for (const auto& pred : p.signature.predicates())
    os << "predicate " << pred.name << "/" << pred.arity << "\n";
  os << to_string(p.sentence) << "\n";
  if (!is_trivial(p.constraint)) {
    if (p.constraint->op == CardOp::And) {
      for (const auto& k : p.constraint->kids)
        os << "constraint " << to_string(k) << "\n";
    } else {
      os << "constraint " << to_string(p.constraint) << "\n";
    }
  }
  for (const auto& [name, w] : p.weights)
    os << "weight " << name << " " << to_string(w.w1) << " " << to_string(w.w0)
       << "\n";
  if (p.profile_weight)
    os << "profileweight " << to_string(p.profile_weight) << "\n";
  return os.str();
}

}  // namespace fo2
