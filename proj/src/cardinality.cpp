#include "fo2/cardinality.hpp"

#include <algorithm>
#include <sstream>

#include "fo2/errors.hpp"

namespace fo2 {

namespace {

std::shared_ptr<NumNode> num_node(NumOp op) {
  auto n = std::make_shared<NumNode>();
  n->op = op;
  return n;
}

bool is_constant(const NumExpr& e) {
  if (e->op == NumOp::Card) return false;
  return std::all_of(e->kids.begin(), e->kids.end(), is_constant);
}

void collect(const NumExpr& e, std::vector<std::string>& out) {
  if (e->op == NumOp::Card) out.push_back(e->pred);
  for (const auto& k : e->kids) collect(k, out);
}

void collect(const CardConstraint& c, std::vector<std::string>& out) {
  if (c->op == CardOp::Cmp) {
    collect(c->lhs, out);
    collect(c->rhs, out);
  }
  for (const auto& k : c->kids) collect(k, out);
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

int num_prec(const NumExpr& e) {
  switch (e->op) {
    case NumOp::Add:
    case NumOp::Sub: return 1;
    case NumOp::Mul:
    case NumOp::Div: return 2;
    case NumOp::Neg: return 3;
    case NumOp::Pow: return 4;
    case NumOp::Const: return e->value < 0 ? 3 : 5;
    default: return 5;
  }
}

void print(std::ostream& os, const NumExpr& e);

void print_paren(std::ostream& os, const NumExpr& e, int min_prec) {
  if (num_prec(e) < min_prec) {
    os << '(';
    print(os, e);
    os << ')';
  } else {
    print(os, e);
  }
}

void print(std::ostream& os, const NumExpr& e) {
  switch (e->op) {
    case NumOp::Const: os << to_string(e->value); return;
    case NumOp::Card: os << '|' << e->pred << '|'; return;
    case NumOp::DomainSize: os << 'n'; return;
    case NumOp::Neg: os << '-'; print_paren(os, e->kids[0], 4); return;
    case NumOp::Add:
    case NumOp::Sub:
      print_paren(os, e->kids[0], 1);
      os << (e->op == NumOp::Add ? " + " : " - ");
      print_paren(os, e->kids[1], 2);
      return;
    case NumOp::Mul:
    case NumOp::Div:
      print_paren(os, e->kids[0], 2);
      os << (e->op == NumOp::Mul ? "*" : "/");
      print_paren(os, e->kids[1], 3);
      return;
    case NumOp::Pow:
      print_paren(os, e->kids[0], 5);
      os << '^';
      print_paren(os, e->kids[1], 4);
      return;
  }
}

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

void print(std::ostream& os, const CardConstraint& c, bool nested) {
  switch (c->op) {
    case CardOp::True: os << "true"; return;
    case CardOp::Cmp:
      print(os, c->lhs);
      os << ' ' << cmp_text(c->cmp) << ' ';
      print(os, c->rhs);
      return;
    case CardOp::Not:
      os << "!(";
      print(os, c->kids[0], false);
      os << ')';
      return;
    case CardOp::And:
    case CardOp::Or:
      if (nested) os << '(';
      for (std::size_t i = 0; i < c->kids.size(); ++i) {
        if (i) os << (c->op == CardOp::And ? " & " : " | ");
        print(os, c->kids[i], true);
      }
      if (nested) os << ')';
      return;
  }
}

// Views a linear e as coef*|pred| + rest by probing it at a few counter
// values; rest_constant reports whether rest ignores the other counters.
bool split_affine(const NumExpr& e, const std::string& pred, int n,
                  Rational& coef, Rational& rest_const, bool& rest_constant) {
  if (!is_linear(e)) return false;
  auto at = [&](long long p, const std::string* bumped) {
    return evaluate(
        e,
        [&](const std::string& q) -> long long {
          if (q == pred) return p;
          return bumped && q == *bumped ? 1 : 0;
        },
        n);
  };
  coef = at(1, nullptr) - at(0, nullptr);
  rest_const = at(0, nullptr);
  rest_constant = true;
  std::vector<std::string> refs;
  collect(e, refs);
  for (const auto& q : refs)
    if (q != pred && at(0, &q) != rest_const) rest_constant = false;
  return true;
}

}  // namespace

AffineForm affine_form(const NumExpr& e, int n) {
  if (!is_linear(e))
    throw SemanticError("expression is not linear: " + to_string(e));
  std::vector<std::string> refs;
  collect(e, refs);
  auto at = [&](const std::string* one) {
    return evaluate(
        e, [&](const std::string& q) -> long long { return one && q == *one; },
        n);
  };
  AffineForm f;
  f.constant = at(nullptr);
  for (const auto& q : refs) {
    Rational c = at(&q) - f.constant;
    if (c != 0) f.coef[q] = c;
  }
  return f;
}

NumExpr num_const(Rational v) {
  auto n = num_node(NumOp::Const);
  n->value = std::move(v);
  return n;
}

NumExpr num_card(std::string pred) {
  auto n = num_node(NumOp::Card);
  n->pred = std::move(pred);
  return n;
}

NumExpr num_domain() { return num_node(NumOp::DomainSize); }

NumExpr num_unary(NumOp op, NumExpr a) {
  auto n = num_node(op);
  n->kids = {std::move(a)};
  return n;
}

NumExpr num_binary(NumOp op, NumExpr a, NumExpr b) {
  auto n = num_node(op);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

Rational evaluate(const NumExpr& e, const CardLookup& card, int n) {
  switch (e->op) {
    case NumOp::Const: return e->value;
    case NumOp::Card: return Rational(static_cast<long>(card(e->pred)));
    case NumOp::DomainSize: return Rational(n);
    case NumOp::Neg: return -evaluate(e->kids[0], card, n);
    case NumOp::Add:
      return evaluate(e->kids[0], card, n) + evaluate(e->kids[1], card, n);
    case NumOp::Sub:
      return evaluate(e->kids[0], card, n) - evaluate(e->kids[1], card, n);
    case NumOp::Mul:
      return evaluate(e->kids[0], card, n) * evaluate(e->kids[1], card, n);
    case NumOp::Div: {
      Rational d = evaluate(e->kids[1], card, n);
      if (d == 0) throw SemanticError("division by zero in " + to_string(e));
      Rational r = evaluate(e->kids[0], card, n) / d;
      r.canonicalize();
      return r;
    }
    case NumOp::Pow: {
      Rational base = evaluate(e->kids[0], card, n);
      Rational ex = evaluate(e->kids[1], card, n);
      if (ex.get_den() != 1)
        throw SemanticError("non-integer exponent in " + to_string(e));
      if (!ex.get_num().fits_slong_p())
        throw SemanticError("exponent out of range in " + to_string(e));
      long k = ex.get_num().get_si();
      if (k < 0) {
        if (base == 0) throw SemanticError("zero to a negative power");
        base = 1 / base;
        k = -k;
      }
      Rational r;
      mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(),
                 static_cast<unsigned long>(k));
      mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(),
                 static_cast<unsigned long>(k));
      r.canonicalize();
      return r;
    }
  }
  return 0;
}

std::vector<std::string> referenced_predicates(const NumExpr& e) {
  std::vector<std::string> out;
  collect(e, out);
  sort_unique(out);
  return out;
}

bool is_linear(const NumExpr& e) {
  switch (e->op) {
    case NumOp::Const:
    case NumOp::Card:
    case NumOp::DomainSize: return true;
    case NumOp::Neg: return is_linear(e->kids[0]);
    case NumOp::Add:
    case NumOp::Sub: return is_linear(e->kids[0]) && is_linear(e->kids[1]);
    case NumOp::Mul:
      return is_linear(e->kids[0]) && is_linear(e->kids[1]) &&
             (is_constant(e->kids[0]) || is_constant(e->kids[1]));
    case NumOp::Div: return is_linear(e->kids[0]) && is_constant(e->kids[1]);
    case NumOp::Pow: return is_constant(e);
  }
  return false;
}

std::string to_string(const NumExpr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

CardConstraint card_true() {
  static const CardConstraint t = std::make_shared<CardNode>();
  return t;
}

CardConstraint card_cmp(CmpOp op, NumExpr lhs, NumExpr rhs) {
  auto c = std::make_shared<CardNode>();
  c->op = CardOp::Cmp;
  c->cmp = op;
  c->lhs = std::move(lhs);
  c->rhs = std::move(rhs);
  return c;
}

CardConstraint card_not(CardConstraint k) {
  auto c = std::make_shared<CardNode>();
  c->op = CardOp::Not;
  c->kids = {std::move(k)};
  return c;
}

CardConstraint card_and(std::vector<CardConstraint> kids) {
  std::vector<CardConstraint> flat;
  for (auto& k : kids) {
    if (!k || k->op == CardOp::True) continue;
    if (k->op == CardOp::And)
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    else
      flat.push_back(std::move(k));
  }
  if (flat.empty()) return card_true();
  if (flat.size() == 1) return flat[0];
  auto c = std::make_shared<CardNode>();
  c->op = CardOp::And;
  c->kids = std::move(flat);
  return c;
}

CardConstraint card_or(std::vector<CardConstraint> kids) {
  if (kids.size() == 1) return kids[0];
  auto c = std::make_shared<CardNode>();
  c->op = CardOp::Or;
  c->kids = std::move(kids);
  return c;
}

bool is_trivial(const CardConstraint& c) { return !c || c->op == CardOp::True; }

bool satisfied(const CardConstraint& c, const CardLookup& card, int n) {
  if (!c) return true;
  switch (c->op) {
    case CardOp::True: return true;
    case CardOp::Cmp: {
      Rational a = evaluate(c->lhs, card, n);
      Rational b = evaluate(c->rhs, card, n);
      switch (c->cmp) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Gt: return a > b;
      }
      return false;
    }
    case CardOp::Not: return !satisfied(c->kids[0], card, n);
    case CardOp::And:
      for (const auto& k : c->kids)
        if (!satisfied(k, card, n)) return false;
      return true;
    case CardOp::Or:
      for (const auto& k : c->kids)
        if (satisfied(k, card, n)) return true;
      return false;
  }
  return false;
}

std::vector<std::string> referenced_predicates(const CardConstraint& c) {
  std::vector<std::string> out;
  if (c) collect(c, out);
  sort_unique(out);
  return out;
}

std::string to_string(const CardConstraint& c) {
  std::ostringstream os;
  print(os, c ? c : card_true(), false);
  return os.str();
}

long long upper_bound(const CardConstraint& c, const std::string& pred,
                      int n) {
  if (!c) return -1;
  if (c->op == CardOp::And) {
    long long best = -1;
    for (const auto& k : c->kids) {
      long long b = upper_bound(k, pred, n);
      if (b >= 0 && (best < 0 || b < best)) best = b;
    }
    return best;
  }
  if (c->op != CardOp::Cmp) return -1;
  // Normalize to lhs - rhs (op) 0 and look for coef*|pred| + const.
  NumExpr diff = num_binary(NumOp::Sub, c->lhs, c->rhs);
  Rational coef, rest;
  bool rest_constant = false;
  if (!split_affine(diff, pred, n, coef, rest, rest_constant) ||
      !rest_constant || coef == 0)
    return -1;
  // coef*p + rest (op) 0.
  Rational bound = -rest / coef;
  bool upper = false;
  bool strict = false;
  switch (c->cmp) {
    case CmpOp::Eq: upper = true; break;
    case CmpOp::Le: upper = coef > 0; break;
    case CmpOp::Lt: upper = coef > 0; strict = true; break;
    case CmpOp::Ge: upper = coef < 0; break;
    case CmpOp::Gt: upper = coef < 0; strict = true; break;
    case CmpOp::Ne: return -1;
  }
  if (!upper) return -1;
  if (bound < 0) return 0;
  Integer fl = bound.get_num() / bound.get_den();
  if (strict && Rational(fl) == bound) fl -= 1;
  if (fl < 0) return 0;
  return fl.get_si();
}

}  // namespace fo2
