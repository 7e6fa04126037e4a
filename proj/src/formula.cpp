#include "fo2/formula.hpp"

#include <algorithm>
#include <sstream>

#include "fo2/errors.hpp"

namespace fo2 {

namespace {

std::shared_ptr<Node> node(Op op) {
  auto n = std::make_shared<Node>();
  n->op = op;
  return n;
}

void collect_vars(const Formula& f, std::set<Var>& bound, std::set<Var>& out,
                  bool only_free) {
  switch (f->op) {
    case Op::Atom:
    case Op::Eq:
      for (Var v : f->args)
        if (!only_free || !bound.count(v)) out.insert(v);
      return;
    default:
      break;
  }
  if (f->is_quantifier()) {
    if (!only_free) out.insert(f->bound);
    bool was_bound = bound.count(f->bound) > 0;
    bound.insert(f->bound);
    collect_vars(f->kids[0], bound, out, only_free);
    if (!was_bound) bound.erase(f->bound);
    return;
  }
  for (const auto& k : f->kids) collect_vars(k, bound, out, only_free);
}

Formula map_vars(const Formula& f, Var from, Var to, bool swap) {
  auto map_var = [&](Var v) {
    if (v == from) return to;
    if (swap && v == to) return from;
    return v;
  };
  if (f->op == Op::Atom || f->op == Op::Eq) {
    auto n = std::make_shared<Node>(*f);
    for (Var& v : n->args) v = map_var(v);
    return n;
  }
  std::vector<Formula> kids;
  kids.reserve(f->kids.size());
  for (const auto& k : f->kids) kids.push_back(map_vars(k, from, to, swap));
  auto n = std::make_shared<Node>(*f);
  n->kids = std::move(kids);
  if (f->is_quantifier()) n->bound = map_var(f->bound);
  return n;
}

// Binding strength used by the printer; quantifiers extend to the right and
// therefore bind weakest.
int precedence(const Formula& f) {
  switch (f->op) {
    case Op::Iff: return 1;
    case Op::Implies: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    case Op::Not: return 5;
    case Op::Forall:
    case Op::Exists:
    case Op::CountEq:
    case Op::CountLe:
    case Op::CountGe: return 0;
    default: return 6;
  }
}

void print(std::ostream& os, const Formula& f, int min_prec);

void print_paren(std::ostream& os, const Formula& f, int min_prec) {
  if (precedence(f) < min_prec) {
    os << '(';
    print(os, f, 0);
    os << ')';
  } else {
    print(os, f, min_prec);
  }
}

void print(std::ostream& os, const Formula& f, int min_prec) {
  switch (f->op) {
    case Op::True: os << "true"; return;
    case Op::False: os << "false"; return;
    case Op::Atom:
      os << f->pred << '(';
      for (std::size_t i = 0; i < f->args.size(); ++i)
        os << (i ? "," : "") << var_name(f->args[i]);
      os << ')';
      return;
    case Op::Eq:
      os << var_name(f->args[0]) << " = " << var_name(f->args[1]);
      return;
    case Op::Not:
      if (f->kids[0]->op == Op::Eq) {
        os << var_name(f->kids[0]->args[0]) << " != "
           << var_name(f->kids[0]->args[1]);
        return;
      }
      os << '!';
      print_paren(os, f->kids[0], 5);
      return;
    case Op::And:
    case Op::Or: {
      const char* sep = f->op == Op::And ? " & " : " | ";
      int kid_prec = precedence(f) + 1;
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) os << sep;
        print_paren(os, f->kids[i], kid_prec);
      }
      return;
    }
    case Op::Implies:
      print_paren(os, f->kids[0], 3);
      os << " -> ";
      print_paren(os, f->kids[1], 2);
      return;
    case Op::Iff:
      print_paren(os, f->kids[0], 2);
      os << " <-> ";
      print_paren(os, f->kids[1], 1);
      return;
    default:
      break;
  }
  // Quantifiers.
  switch (f->op) {
    case Op::Forall: os << "forall "; break;
    case Op::Exists: os << "exists "; break;
    case Op::CountEq: os << "exists{=" << f->count << "} "; break;
    case Op::CountLe: os << "exists{<=" << f->count << "} "; break;
    case Op::CountGe: os << "exists{>=" << f->count << "} "; break;
    default: break;
  }
  os << var_name(f->bound) << ' ';
  const Formula& body = f->kids[0];
  int p = precedence(body);
  if (p == 0 || p >= 5) {
    print(os, body, 0);
  } else {
    os << '(';
    print(os, body, 0);
    os << ')';
  }
  (void)min_prec;
}

}  // namespace

Formula make_true() {
  static const Formula t = node(Op::True);
  return t;
}

Formula make_false() {
  static const Formula f = node(Op::False);
  return f;
}

Formula make_atom(std::string pred, std::vector<Var> args) {
  auto n = node(Op::Atom);
  n->pred = std::move(pred);
  n->args = std::move(args);
  return n;
}

Formula make_eq(Var a, Var b) {
  auto n = node(Op::Eq);
  n->args = {a, b};
  return n;
}

Formula make_not(Formula f) {
  auto n = node(Op::Not);
  n->kids = {std::move(f)};
  return n;
}

Formula make_and(std::vector<Formula> kids) {
  if (kids.empty()) return make_true();
  if (kids.size() == 1) return kids[0];
  auto n = node(Op::And);
  n->kids = std::move(kids);
  return n;
}

Formula make_or(std::vector<Formula> kids) {
  if (kids.empty()) return make_false();
  if (kids.size() == 1) return kids[0];
  auto n = node(Op::Or);
  n->kids = std::move(kids);
  return n;
}

Formula make_implies(Formula a, Formula b) {
  auto n = node(Op::Implies);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

Formula make_iff(Formula a, Formula b) {
  auto n = node(Op::Iff);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

Formula make_quant(Op op, Var bound, Formula body, int count) {
  if (count < 0) throw SemanticError("counting quantifier with negative count");
  auto n = node(op);
  n->bound = bound;
  n->count = count;
  n->kids = {std::move(body)};
  return n;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (a->op != b->op || a->pred != b->pred || a->args != b->args ||
      a->kids.size() != b->kids.size())
    return false;
  if (a->is_quantifier() && (a->bound != b->bound || a->count != b->count))
    return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!structurally_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

std::set<Var> free_vars(const Formula& f) {
  std::set<Var> bound, out;
  collect_vars(f, bound, out, true);
  return out;
}

std::set<Var> all_vars(const Formula& f) {
  std::set<Var> bound, out;
  collect_vars(f, bound, out, false);
  return out;
}

bool is_quantifier_free(const Formula& f) {
  if (f->is_quantifier()) return false;
  return std::all_of(f->kids.begin(), f->kids.end(), is_quantifier_free);
}

bool contains_counting(const Formula& f) {
  if (f->is_counting()) return true;
  return std::any_of(f->kids.begin(), f->kids.end(), contains_counting);
}

std::vector<std::string> predicates_of(const Formula& f) {
  std::vector<std::string> out;
  auto visit = [&](auto&& self, const Formula& g) -> void {
    if (g->op == Op::Atom &&
        std::find(out.begin(), out.end(), g->pred) == out.end())
      out.push_back(g->pred);
    for (const auto& k : g->kids) self(self, k);
  };
  visit(visit, f);
  return out;
}

Formula swap_vars(const Formula& f) { return map_vars(f, Var::X, Var::Y, true); }

Formula substitute(const Formula& f, Var from, Var to) {
  if (from == to) return f;
  return map_vars(f, from, to, false);
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print(os, f, 0);
  return os.str();
}

}  // namespace fo2
