#include "fo2/eval.hpp"

#include "fo2/errors.hpp"

namespace fo2 {

void LiftedAssignment::set(const std::string& pred,
                           const std::vector<Var>& args, bool value) {
  values_[{pred, args}] = value;
}

std::optional<bool> LiftedAssignment::get(const std::string& pred,
                                          const std::vector<Var>& args) const {
  auto it = values_.find({pred, args});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

LiftedAssignment LiftedAssignment::swapped() const {
  LiftedAssignment out;
  for (const auto& [key, value] : values_) {
    std::vector<Var> args = key.second;
    for (Var& v : args) v = other(v);
    out.values_[{key.first, args}] = value;
  }
  return out;
}

bool eval_qf(const Formula& f, const LiftedAssignment& tau) {
  switch (f->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Eq: return f->args[0] == f->args[1];
    case Op::Atom: {
      auto v = tau.get(f->pred, f->args);
      if (!v) throw SemanticError("unassigned atom " + to_string(f));
      return *v;
    }
    case Op::Not: return !eval_qf(f->kids[0], tau);
    case Op::And:
      for (const auto& k : f->kids)
        if (!eval_qf(k, tau)) return false;
      return true;
    case Op::Or:
      for (const auto& k : f->kids)
        if (eval_qf(k, tau)) return true;
      return false;
    case Op::Implies:
      return !eval_qf(f->kids[0], tau) || eval_qf(f->kids[1], tau);
    case Op::Iff: return eval_qf(f->kids[0], tau) == eval_qf(f->kids[1], tau);
    default:
      throw SemanticError("quantifier in quantifier-free context: " +
                          to_string(f));
  }
}

GroundFormula::GroundFormula(const Signature& sig, int n) : sig_(sig), n_(n) {
  for (const auto& p : sig_.predicates()) {
    offset_.push_back(atom_count_);
    atom_count_ += p.arity == 1 ? n : static_cast<std::size_t>(n) * n;
  }
}

std::size_t GroundFormula::atom_index(std::size_t pred, int a, int b) const {
  return offset_[pred] +
         (sig_.predicates()[pred].arity == 1 ? a : a * n_ + b);
}

std::string GroundFormula::atom_name(std::size_t atom) const {
  std::size_t p = 0;
  while (p + 1 < offset_.size() && offset_[p + 1] <= atom) ++p;
  const Predicate& pred = sig_.predicates()[p];
  std::size_t local = atom - offset_[p];
  if (pred.arity == 1) return pred.name + "(" + std::to_string(local) + ")";
  return pred.name + "(" + std::to_string(local / n_) + "," +
         std::to_string(local % n_) + ")";
}

std::uint32_t GroundFormula::add(GNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

bool GroundFormula::evaluate(const std::vector<bool>& assignment) const {
  std::vector<std::uint64_t> words(atom_count_), scratch;
  for (std::size_t a = 0; a < atom_count_; ++a)
    words[a] = assignment[a] ? 1 : 0;
  return evaluate64(words.data(), scratch) & 1;
}

std::uint64_t GroundFormula::evaluate64(
    const std::uint64_t* atoms, std::vector<std::uint64_t>& val) const {
  val.resize(nodes_.size());
  // Saturating per-lane counters for counting nodes: at[c] marks lanes whose
  // running count is exactly c (the last slot means "more than m").
  std::vector<std::uint64_t> at;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const GNode& node = nodes_[i];
    std::uint64_t r = 0;
    switch (node.op) {
      case GOp::False: r = 0; break;
      case GOp::True: r = ~0ULL; break;
      case GOp::Atom: r = atoms[node.atom]; break;
      case GOp::Not: r = ~val[node.kids[0]]; break;
      case GOp::And:
        r = ~0ULL;
        for (auto k : node.kids) r &= val[k];
        break;
      case GOp::Or:
        for (auto k : node.kids) r |= val[k];
        break;
      case GOp::Iff: r = ~(val[node.kids[0]] ^ val[node.kids[1]]); break;
      case GOp::CountEq:
      case GOp::CountLe:
      case GOp::CountGe: {
        int m = node.count;
        at.assign(m + 2, 0);
        at[0] = ~0ULL;
        for (auto k : node.kids) {
          std::uint64_t b = val[k];
          at[m + 1] |= at[m] & b;
          for (int c = m; c >= 1; --c) at[c] = (at[c] & ~b) | (at[c - 1] & b);
          at[0] &= ~b;
        }
        if (node.op == GOp::CountEq) {
          r = at[m];
        } else if (node.op == GOp::CountLe) {
          for (int c = 0; c <= m; ++c) r |= at[c];
        } else {
          r = at[m] | at[m + 1];
        }
        break;
      }
    }
    val[i] = r;
  }
  return val[root_];
}

namespace {

struct Grounder {
  GroundFormula& g;
  std::uint32_t false_id, true_id;
  int env[2] = {-1, -1};

  std::uint32_t add(GNode node);

  std::uint32_t connective(GOp op, std::vector<std::uint32_t> kids) {
    // Constant folding keeps the circuit small for equality-heavy inputs.
    std::uint32_t absorbing = op == GOp::And ? false_id : true_id;
    std::uint32_t neutral = op == GOp::And ? true_id : false_id;
    std::vector<std::uint32_t> keep;
    for (auto k : kids) {
      if (k == absorbing) return absorbing;
      if (k != neutral) keep.push_back(k);
    }
    if (keep.empty()) return neutral;
    if (keep.size() == 1) return keep[0];
    GNode node;
    node.op = op;
    node.kids = std::move(keep);
    return add(std::move(node));
  }

  std::uint32_t negate(std::uint32_t k) {
    if (k == true_id) return false_id;
    if (k == false_id) return true_id;
    GNode node;
    node.op = GOp::Not;
    node.kids = {k};
    return add(std::move(node));
  }

  std::uint32_t visit(const Formula& f) {
    switch (f->op) {
      case Op::True: return true_id;
      case Op::False: return false_id;
      case Op::Eq:
        return value(f->args[0]) == value(f->args[1]) ? true_id : false_id;
      case Op::Atom: {
        const auto& preds = g.signature().predicates();
        std::size_t p = 0;
        while (p < preds.size() && preds[p].name != f->pred) ++p;
        if (p == preds.size())
          throw SemanticError("undeclared predicate " + f->pred);
        GNode node;
        node.op = GOp::Atom;
        node.atom = static_cast<std::uint32_t>(g.atom_index(
            p, value(f->args[0]), f->args.size() > 1 ? value(f->args[1]) : 0));
        return add(std::move(node));
      }
      case Op::Not: return negate(visit(f->kids[0]));
      case Op::And:
      case Op::Or: {
        std::vector<std::uint32_t> kids;
        for (const auto& k : f->kids) kids.push_back(visit(k));
        return connective(f->op == Op::And ? GOp::And : GOp::Or,
                          std::move(kids));
      }
      case Op::Implies:
        return connective(GOp::Or,
                          {negate(visit(f->kids[0])), visit(f->kids[1])});
      case Op::Iff: {
        std::uint32_t a = visit(f->kids[0]), b = visit(f->kids[1]);
        if (a == true_id) return b;
        if (b == true_id) return a;
        if (a == false_id) return negate(b);
        if (b == false_id) return negate(a);
        GNode node;
        node.op = GOp::Iff;
        node.kids = {a, b};
        return add(std::move(node));
      }
      default:
        break;
    }
    // Quantifiers: one child per domain element.
    int slot = static_cast<int>(f->bound);
    int saved = env[slot];
    std::vector<std::uint32_t> kids;
    for (int d = 0; d < g.domain_size(); ++d) {
      env[slot] = d;
      kids.push_back(visit(f->kids[0]));
    }
    env[slot] = saved;
    switch (f->op) {
      case Op::Forall: return connective(GOp::And, std::move(kids));
      case Op::Exists: return connective(GOp::Or, std::move(kids));
      default: {
        GNode node;
        node.op = f->op == Op::CountEq   ? GOp::CountEq
                  : f->op == Op::CountLe ? GOp::CountLe
                                         : GOp::CountGe;
        node.count = f->count;
        node.kids = std::move(kids);
        return add(std::move(node));
      }
    }
  }

  int value(Var v) const {
    int d = env[static_cast<int>(v)];
    if (d < 0) throw SemanticError("free variable in grounded formula");
    return d;
  }
};

std::uint32_t Grounder::add(GNode node) { return g.add(std::move(node)); }

}  // namespace

GroundFormula ground(const Formula& sentence, const Signature& sig, int n) {
  if (n < 1) throw SemanticError("domain size must be at least 1");
  if (!free_vars(sentence).empty())
    throw SemanticError("cannot ground a formula with free variables");
  GroundFormula g(sig, n);
  GNode f, t;
  f.op = GOp::False;
  t.op = GOp::True;
  std::uint32_t fid = g.add(f);
  std::uint32_t tid = g.add(t);
  Grounder grounder{g, fid, tid};
  g.set_root(grounder.visit(sentence));
  return g;
}

}  // namespace fo2
