#include "fo2/normalizer.hpp"

#include <algorithm>
#include <sstream>

#include "fo2/errors.hpp"

namespace fo2 {

const char* strategy_name(CountingStrategy s) {
  return s == CountingStrategy::Exclusion ? "exclusion" : "maximize";
}

CountingStrategy parse_strategy(const std::string& name) {
  if (name == "exclusion") return CountingStrategy::Exclusion;
  if (name == "maximize") return CountingStrategy::Maximize;
  throw SemanticError("unknown counting strategy '" + name +
                      "' (expected exclusion or maximize)");
}

std::vector<std::string> NormalizedProblem::negative_predicates() const {
  std::vector<std::string> out = sign_predicates;
  for (const auto& b : blocks)
    if (!b.complement.empty()) out.push_back(b.complement);
  return out;
}

bool NormalizedProblem::is_synthetic(const std::string& pred) const {
  const Predicate* p = signature.find(pred);
  return p && p->synthetic;
}

std::string NameSupply::next(Signature& sig, const std::string& prefix,
                             int& counter, int arity) {
  std::string name;
  do {
    name = prefix + std::to_string(++counter);
  } while (sig.contains(name));
  sig.add(name, arity, true);
  return name;
}

namespace {

Formula atom1(const std::string& p, Var v) { return make_atom(p, {v}); }
Formula atom2(const std::string& p) { return make_atom(p, {Var::X, Var::Y}); }
Formula forall_xy(Formula f) {
  return make_forall(Var::X, make_forall(Var::Y, std::move(f)));
}
Formula forall_x_exists_y(Formula f) {
  return make_forall(Var::X, make_exists(Var::Y, std::move(f)));
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f->op == Op::And) return f->kids;
  if (f->op == Op::True) return {};
  return {f};
}

Formula rebuild(const Formula& f, std::vector<Formula> kids) {
  auto n = std::make_shared<Node>(*f);
  n->kids = std::move(kids);
  return n;
}

// Makes `v` the bound variable y of a quantified body by exchanging x and y
// when needed.
Formula bind_as_y(const Formula& body, Var v) {
  return v == Var::Y ? body : swap_vars(body);
}

// Pushes negations through quantifiers and removes double negations, so
// that sugar like !(forall y !R(x,y)) becomes exists y R(x,y).
Formula push_negations(const Formula& f) {
  if (f->op == Op::Not) {
    const Formula& g = f->kids[0];
    if (g->op == Op::Not) return push_negations(g->kids[0]);
    if (g->op == Op::Forall)
      return make_exists(g->bound, push_negations(make_not(g->kids[0])));
    if (g->op == Op::Exists)
      return make_forall(g->bound, push_negations(make_not(g->kids[0])));
    if (is_quantifier_free(g)) return f;
    return make_not(push_negations(g));
  }
  if (f->op == Op::Atom || f->op == Op::Eq || f->op == Op::True ||
      f->op == Op::False)
    return f;
  std::vector<Formula> kids;
  for (const auto& k : f->kids) kids.push_back(push_negations(k));
  return rebuild(f, std::move(kids));
}

}  // namespace

Formula expand_counting_sugar(const Formula& f) {
  if (f->op == Op::Atom || f->op == Op::Eq || f->op == Op::True ||
      f->op == Op::False)
    return f;
  std::vector<Formula> kids;
  for (const auto& k : f->kids) kids.push_back(expand_counting_sugar(k));
  if (!f->is_counting()) return rebuild(f, std::move(kids));
  const Formula& body = kids[0];
  Var v = f->bound;
  auto exactly = [&](int k) {
    if (k == 0) return make_forall(v, make_not(body));
    return make_quant(Op::CountEq, v, body, k);
  };
  auto at_most = [&](int m) {
    std::vector<Formula> alts;
    for (int k = 0; k <= m; ++k) alts.push_back(exactly(k));
    return make_or(std::move(alts));
  };
  switch (f->op) {
    case Op::CountEq: return exactly(f->count);
    case Op::CountLe: return at_most(f->count);
    default:
      if (f->count == 0) return make_true();
      return make_not(at_most(f->count - 1));
  }
}

// --- counting quantifiers ---------------------------------------------------

namespace {

struct CountingEncoder {
  Signature& sig;
  NameSupply& names;
  CountingStrategy strategy;
  EncodedCounting out;
  std::vector<Formula> axioms;

  void check_body(const Formula& body) {
    if (contains_counting(body))
      throw UnsupportedError("nested counting quantifiers are not supported");
  }

  // closed exists{=m} v. body: returns the fresh C with C(x) <-> body(x).
  std::string define_closed(const Formula& body, Var v) {
    check_body(body);
    std::string c = names.next(sig, "__C", names.card, 1);
    Formula bx = v == Var::X ? body : swap_vars(body);
    axioms.push_back(make_forall(Var::X, make_iff(atom1(c, Var::X), bx)));
    return c;
  }

  Formula block(const Formula& f) {
    const Formula& body = f->kids[0];
    check_body(body);
    // Canonical orientation: the free variable is x, the counted one y.
    Formula b = f->bound == Var::Y ? body : swap_vars(body);
    CountingBlock blk;
    blk.index = ++names.block;
    blk.m = f->count;
    std::string idx = std::to_string(blk.index);
    // The body is used in place; a named guard would only add two binary
    // slots.
    blk.guard = b;
    blk.a = fresh(sig, "__A" + idx, 1);
    if (strategy == CountingStrategy::Exclusion)
      blk.complement = fresh(sig, "__B" + idx, 1);
    for (int j = 1; j <= blk.m; ++j)
      blk.f.push_back(fresh(sig, "__f" + idx + "_" + std::to_string(j), 2));

    Formula a = atom1(blk.a, Var::X);
    Formula active = a;
    if (!blk.complement.empty()) {
      Formula bx = atom1(blk.complement, Var::X);
      axioms.push_back(make_forall(Var::X, make_implies(bx, make_not(a))));
      active = make_or({a, bx});
    }
    std::vector<Formula> fs;
    for (const auto& fj : blk.f) fs.push_back(atom2(fj));
    axioms.push_back(forall_xy(
        make_implies(active, make_iff(blk.guard, make_or(fs)))));
    if (!blk.complement.empty())
      axioms.push_back(forall_xy(make_implies(make_or(fs), active)));
    for (std::size_t j = 0; j < fs.size(); ++j)
      for (std::size_t k = j + 1; k < fs.size(); ++k)
        axioms.push_back(forall_xy(make_implies(fs[j], make_not(fs[k]))));
    for (const auto& fj : fs)
      axioms.push_back(forall_x_exists_y(make_implies(active, fj)));

    // Cardinality ties: m * (|A| + |B|) = sum_j |f_j|, or |f_j| = |A|.
    if (strategy == CountingStrategy::Exclusion) {
      NumExpr lhs = num_binary(NumOp::Add, num_card(blk.a),
                               num_card(blk.complement));
      if (blk.m != 1)
        lhs = num_binary(NumOp::Mul, num_const(Rational(blk.m)), lhs);
      NumExpr rhs = num_card(blk.f[0]);
      for (std::size_t j = 1; j < blk.f.size(); ++j)
        rhs = num_binary(NumOp::Add, rhs, num_card(blk.f[j]));
      out.constraints.push_back(card_cmp(CmpOp::Eq, lhs, rhs));
    } else {
      for (const auto& fj : blk.f)
        out.constraints.push_back(
            card_cmp(CmpOp::Eq, num_card(fj), num_card(blk.a)));
      out.maximize.push_back({blk.index, blk.a, blk.f});
    }
    Var w = other(f->bound);
    std::string a_name = blk.a;
    out.blocks.push_back(std::move(blk));
    return atom1(a_name, w);
  }

  static std::string fresh(Signature& sig, std::string name, int arity) {
    std::string base = name;
    for (int k = 2; sig.contains(name); ++k) name = base + "_" + std::to_string(k);
    sig.add(name, arity, true);
    return name;
  }

  Formula visit(const Formula& f) {
    if (f->op == Op::CountEq) {
      if (f->count < 1)
        throw SemanticError("exists{=0} must be expanded before encoding");
      // exists{=m} y (phi(x) & psi) with m >= 1 is phi(x) & exists{=m} y psi.
      const Formula& body = f->kids[0];
      if (body->op == Op::And) {
        std::vector<Formula> outside, inside;
        for (const auto& k : body->kids)
          (free_vars(k).count(f->bound) ? inside : outside).push_back(k);
        if (!outside.empty()) {
          Formula rest = make_quant(Op::CountEq, f->bound,
                                    make_and(std::move(inside)), f->count);
          for (auto& o : outside) o = visit(o);
          outside.push_back(visit(rest));
          return make_and(std::move(outside));
        }
      }
      if (!free_vars(f).empty()) return block(f);
      // Closed counting subformula inside a connective: its truth value is
      // carried by a uniform unary Z tied to the cardinality of C.
      std::string c = define_closed(f->kids[0], f->bound);
      std::string z = names.next(sig, "__Z", names.closed, 1);
      axioms.push_back(
          forall_xy(make_iff(atom1(z, Var::X), atom1(z, Var::Y))));
      NumExpr m = num_const(Rational(f->count));
      out.constraints.push_back(card_or(
          {card_and({card_cmp(CmpOp::Eq, num_card(z), num_domain()),
                     card_cmp(CmpOp::Eq, num_card(c), m)}),
           card_and({card_cmp(CmpOp::Eq, num_card(z), num_const(0)),
                     card_cmp(CmpOp::Ne, num_card(c), m)})}));
      return atom1(z, Var::X);
    }
    if (f->is_counting())
      throw SemanticError("counting sugar must be expanded before encoding");
    if (f->kids.empty()) return f;
    std::vector<Formula> kids;
    for (const auto& k : f->kids) kids.push_back(visit(k));
    return rebuild(f, std::move(kids));
  }
};

}  // namespace

EncodedCounting encode_counting(const Formula& sentence, Signature& sig,
                                NameSupply& names, CountingStrategy strategy) {
  CountingEncoder enc{sig, names, strategy, {}, {}};
  std::vector<Formula> parts;
  for (const auto& c : conjuncts(sentence)) {
    if (c->op == Op::CountEq && free_vars(c).empty()) {
      // Top-level exists{=m} x. psi(x): |C| = m directly.
      std::string cn = enc.define_closed(c->kids[0], c->bound);
      enc.out.constraints.push_back(card_cmp(
          CmpOp::Eq, num_card(cn), num_const(Rational(c->count))));
      continue;
    }
    parts.push_back(enc.visit(c));
  }
  for (auto& a : enc.axioms) parts.push_back(a);
  enc.out.sentence = make_and(std::move(parts));
  return std::move(enc.out);
}

// --- Scott normal form --------------------------------------------------------

namespace {

struct ScottBuilder {
  Signature& sig;
  NameSupply& names;
  std::vector<Formula> matrix;
  std::vector<Formula> existentials;

  // Replaces every quantified subformula by an atom over a fresh
  // definitional predicate; the result is quantifier-free.
  Formula replace(const Formula& f) {
    if (is_quantifier_free(f)) return f;
    if (!f->is_quantifier()) {
      std::vector<Formula> kids;
      for (const auto& k : f->kids) kids.push_back(replace(k));
      return rebuild(f, std::move(kids));
    }
    if (f->is_counting())
      throw SemanticError("counting quantifiers must be encoded first");
    Formula body = replace(f->kids[0]);
    auto fv = free_vars(f);
    bool universal = f->op == Op::Forall;
    if (fv.empty()) {
      // Closed: Z(x) <-> Q y. body(y); the definition forces Z uniform.
      Formula by = bind_as_y(body, f->bound);
      std::string z = names.next(sig, "__Z", names.closed, 1);
      Formula zx = atom1(z, Var::X);
      define(zx, by, universal);
      return zx;
    }
    Var w = *fv.begin();
    // Orient so that the free variable is x.
    Formula b = w == Var::X ? body : swap_vars(body);
    std::string d = names.next(sig, "__D", names.def, 1);
    define(atom1(d, Var::X), b, universal);
    return atom1(d, w);
  }

  // head(x) <-> forall y body   or   head(x) <-> exists y body
  void define(const Formula& head, const Formula& body, bool universal) {
    if (universal) {
      matrix.push_back(make_implies(head, body));
      existentials.push_back(make_or({head, make_not(body)}));
    } else {
      matrix.push_back(make_implies(body, head));
      existentials.push_back(make_or({make_not(head), body}));
    }
  }

  // forall x. body with x as the outer variable.
  void universal_conjunct(const Formula& body) {
    if (body->op == Op::And) {
      for (const auto& k : body->kids) universal_conjunct(k);
      return;
    }
    if (body->op == Op::Forall && body->bound == Var::Y) {
      matrix.push_back(replace(body->kids[0]));
      return;
    }
    if (body->op == Op::Exists && body->bound == Var::Y) {
      existentials.push_back(replace(body->kids[0]));
      return;
    }
    // forall x (phi(x) | Q y. psi): pull a single quantifier over y out of
    // a disjunction whose other members do not mention y.
    if (body->op == Op::Or || body->op == Op::Implies) {
      std::vector<Formula> alts;
      if (body->op == Op::Or) {
        alts = body->kids;
      } else {
        alts = {make_not(body->kids[0]), body->kids[1]};
      }
      int quantified = -1;
      bool ok = true;
      for (std::size_t i = 0; i < alts.size(); ++i) {
        const Formula& a = alts[i];
        if ((a->op == Op::Forall || a->op == Op::Exists) &&
            a->bound == Var::Y && quantified < 0) {
          quantified = static_cast<int>(i);
        } else if (all_vars(a).count(Var::Y)) {
          ok = false;
        }
      }
      if (ok && quantified >= 0) {
        const Formula& q = alts[quantified];
        std::vector<Formula> rest;
        for (std::size_t i = 0; i < alts.size(); ++i)
          rest.push_back(static_cast<int>(i) == quantified ? q->kids[0]
                                                          : alts[i]);
        Formula merged = replace(make_or(std::move(rest)));
        if (q->op == Op::Forall) {
          matrix.push_back(merged);
        } else {
          existentials.push_back(merged);
        }
        return;
      }
    }
    matrix.push_back(replace(body));
  }

  void conjunct(const Formula& c) {
    if (c->op == Op::And) {
      for (const auto& k : c->kids) conjunct(k);
      return;
    }
    if (c->op == Op::Forall) {
      universal_conjunct(c->bound == Var::X ? c->kids[0]
                                            : swap_vars(c->kids[0]));
      return;
    }
    if (c->op == Op::Exists) {
      // exists v. psi(v)  ==>  forall x exists y. psi(y)
      existentials.push_back(replace(bind_as_y(c->kids[0], c->bound)));
      return;
    }
    matrix.push_back(replace(c));
  }
};

}  // namespace

ScottForm to_scott(const Formula& sentence, Signature& sig, NameSupply& names) {
  if (contains_counting(sentence))
    throw SemanticError("counting quantifiers must be encoded first");
  ScottBuilder b{sig, names, {}, {}};
  for (const auto& c : conjuncts(push_negations(sentence))) b.conjunct(c);
  ScottForm out;
  out.matrix = make_and(std::move(b.matrix));
  out.existentials = std::move(b.existentials);
  return out;
}

SignedMatrix eliminate_existentials(const ScottForm& scott, Signature& sig,
                                    NameSupply& names) {
  SignedMatrix out;
  std::vector<Formula> parts = conjuncts(scott.matrix);
  if (scott.existentials.empty()) {
    out.matrix = scott.matrix;
    return out;
  }
  for (const auto& psi : scott.existentials) {
    std::string p = names.next(sig, "__P", names.sign, 1);
    out.signs.push_back(p);
    parts.push_back(make_implies(atom1(p, Var::X), make_not(psi)));
  }
  out.matrix = make_and(std::move(parts));
  return out;
}

namespace {

// Truth of psi(x,x) under `atoms` (bit k for the k-th distinct atom of the
// diagonal). Atoms are numbered on first sight, so a first call with
// atoms = 0 collects them.
bool eval_diagonal(const Formula& f, std::vector<std::string>& names,
                   unsigned atoms) {
  switch (f->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Eq: return true;
    case Op::Atom: {
      std::string key = f->pred + (f->args.size() == 1 ? "/1" : "/2");
      auto it = std::find(names.begin(), names.end(), key);
      std::size_t k = static_cast<std::size_t>(it - names.begin());
      if (it == names.end()) names.push_back(key);
      return k < 32 && ((atoms >> k) & 1);
    }
    case Op::Not: return !eval_diagonal(f->kids[0], names, atoms);
    case Op::And:
      for (const auto& k : f->kids)
        if (!eval_diagonal(k, names, atoms)) return false;
      return true;
    case Op::Or:
      for (const auto& k : f->kids)
        if (eval_diagonal(k, names, atoms)) return true;
      return false;
    case Op::Implies:
      return !eval_diagonal(f->kids[0], names, atoms) ||
             eval_diagonal(f->kids[1], names, atoms);
    case Op::Iff:
      return eval_diagonal(f->kids[0], names, atoms) ==
             eval_diagonal(f->kids[1], names, atoms);
    default:
      throw SemanticError("existential body must be quantifier-free");
  }
}

// exists y. psi(x,y) always holds when psi(x,x) is valid: y = x witnesses it.
bool self_witnessed(const Formula& psi) {
  std::vector<std::string> names;
  eval_diagonal(psi, names, 0);  // collects the atoms
  if (names.size() > 16) return false;
  for (unsigned a = 0; a < (1u << names.size()); ++a)
    if (!eval_diagonal(psi, names, a)) return false;
  return true;
}

}  // namespace

NormalizedProblem normalize(const Problem& problem,
                            const NormalizeOptions& options) {
  NormalizedProblem np;
  np.strategy = options.strategy;
  np.signature = problem.signature;
  NameSupply names;
  Formula s = expand_counting_sugar(problem.sentence);
  EncodedCounting enc =
      encode_counting(s, np.signature, names, options.strategy);
  ScottForm scott = to_scott(enc.sentence, np.signature, names);
  std::erase_if(scott.existentials, self_witnessed);
  np.existentials = scott.existentials;
  SignedMatrix sm = eliminate_existentials(scott, np.signature, names);
  np.matrix = sm.matrix;
  np.sign_predicates = sm.signs;
  np.blocks = std::move(enc.blocks);
  np.maximize = std::move(enc.maximize);
  std::vector<CardConstraint> cs;
  if (problem.constraint && !is_trivial(problem.constraint))
    cs.push_back(problem.constraint);
  for (auto& c : enc.constraints) cs.push_back(c);
  np.constraint = card_and(std::move(cs));
  return np;
}

std::string dump(const NormalizedProblem& np) {
  std::ostringstream os;
  os << "# normalized (counting strategy: " << strategy_name(np.strategy)
     << ")\n";
  for (std::size_t l = 0; l < np.sign_predicates.size(); ++l)
    os << "# sign " << np.sign_predicates[l] << ": exists y. "
       << to_string(np.existentials[l]) << "\n";
  for (const auto& b : np.blocks) {
    os << "# block " << b.index << ": " << b.a << "(x) <-> exists{=" << b.m
       << "} y. " << to_string(b.guard) << "; f =";
    for (const auto& f : b.f) os << " " << f;
    if (!b.complement.empty()) os << "; complement " << b.complement;
    os << "; divisor " << b.m << "!\n";
  }
  for (const auto& d : np.maximize) {
    os << "# maximize(" << d.a;
    for (const auto& f : d.f) os << ", " << f;
    os << ")\n";
  }
  for (const auto& p : np.signature.predicates())
    os << "predicate " << p.name << "/" << p.arity << "\n";
  os << "forall x forall y (" << to_string(np.matrix) << ")\n";
  if (np.constraint && !is_trivial(np.constraint)) {
    std::vector<CardConstraint> parts = np.constraint->op == CardOp::And
                                            ? np.constraint->kids
                                            : std::vector{np.constraint};
    for (const auto& c : parts) os << "constraint " << to_string(c) << "\n";
  }
  return os.str();
}

}  // namespace fo2
