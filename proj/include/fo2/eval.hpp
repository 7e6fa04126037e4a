#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fo2/formula.hpp"
#include "fo2/signature.hpp"

namespace fo2 {

// Truth values for the non-equality atoms of a quantifier-free formula over
// the variables x and y. Equality atoms are fixed by the lifted semantics:
// x = x is true, x = y is false.
class LiftedAssignment {
 public:
  void set(const std::string& pred, const std::vector<Var>& args, bool value);
  std::optional<bool> get(const std::string& pred,
                          const std::vector<Var>& args) const;
  // The assignment seen after exchanging x and y.
  LiftedAssignment swapped() const;
  std::size_t size() const { return values_.size(); }

 private:
  std::map<std::pair<std::string, std::vector<Var>>, bool> values_;
};

// Throws SemanticError when qf has a quantifier or an unassigned atom.
bool eval_qf(const Formula& qf, const LiftedAssignment& tau);

// Propositional circuit over the ground atoms of a signature on the domain
// {0..n-1}. Counting quantifiers stay native (exactly / at most / at least
// m true children), so a ground circuit is independent of any encoding.
enum class GOp : std::uint8_t {
  False,
  True,
  Atom,
  Not,
  And,
  Or,
  Iff,
  CountEq,
  CountLe,
  CountGe
};

struct GNode {
  GOp op = GOp::False;
  int count = 0;
  std::uint32_t atom = 0;
  std::vector<std::uint32_t> kids;
};

class GroundFormula {
 public:
  GroundFormula(const Signature& sig, int n);

  int domain_size() const { return n_; }
  const Signature& signature() const { return sig_; }
  std::size_t atom_count() const { return atom_count_; }
  // Atoms of predicate p occupy [offset(p), offset(p) + n^arity).
  std::size_t offset(std::size_t pred) const { return offset_[pred]; }
  std::size_t atom_index(std::size_t pred, int a, int b = 0) const;
  std::string atom_name(std::size_t atom) const;

  const std::vector<GNode>& nodes() const { return nodes_; }
  std::uint32_t root() const { return root_; }

  // Appends a node; children must already exist.
  std::uint32_t add(GNode node);
  void set_root(std::uint32_t root) { root_ = root; }

  bool evaluate(const std::vector<bool>& assignment) const;
  // Bit-sliced evaluation: lane l of atoms[a] is the value of atom a in the
  // l-th of 64 assignments. Returns the lane mask of satisfying ones.
  std::uint64_t evaluate64(const std::uint64_t* atoms,
                           std::vector<std::uint64_t>& scratch) const;

 private:
  Signature sig_;
  int n_;
  std::vector<std::size_t> offset_;
  std::size_t atom_count_ = 0;
  std::vector<GNode> nodes_;
  std::uint32_t root_ = 0;
};

// Requires a sentence (no free variables) over predicates of sig.
GroundFormula ground(const Formula& sentence, const Signature& sig, int n);

}  // namespace fo2
