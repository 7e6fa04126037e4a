#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fo2 {

struct Predicate {
  std::string name;
  int arity = 1;           // 1 or 2
  bool synthetic = false;  // introduced by normalization
};

// Ordered predicate table. Declaration order is preserved; lookups are by
// name. Names are unique and each name has a fixed arity.
class Signature {
 public:
  // Throws SemanticError on a duplicate name with a different arity or on
  // an arity outside {1, 2}. Re-adding an identical predicate is a no-op.
  void add(const Predicate& p);
  void add(std::string name, int arity, bool synthetic = false) {
    add(Predicate{std::move(name), arity, synthetic});
  }

  bool contains(std::string_view name) const { return find(name) != nullptr; }
  const Predicate* find(std::string_view name) const;
  const Predicate& at(std::string_view name) const;
  int arity(std::string_view name) const { return at(name).arity; }

  const std::vector<Predicate>& predicates() const { return preds_; }
  std::size_t size() const { return preds_.size(); }

  // Number of ground atoms on a domain of size n.
  unsigned long long ground_atom_count(int n) const;

  // First name of the form prefix + k (k = start, start+1, ...) not yet taken.
  std::string fresh_name(std::string_view prefix, int start = 1) const;

 private:
  std::vector<Predicate> preds_;
};

}  // namespace fo2
