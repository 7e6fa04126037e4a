#include "fo2/signature.hpp"

#include "fo2/errors.hpp"

namespace fo2 {

void Signature::add(const Predicate& p) {
  if (p.arity != 1 && p.arity != 2)
    throw SemanticError("predicate " + p.name + ": arity must be 1 or 2");
  if (const Predicate* existing = find(p.name)) {
    if (existing->arity != p.arity)
      throw SemanticError("predicate " + p.name + " declared with arity " +
                          std::to_string(existing->arity) + " and " +
                          std::to_string(p.arity));
    return;
  }
  preds_.push_back(p);
}

const Predicate* Signature::find(std::string_view name) const {
  for (const auto& p : preds_)
    if (p.name == name) return &p;
  return nullptr;
}

const Predicate& Signature::at(std::string_view name) const {
  if (const Predicate* p = find(name)) return *p;
  throw SemanticError("unknown predicate " + std::string(name));
}

unsigned long long Signature::ground_atom_count(int n) const {
  unsigned long long total = 0;
  auto nn = static_cast<unsigned long long>(n);
  for (const auto& p : preds_) total += p.arity == 1 ? nn : nn * nn;
  return total;
}

std::string Signature::fresh_name(std::string_view prefix, int start) const {
  for (int k = start;; ++k) {
    std::string name = std::string(prefix) + std::to_string(k);
    if (!contains(name)) return name;
  }
}

}  // namespace fo2
