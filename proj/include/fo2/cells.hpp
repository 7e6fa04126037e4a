#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "fo2/formula.hpp"
#include "fo2/signature.hpp"

namespace fo2 {

// Atom P(x) for a unary P, or R(x,x) for a binary R.
struct UnarySlot {
  std::string pred;
  bool reflexive = false;
};

// Atom R(x,y), or R(y,x) when reversed.
struct BinarySlot {
  std::string pred;
  bool reversed = false;
};

// Lifted interpretations of a quantifier-free matrix Phi(x,y).
//
// A 1-type i assigns the u unary slots; slot k is bit (u-1-k) of i, so the
// first slot is the most significant bit. A 2-table v assigns the b binary
// slots the same way. Unary slots are the unary predicates by name followed
// by the reflexive atoms of the binary predicates by name; binary slots list
// each binary predicate by name, (x,y) before (y,x). Every predicate of the
// signature gets slots, whether or not the matrix mentions it.
class CellStructure {
 public:
  // Bound on (valid 1-types)^2 * 2^b, in bits, for the pair table.
  static constexpr std::uint64_t kMaxPairBits = 1ULL << 31;

  CellStructure(const Formula& matrix, const Signature& sig);

  int u() const { return u_; }
  int b() const { return b_; }
  int num_types() const { return 1 << u_; }
  int num_tables() const { return 1 << b_; }
  const std::vector<UnarySlot>& unary_slots() const { return unary_; }
  const std::vector<BinarySlot>& binary_slots() const { return binary_; }

  // Slot indices, or -1 when the predicate has no such slot.
  int unary_slot(const std::string& pred) const;  // P(x) or R(x,x)
  int binary_slot(const std::string& pred, bool reversed) const;

  bool unary_bit(int i, int slot) const { return (i >> (u_ - 1 - slot)) & 1; }
  bool binary_bit(int v, int slot) const { return (v >> (b_ - 1 - slot)) & 1; }

  // Phi(x,x) holds under tau_x = i.
  bool valid_one_type(int i) const { return valid_[i]; }
  std::vector<int> valid_types() const;

  // n_ijv: Phi(x,x), Phi(y,y), Phi(x,y), Phi(y,x) all hold. Builds the
  // pair table over valid 1-types on first use; throws UnsupportedError if
  // it would be too large.
  bool nijv(int i, int j, int v) const;
  int nij(int i, int j) const;
  // Calls f(v) for every v with n_ijv = 1, in increasing order.
  template <class F>
  void for_each_table(int i, int j, F&& f) const;

  // The matrix mentions no y-unary atom and no R(y,x): the constraint on an
  // ordered pair (c,d) only involves the 1-type of c and the atoms R(c,d).
  bool separable() const { return separable_; }
  // For separable matrices: Phi(x,y) with tau_x = i, eq false, and the
  // forward atoms R(x,y) given by `row` (bit p, MSB-first, for the p-th
  // binary predicate).
  bool row_ok(int i, int row) const;
  int num_binary_preds() const { return b_ / 2; }

  // n_ij for i <= j as CSV lines "i,j,n_ij".
  std::string csv() const;

 private:
  struct Ins {
    enum Kind : std::uint8_t { Bit, True, False, Not, And, Or, Iff } kind;
    int arg = 0;  // bit position, or operand count
  };

  void compile(const Formula& f);
  bool run(std::uint64_t word) const;
  // 64 evaluations at once: lane l sets the low six 2-table bits to l.
  std::uint64_t run64(std::uint64_t word) const;
  std::uint64_t pair_offset(int i, int j) const;
  std::uint64_t cross_word(int i, int j, int v) const;
  std::uint64_t diag_word(int i) const;
  int swap_table(int v) const;
  void build_pairs() const;

  int u_ = 0, b_ = 0;
  std::vector<UnarySlot> unary_;
  std::vector<BinarySlot> binary_;
  std::vector<Ins> prog_;
  std::vector<bool> valid_;
  bool separable_ = true;
  std::vector<std::uint8_t> rows_;  // separable: [i << nb | row]

  mutable std::once_flag pairs_once_;
  std::vector<int> valid_list_;
  // n_ijv per ordered pair of valid types: bit ((a * V + c) << b) | v for
  // the a-th and c-th valid types.
  mutable std::vector<std::uint64_t> cross_;
};

template <class F>
void CellStructure::for_each_table(int i, int j, F&& f) const {
  if (!valid_[i] || !valid_[j]) return;
  build_pairs();
  std::uint64_t base = pair_offset(i, j);
  std::uint64_t end = base + (1ULL << b_);
  for (std::uint64_t w = base; w < end;) {
    std::uint64_t bits = cross_[w >> 6] >> (w & 63);
    std::uint64_t span = std::min<std::uint64_t>(64 - (w & 63), end - w);
    if (span < 64) bits &= (1ULL << span) - 1;
    while (bits) {
      int l = std::countr_zero(bits);
      bits &= bits - 1;
      f(static_cast<int>(w - base) + l);
    }
    w += span;
  }
}

}  // namespace fo2
