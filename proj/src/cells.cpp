#include "fo2/cells.hpp"

#include <algorithm>
#include <sstream>

#include "fo2/errors.hpp"

namespace fo2 {

CellStructure::CellStructure(const Formula& matrix, const Signature& sig) {
  if (!is_quantifier_free(matrix))
    throw SemanticError("cell matrix must be quantifier-free");
  std::vector<std::string> unary, binary;
  for (const auto& p : sig.predicates())
    (p.arity == 1 ? unary : binary).push_back(p.name);
  std::sort(unary.begin(), unary.end());
  std::sort(binary.begin(), binary.end());
  for (const auto& p : unary) unary_.push_back({p, false});
  for (const auto& p : binary) unary_.push_back({p, true});
  for (const auto& p : binary) {
    binary_.push_back({p, false});
    binary_.push_back({p, true});
  }
  u_ = static_cast<int>(unary_.size());
  b_ = static_cast<int>(binary_.size());
  if (u_ > 24 || 2 * u_ + b_ + 1 > 64)
    throw UnsupportedError("signature too large for cell enumeration (u=" +
                           std::to_string(u_) + ", b=" + std::to_string(b_) +
                           ")");
  compile(matrix);

  valid_.resize(num_types());
  for (int i = 0; i < num_types(); ++i) {
    valid_[i] = run(diag_word(i));
    if (valid_[i]) valid_list_.push_back(i);
  }

  if (separable_) {
    int nb = num_binary_preds();
    rows_.assign(static_cast<std::size_t>(num_types()) << nb, 0);
    for (int i = 0; i < num_types(); ++i) {
      if (!valid_[i]) continue;
      for (int row = 0; row < (1 << nb); ++row) {
        int v = 0;
        for (int p = 0; p < nb; ++p)
          if ((row >> (nb - 1 - p)) & 1) v |= 1 << (b_ - 1 - 2 * p);
        rows_[(static_cast<std::size_t>(i) << nb) | row] =
            run(cross_word(i, 0, v));
      }
    }
  }
}

int CellStructure::unary_slot(const std::string& pred) const {
  for (int k = 0; k < u_; ++k)
    if (unary_[k].pred == pred) return k;
  return -1;
}

int CellStructure::binary_slot(const std::string& pred, bool reversed) const {
  for (int l = 0; l < b_; ++l)
    if (binary_[l].pred == pred && binary_[l].reversed == reversed) return l;
  return -1;
}

std::vector<int> CellStructure::valid_types() const { return valid_list_; }

// Word layout: x-type in bits [u+b, 2u+b), y-type in [b, u+b), the 2-table
// in [0, b), equality at bit 2u+b.
void CellStructure::compile(const Formula& f) {
  auto unary_pos = [&](int slot, Var v) {
    int base = v == Var::X ? u_ + b_ : b_;
    return base + (u_ - 1 - slot);
  };
  switch (f->op) {
    case Op::True: prog_.push_back({Ins::True, 0}); return;
    case Op::False: prog_.push_back({Ins::False, 0}); return;
    case Op::Eq:
      if (f->args[0] == f->args[1]) {
        prog_.push_back({Ins::True, 0});
      } else {
        prog_.push_back({Ins::Bit, 2 * u_ + b_});
      }
      return;
    case Op::Atom: {
      int slot = unary_slot(f->pred);
      if (slot < 0) throw SemanticError("unknown predicate " + f->pred);
      if (f->args.size() == 1) {
        if (f->args[0] == Var::Y) separable_ = false;
        prog_.push_back({Ins::Bit, unary_pos(slot, f->args[0])});
      } else if (f->args[0] == f->args[1]) {
        if (f->args[0] == Var::Y) separable_ = false;
        prog_.push_back({Ins::Bit, unary_pos(slot, f->args[0])});
      } else {
        bool reversed = f->args[0] == Var::Y;
        if (reversed) separable_ = false;
        prog_.push_back({Ins::Bit, b_ - 1 - binary_slot(f->pred, reversed)});
      }
      return;
    }
    case Op::Not:
      compile(f->kids[0]);
      prog_.push_back({Ins::Not, 1});
      return;
    case Op::And:
    case Op::Or:
      for (const auto& k : f->kids) compile(k);
      prog_.push_back({f->op == Op::And ? Ins::And : Ins::Or,
                       static_cast<int>(f->kids.size())});
      return;
    case Op::Implies:
      compile(f->kids[0]);
      prog_.push_back({Ins::Not, 1});
      compile(f->kids[1]);
      prog_.push_back({Ins::Or, 2});
      return;
    case Op::Iff:
      compile(f->kids[0]);
      compile(f->kids[1]);
      prog_.push_back({Ins::Iff, 2});
      return;
    default:
      throw SemanticError("cell matrix must be quantifier-free");
  }
}

bool CellStructure::run(std::uint64_t word) const {
  thread_local std::vector<char> storage;
  if (storage.size() < prog_.size() + 1) storage.resize(prog_.size() + 1);
  char* stack = storage.data();
  int top = 0;
  for (const Ins& ins : prog_) {
    switch (ins.kind) {
      case Ins::Bit: stack[top++] = (word >> ins.arg) & 1; break;
      case Ins::True: stack[top++] = true; break;
      case Ins::False: stack[top++] = false; break;
      case Ins::Not: stack[top - 1] = !stack[top - 1]; break;
      case Ins::And: {
        bool r = true;
        for (int k = 0; k < ins.arg; ++k) r = r && stack[top - 1 - k];
        top -= ins.arg;
        stack[top++] = r;
        break;
      }
      case Ins::Or: {
        bool r = false;
        for (int k = 0; k < ins.arg; ++k) r = r || stack[top - 1 - k];
        top -= ins.arg;
        stack[top++] = r;
        break;
      }
      case Ins::Iff:
        top -= 2;
        stack[top] = stack[top] == stack[top + 1];
        ++top;
        break;
    }
  }
  return stack[0];
}

std::uint64_t CellStructure::cross_word(int i, int j, int v) const {
  return (static_cast<std::uint64_t>(i) << (u_ + b_)) |
         (static_cast<std::uint64_t>(j) << b_) | static_cast<std::uint64_t>(v);
}

std::uint64_t CellStructure::diag_word(int i) const {
  // Phi(x,x): y reads as x, every binary atom as its reflexive slot.
  int v = 0;
  for (int l = 0; l < b_; ++l) {
    int slot = unary_slot(binary_[l].pred);
    if (unary_bit(i, slot)) v |= 1 << (b_ - 1 - l);
  }
  return cross_word(i, i, v) | (1ULL << (2 * u_ + b_));
}

int CellStructure::swap_table(int v) const {
  int out = 0;
  for (int l = 0; l < b_; ++l)
    if (binary_bit(v, l)) out |= 1 << (b_ - 1 - (l ^ 1));
  return out;
}

std::uint64_t CellStructure::run64(std::uint64_t word) const {
  static constexpr std::uint64_t kLane[6] = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  thread_local std::vector<std::uint64_t> storage;
  if (storage.size() < prog_.size() + 1) storage.resize(prog_.size() + 1);
  std::uint64_t* stack = storage.data();
  int lane_bits = std::min(b_, 6);
  int top = 0;
  for (const Ins& ins : prog_) {
    switch (ins.kind) {
      case Ins::Bit:
        stack[top++] = ins.arg < lane_bits ? kLane[ins.arg]
                       : (word >> ins.arg) & 1 ? ~0ULL
                                               : 0;
        break;
      case Ins::True: stack[top++] = ~0ULL; break;
      case Ins::False: stack[top++] = 0; break;
      case Ins::Not: stack[top - 1] = ~stack[top - 1]; break;
      case Ins::And: {
        std::uint64_t r = ~0ULL;
        for (int k = 0; k < ins.arg; ++k) r &= stack[top - 1 - k];
        top -= ins.arg;
        stack[top++] = r;
        break;
      }
      case Ins::Or: {
        std::uint64_t r = 0;
        for (int k = 0; k < ins.arg; ++k) r |= stack[top - 1 - k];
        top -= ins.arg;
        stack[top++] = r;
        break;
      }
      case Ins::Iff:
        top -= 2;
        stack[top] = ~(stack[top] ^ stack[top + 1]);
        ++top;
        break;
    }
  }
  return lane_bits == 6 ? stack[0] : stack[0] & ((1ULL << (1 << lane_bits)) - 1);
}

std::uint64_t CellStructure::pair_offset(int i, int j) const {
  auto index = [&](int t) {
    return static_cast<std::uint64_t>(
        std::lower_bound(valid_list_.begin(), valid_list_.end(), t) -
        valid_list_.begin());
  };
  return (index(i) * valid_list_.size() + index(j)) << b_;
}

void CellStructure::build_pairs() const {
  std::call_once(pairs_once_, [this] {
    std::uint64_t V = valid_list_.size();
    if (V * V > (kMaxPairBits >> b_))
      throw UnsupportedError(
          "pair table over " + std::to_string(V) + " valid 1-types and " +
          std::to_string(b_) + " binary slots is too large; reduce the "
          "signature");
    std::uint64_t per_pair = 1ULL << b_;
    std::size_t words = static_cast<std::size_t>((V * V * per_pair + 63) / 64);
    // Directed table: Phi(x,y) alone.
    std::vector<std::uint64_t> directed(words, 0);
    auto set_chunk = [](std::vector<std::uint64_t>& t, std::uint64_t pos,
                        std::uint64_t bits) {
      t[pos >> 6] |= bits << (pos & 63);
    };
    int step = b_ >= 6 ? 64 : 1 << b_;
    for (std::uint64_t a = 0; a < V; ++a)
      for (std::uint64_t c = 0; c < V; ++c) {
        std::uint64_t base = (a * V + c) * per_pair;
        for (int v = 0; v < num_tables(); v += step) {
          std::uint64_t bits =
              run64(cross_word(valid_list_[a], valid_list_[c], v));
          if (bits) set_chunk(directed, base + static_cast<unsigned>(v), bits);
        }
      }
    auto get = [&](std::uint64_t pos) {
      return (directed[pos >> 6] >> (pos & 63)) & 1;
    };
    std::vector<std::uint64_t> table(words, 0);
    for (std::uint64_t a = 0; a < V; ++a)
      for (std::uint64_t c = 0; c < V; ++c) {
        std::uint64_t base = (a * V + c) * per_pair;
        std::uint64_t rev = (c * V + a) * per_pair;
        for (int v = 0; v < num_tables(); ++v)
          if (get(base + static_cast<unsigned>(v)) &&
              get(rev + static_cast<unsigned>(swap_table(v))))
            set_chunk(table, base + static_cast<unsigned>(v), 1);
      }
    cross_ = std::move(table);
  });
}

bool CellStructure::nijv(int i, int j, int v) const {
  if (!valid_[i] || !valid_[j]) return false;
  build_pairs();
  std::uint64_t w = pair_offset(i, j) + static_cast<unsigned>(v);
  return (cross_[w >> 6] >> (w & 63)) & 1;
}

int CellStructure::nij(int i, int j) const {
  int total = 0;
  for_each_table(i, j, [&](int) { ++total; });
  return total;
}

bool CellStructure::row_ok(int i, int row) const {
  if (!separable_) throw SemanticError("row table requires a separable matrix");
  return rows_[(static_cast<std::size_t>(i) << num_binary_preds()) | row];
}

std::string CellStructure::csv() const {
  std::ostringstream os;
  os << "i,j,n_ij\n";
  for (int i = 0; i < num_types(); ++i)
    for (int j = i; j < num_types(); ++j)
      os << i << "," << j << "," << nij(i, j) << "\n";
  return os.str();
}

}  // namespace fo2
