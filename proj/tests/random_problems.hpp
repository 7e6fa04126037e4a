#pragma once

// Seeded generator of small problems: at most two unary predicates (A, B)
// and one binary predicate (R), mixing universal, existential and counting
// quantifiers, equality and cardinality constraints.

#include <random>
#include <string>
#include <vector>

namespace fo2test {

class RandomProblems {
 public:
  explicit RandomProblems(unsigned long long seed) : rng_(seed) {}

  std::string next() {
    unary_ = pick(3);  // 0..2 unary predicates
    binary_ = pick(4) != 0;
    if (unary_ == 0 && !binary_) binary_ = true;
    std::string src;
    const char* names[] = {"A", "B"};
    for (int i = 0; i < unary_; ++i)
      src += std::string("predicate ") + names[i] + "/1\n";
    if (binary_) src += "predicate R/2\n";
    counting_left_ = 1;  // keeps the encoded signature small
    int parts = 1 + pick(3);
    std::vector<std::string> conj;
    for (int i = 0; i < parts; ++i) conj.push_back("(" + sentence() + ")");
    for (std::size_t i = 0; i < conj.size(); ++i)
      src += (i ? " & " : "") + conj[i];
    src += "\n";
    if (pick(4) == 0) src += "constraint " + constraint() + "\n";
    return src;
  }

 private:
  int pick(int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng_); }

  std::string atom(bool allow_y) {
    std::vector<std::string> options;
    const char* names[] = {"A", "B"};
    for (int i = 0; i < unary_; ++i) {
      options.push_back(std::string(names[i]) + "(x)");
      if (allow_y) options.push_back(std::string(names[i]) + "(y)");
    }
    if (binary_) {
      options.push_back("R(x,x)");
      if (allow_y) {
        options.push_back("R(x,y)");
        options.push_back("R(y,x)");
        options.push_back("R(x,y)");
      }
    }
    if (allow_y) options.push_back(pick(2) ? "x = y" : "x != y");
    return options[pick(static_cast<int>(options.size()))];
  }

  std::string qf(int depth, bool allow_y) {
    if (depth == 0 || pick(3) == 0) {
      std::string a = atom(allow_y);
      return pick(4) == 0 ? "!" + a : a;
    }
    const char* ops[] = {" & ", " | ", " -> ", " <-> "};
    return "(" + qf(depth - 1, allow_y) + ops[pick(4)] +
           qf(depth - 1, allow_y) + ")";
  }

  std::string counting() {
    const char* ops[] = {"=", "<=", ">="};
    return std::string("exists{") + ops[pick(3)] + std::to_string(pick(3)) +
           "} y ";
  }

  std::string sentence() {
    bool has_y = binary_ || unary_ > 0;
    int shape = pick(7);
    if ((shape == 4 || shape == 5) && counting_left_-- <= 0) shape = 2;
    switch (shape) {
      case 0:
      case 1:
        return "forall x forall y " + qf(2, has_y);
      case 2:
        return "forall x exists y " + qf(2, true);
      case 3:
        return "forall x (" + qf(1, false) + " | exists y " + qf(1, true) + ")";
      case 4:
        return "forall x " + counting() + qf(1, true);
      case 5:
        return "forall x (" + qf(1, false) + " -> " + counting() +
               qf(1, true) + ")";
      default:
        return (pick(2) ? "exists x " : "exists{=1} x ") + qf(1, false);
    }
  }

  std::string constraint() {
    std::vector<std::string> preds;
    const char* names[] = {"A", "B"};
    for (int i = 0; i < unary_; ++i) preds.push_back(names[i]);
    if (binary_) preds.push_back("R");
    std::string p = preds[pick(static_cast<int>(preds.size()))];
    std::string q = preds[pick(static_cast<int>(preds.size()))];
    switch (pick(3)) {
      case 0:
        return "|" + p + "| = " + std::to_string(pick(3));
      case 1:
        return "|" + p + "| <= |" + q + "| + " + std::to_string(pick(2));
      default:
        return "2*|" + p + "| >= " + std::to_string(pick(4));
    }
  }

  std::mt19937_64 rng_;
  int unary_ = 0;
  bool binary_ = false;
  int counting_left_ = 0;
};

}  // namespace fo2test
