#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "fo2/normalizer.hpp"
#include "fo2/problem.hpp"

#ifndef FO2_CORPUS_DIR
#define FO2_CORPUS_DIR "corpus"
#endif

namespace fo2test {

inline std::string corpus_path(const std::string& name) {
  return std::string(FO2_CORPUS_DIR) + "/" + name;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline fo2::Problem corpus_problem(const std::string& entry) {
  return fo2::parse_problem(read_text(corpus_path(entry + ".fo2")));
}

inline fo2::Problem problem(const std::string& text) {
  return fo2::parse_problem(text);
}

inline fo2::NormalizedProblem normalized(
    const fo2::Problem& p,
    fo2::CountingStrategy s = fo2::CountingStrategy::Exclusion) {
  return fo2::normalize(p, {s});
}

inline const char* kRunning =
    "predicate A/1\npredicate R/2\n"
    "forall x forall y (A(x) & R(x,y) & x != y -> A(y))\n";

}  // namespace fo2test
