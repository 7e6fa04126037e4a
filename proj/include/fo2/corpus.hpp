#pragma once

#include <string>
#include <vector>

namespace fo2 {

// A corpus entry is a problem file `name.fo2` with a golden `name.json`
// next to it:
//
//   {
//     "tags": ["universal", "equality"],
//     "oracle_eligible": true,
//     "strategy": "exclusion",                       (optional)
//     "counts": [{"n": 2, "value": "48", "provenance": "..."}],
//     "queries": [{"n": 4, "query": "|H| = 2", "probability": "3/4"}],
//     "distributions": [{"n": 4, "track": ["H"],
//                        "probabilities": ["1/8", "0", ...]}],
//     "cells": {"n_ij": [4, 4, ...]}                  (i <= j, row-major)
//   }
//
// "value" is the weighted count when the file carries weights.

struct CorpusCheck {
  std::string entry;
  std::string what;    // e.g. "count n=3", "oracle n=2"
  bool ok = false;
  std::string detail;  // expected/actual on failure
  std::string repro;   // command line reproducing the check
};

struct CorpusOptions {
  int max_n = 4;        // skip golden values above this n (0: no limit)
  int oracle_cap = 28;  // ground atoms
  int threads = 0;
  bool oracle = true;
};

struct CorpusReport {
  std::vector<std::string> entries;
  std::vector<std::string> tags;  // per entry, comma separated
  std::vector<CorpusCheck> checks;
  bool ok() const;
};

// Entries are processed in file-name order; a malformed golden produces a
// failed check rather than an exception.
CorpusReport verify_corpus(const std::string& directory,
                           const CorpusOptions& options = {});

}  // namespace fo2
