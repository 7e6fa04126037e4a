// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fo2/engine.hpp"
#include "fo2/errors.hpp"
#include "fo2/oracle.hpp"
#include "fo2/weights.hpp"
#include "random_problems.hpp"
#include "support.hpp"

using namespace fo2;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the first few failures of a criterion.
struct Failures {
  int count = 0;
  std::ostringstream first;
  void add(const std::string& what) {
    if (count++ < 3) first << (count > 1 ? "; " : "") << what;
  }
  Outcome outcome(const std::string& summary) const {
    if (count == 0) return {true, summary};
    return {false, std::to_string(count) + " failure(s): " + first.str()};
  }
};

Integer as_integer(const Rational& v, const std::string& what) {
  if (!is_integer(v)) throw ConsistencyError(what + " is not an integer");
  return v.get_num();
}

Outcome nij_table() {
  auto t0 = Clock::now();
  NormalizedProblem np = normalize(parse_problem(fo2test::kRunning));
  CellStructure cells(np.matrix, np.signature);
  std::vector<int> table, row;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) table.push_back(cells.nij(i, j));
  for (int v = 0; v < 4; ++v) row.push_back(cells.nijv(1, 3, v));
  double s = seconds_since(t0);
  Failures f;
  if (table != std::vector<int>{4, 4, 2, 2, 4, 2, 2, 4, 4, 4})
    f.add("n_ij table differs");
  if (row != std::vector<int>{1, 0, 1, 0}) f.add("n_13v row differs");
  if (s >= 1.0) f.add("took " + std::to_string(s) + " s");
  return f.outcome("(4,4,2,2,4,2,2,4,4,4) and n_13v = (1,0,1,0) in " +
                   std::to_string(s) + " s");
}

Outcome term48() {
  NormalizedProblem np = normalize(parse_problem(fo2test::kRunning));
  CellStructure cells(np.matrix, np.signature);
  Integer t = universal_term(cells, {2, 0, 0, 1});
  return {t == 48, "k=(2,0,0,1), n=3: term = " + to_string(t)};
}

Outcome coins() {
  auto t0 = Clock::now();
  Problem p = parse_problem("predicate H/1\nforall x (H(x) | !H(x))\n");
  NormalizedProblem np = normalize(p);
  WeightSpec w;
  w.profile = parse_num_expr("1 + (-1)^|H|", p.signature);
  auto rows = distribution_table(np, 4, w, {"H"});
  double s = seconds_since(t0);
  std::vector<Rational> expect = {Rational(1, 8), 0, Rational(3, 4), 0,
                                  Rational(1, 8)};
  std::string got;
  bool ok = rows.size() == expect.size();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    got += (k ? ", " : "") + to_string(rows[k].probability);
    if (ok && rows[k].probability != expect[k]) ok = false;
  }
  if (s >= 1.0) ok = false;
  return {ok, "(" + got + ") in " + std::to_string(s) + " s"};
}

Outcome oracle_differential() {
  namespace fs = std::filesystem;
  auto t0 = Clock::now();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(FO2_CORPUS_DIR))
    if (e.path().extension() == ".fo2") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Failures f;
  int entries = 0, comparisons = 0;
  std::set<std::string> tags;
  for (const auto& path : files) {
    fs::path golden = path;
    golden.replace_extension(".json");
    auto meta = nlohmann::json::parse(fo2test::read_text(golden.string()));
    if (!meta.value("oracle_eligible", false)) continue;
    ++entries;
    for (const auto& t : meta["tags"]) tags.insert(t.get<std::string>());
    std::string name = path.stem().string();
    try {
      Problem p = parse_problem(fo2test::read_text(path.string()));
      CountingStrategy s = parse_strategy(meta.value("strategy", "exclusion"));
      NormalizedProblem np = normalize(p, {s});
      for (int n = 1; n <= 4; ++n) {
        if (p.signature.ground_atom_count(n) > 28) break;
        OracleReport r = oracle_enumerate(p, n);
        Rational expect =
            oracle_weighted(r, p, p.weights, p.profile_weight, nullptr);
        Rational got = wfomc(np, n, {p.weights, p.profile_weight});
        ++comparisons;
        if (got != expect)
          f.add(name + " n=" + std::to_string(n) + ": engine " +
                to_string(got) + " vs oracle " + to_string(expect));
      }
    } catch (const std::exception& e) {
      f.add(name + ": " + e.what());
    }
  }
  for (const char* t :
       {"universal", "equality", "existential", "cardinality", "counting"})
    if (!tags.count(t)) f.add(std::string("no entry tagged ") + t);
  double s = seconds_since(t0);
  if (s >= 600) f.add("took " + std::to_string(s) + " s");
  return f.outcome(std::to_string(entries) + " entries, " +
                   std::to_string(comparisons) + " exact matches in " +
                   std::to_string(s) + " s");
}

Outcome closed_forms() {
  struct Form {
    const char* text;
    std::function<Integer(int)> value;
  };
  std::vector<Form> forms = {
      {"predicate R/2\nforall x exists y R(x,y)\n",
       [](int n) { return ipow(ipow(2, n) - 1, n); }},
      {"predicate R/2\nforall x exists{=1} y R(x,y)\n",
       [](int n) { return ipow(n, n); }},
      {"predicate R/2\nforall x forall y (R(x,y) -> R(y,x))\n",
       [](int n) { return ipow(2, n + n * (n - 1) / 2); }},
  };
  Failures f;
  int checks = 0;
  for (const auto& form : forms) {
    Problem p = parse_problem(form.text);
    NormalizedProblem np = normalize(p);
    for (int n = 1; n <= 8; ++n) {
      ++checks;
      Integer got = fomc(np, n);
      if (got != form.value(n))
        f.add(std::string(form.text).substr(14) + " n=" + std::to_string(n));
      if (n <= 4 && oracle_count(p, n) != form.value(n))
        f.add("oracle disagrees with the closed form, n=" + std::to_string(n));
    }
  }
  return f.outcome(std::to_string(checks) + " values, n <= 8");
}

Outcome stratified() {
  Problem p = parse_problem(fo2test::kRunning);
  NormalizedProblem np = normalize(p);
  CellStructure cells(np.matrix, np.signature);
  OracleOptions o;
  o.census_slots = cells.unary_slots();
  Failures f;
  int strata = 0;
  for (int n = 1; n <= 3; ++n) {
    OracleReport r = oracle_enumerate(p, n, o);
    auto terms = universal_terms(cells, n);
    std::map<std::vector<int>, Integer> engine(terms.begin(), terms.end());
    std::set<std::vector<int>> keys;
    for (const auto& [k, v] : engine) keys.insert(k);
    for (const auto& [k, v] : r.by_census) keys.insert(k);
    for (const auto& k : keys) {
      ++strata;
      if (engine[k] != r.by_census[k]) f.add("n=" + std::to_string(n));
    }
  }
  return f.outcome(std::to_string(strata) + " strata, n <= 3");
}

Outcome lemma_em() {
  Failures f;
  int checks = 0;
  for (const char* entry : {"forall_exists", "guarded_exists", "exists_other"}) {
    Problem p = fo2test::corpus_problem(entry);
    NormalizedProblem np = normalize(p);
    if (np.sign_predicates.size() != 1) {
      f.add(std::string(entry) + " does not have exactly one existential");
      continue;
    }
    for (int n = 1; n <= 4; ++n) {
      Integer sum(0);
      for (int m = 1; m <= n; ++m) {
        Integer e = lemma_em_diagnostic(np, n, m).e;
        if (sgn(e) < 0)
          f.add(std::string(entry) + " e_" + std::to_string(m) + " < 0");
        sum += e;
      }
      Integer p0 = lemma_em_diagnostic(np, n, 0).p;
      // The right-hand side uses the oracle for the Scott-form count.
      Integer scott = oracle_count(p, n);
      ++checks;
      if (sum != p0 - scott || fomc_scott(np, n) != scott)
        f.add(std::string(entry) + " n=" + std::to_string(n));
    }
  }
  return f.outcome(std::to_string(checks) + " identities, n <= 4");
}

// Mean seconds per call, repeated until at least 50 ms have elapsed.
double time_call(const std::function<void()>& call) {
  int reps = 0;
  auto t0 = Clock::now();
  do {
    call();
    ++reps;
  } while (seconds_since(t0) < 0.05);
  return seconds_since(t0) / reps;
}

Outcome scaling() {
  struct Case {
    const char* entry;
    std::function<Integer(const NormalizedProblem&, int)> reference;
  };
  std::vector<Case> cases = {
      {"running_example",
       [](const NormalizedProblem& np, int n) {
         return fomc_universal(CellStructure(np.matrix, np.signature), n);
       }},
      {"exactly_two",
       [](const NormalizedProblem&, int n) { return ipow(binomial(n, 2), n); }},
      {"none_or_two",
       [](const NormalizedProblem&, int n) {
         return ipow(1 + binomial(n, 2), n);
       }},
  };
  Failures f;
  std::ostringstream summary;
  for (const auto& c : cases) {
    Problem p = fo2test::corpus_problem(c.entry);
    NormalizedProblem np = normalize(p);
    auto t0 = Clock::now();
    Integer at50 = fomc(np, 50);
    double s50 = seconds_since(t0);
    if (s50 >= 60) f.add(std::string(c.entry) + " n=50 took too long");
    if (at50 != c.reference(np, 50))
      f.add(std::string(c.entry) + " n=50 value");
    // The oracle refuses the first domain size beyond its cap.
    int beyond = 1;
    while (p.signature.ground_atom_count(beyond) <= 28) ++beyond;
    bool refused = false;
    try {
      oracle_count(p, beyond);
    } catch (const Error&) {
      refused = true;
    }
    if (!refused)
      f.add(std::string(c.entry) + ": oracle accepted n=" +
            std::to_string(beyond));
    // Least-squares slope of log(time) against log(n).
    std::vector<double> xs, ys;
    for (int n = 10; n <= 50; n += 5) {
      double t = time_call([&] { fomc(np, n); });
      xs.push_back(std::log(n));
      ys.push_back(std::log(t));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / xs.size();
      my += ys[i] / ys.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = sxy / sxx;
    if (!(slope < 8)) f.add(std::string(c.entry) + " exponent " +
                            std::to_string(slope));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s n=50 %.3f s, exponent %.2f",
                  summary.tellp() > 0 ? "; " : "", c.entry, s50, slope);
    summary << buf;
  }
  return f.outcome(summary.str());
}

Outcome integrality() {
  fo2test::RandomProblems gen(2024);
  Failures f;
  int problems = 0, counts = 0;
  for (int i = 0; i < 200; ++i) {
    std::string text = gen.next();
    ++problems;
    try {
      Problem p = parse_problem(text);
      NormalizedProblem np = normalize(p);
      for (int n = 1; n <= 3; ++n) {
        Integer c = as_integer(count(np, n).total, "count");
        ++counts;
        if (sgn(c) < 0) f.add("negative count for problem " + std::to_string(i));
        if (c != oracle_count(p, n))
          f.add("oracle mismatch for problem " + std::to_string(i));
      }
    } catch (const std::exception& e) {
      f.add("problem " + std::to_string(i) + ": " + e.what());
    }
  }
  return f.outcome(std::to_string(problems) + " problems, " +
                   std::to_string(counts) +
                   " counts, all non-negative integers equal to the oracle");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "n_ij table of the running example", nij_table},
      {2, "single term k=(2,0,0,1) equals 48", term48},
      {3, "coins distribution", coins},
      {4, "oracle differential over the corpus", oracle_differential},
      {5, "closed forms up to n=8", closed_forms},
      {6, "stratified identity", stratified},
      {7, "Lemma E-m consistency", lemma_em},
      {8, "polynomial scaling to n=50", scaling},
      {9, "integrality on 200 random problems", integrality},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::cout << (o.ok ? "PASS" : "FAIL") << " " << c.id << " " << c.name
              << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
