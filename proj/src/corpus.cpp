#include "fo2/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fo2/cells.hpp"
#include "fo2/errors.hpp"
#include "fo2/oracle.hpp"
#include "fo2/weights.hpp"

namespace fo2 {

namespace fs = std::filesystem;
using nlohmann::json;

bool CorpusReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CorpusCheck& c) { return c.ok; });
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw SemanticError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long long ground_atoms(const Signature& sig, int n) {
  long long total = 0;
  for (const auto& p : sig.predicates())
    total += p.arity == 1 ? n : static_cast<long long>(n) * n;
  return total;
}

struct Entry {
  std::string name;
  fs::path file;
  json golden;
  const CorpusOptions& opts;
  CorpusReport& report;

  void add(std::string what, bool ok, std::string detail, std::string repro) {
    report.checks.push_back(
        {name, std::move(what), ok, std::move(detail), std::move(repro)});
  }

  std::string cmd(const std::string& sub, int n,
                  const std::string& extra = "") const {
    std::string s = "fo2count " + sub + " -n " + std::to_string(n);
    if (golden.contains("strategy"))
      s += " --strategy " + golden["strategy"].get<std::string>();
    return s + extra + " " + file.string();
  }

  bool skip(int n) const { return opts.max_n > 0 && n > opts.max_n; }

  bool oracle_ok(const Problem& p, int n) const {
    return opts.oracle && golden.value("oracle_eligible", false) &&
           ground_atoms(p.signature, n) <= opts.oracle_cap;
  }

  void run() {
    Problem p = parse_problem(slurp(file));
    NormalizeOptions no;
    if (golden.contains("strategy"))
      no.strategy = parse_strategy(golden["strategy"].get<std::string>());
    NormalizedProblem np = normalize(p, no);
    WeightSpec ws{p.weights, p.profile_weight};
    bool weighted = !p.weights.empty() || p.profile_weight;
    const int threads = opts.threads;

    auto oracle_value = [&](int n, const CardConstraint& extra) {
      OracleOptions oo;
      oo.cap = opts.oracle_cap;
      oo.threads = threads;
      OracleReport r = oracle_enumerate(p, n, oo);
      if (!weighted && !extra) return Rational(r.models);
      return oracle_weighted(r, p, p.weights, p.profile_weight, extra);
    };

    for (const auto& c : golden.value("counts", json::array())) {
      int n = c.at("n").get<int>();
      if (skip(n)) continue;
      Rational expected = parse_rational(c.at("value").get<std::string>());
      std::string sub = weighted ? "wfomc" : "count";
      Rational got = wfomc(np, n, ws, nullptr, threads);
      add(sub + " n=" + std::to_string(n), got == expected,
          "expected " + to_string(expected) + ", engine " + to_string(got),
          cmd(sub, n));
      if (oracle_ok(p, n)) {
        Rational o = oracle_value(n, nullptr);
        add("oracle n=" + std::to_string(n), o == expected,
            "expected " + to_string(expected) + ", oracle " + to_string(o),
            cmd("oracle", n));
      }
    }

    for (const auto& q : golden.value("queries", json::array())) {
      int n = q.at("n").get<int>();
      if (skip(n)) continue;
      std::string text = q.at("query").get<std::string>();
      CardConstraint query = parse_constraint(text, p.signature);
      Rational expected = parse_rational(q.at("probability").get<std::string>());
      Probability got = count_distribution(np, n, ws, query, threads);
      std::string extra = " --query \"" + text + "\"";
      add("query " + text + " n=" + std::to_string(n), got.value == expected,
          "expected " + to_string(expected) + ", engine " +
              to_string(got.value),
          cmd("dist", n, extra));
      if (oracle_ok(p, n)) {
        Rational z = oracle_value(n, nullptr);
        Rational o = z == 0 ? Rational(-1) : oracle_value(n, query) / z;
        add("oracle query " + text + " n=" + std::to_string(n),
            o == expected,
            "expected " + to_string(expected) + ", oracle " + to_string(o),
            cmd("oracle", n, extra));
      }
    }

    for (const auto& d : golden.value("distributions", json::array())) {
      int n = d.at("n").get<int>();
      if (skip(n)) continue;
      auto track = d.at("track").get<std::vector<std::string>>();
      auto expected = d.at("probabilities").get<std::vector<std::string>>();
      std::vector<std::string> got;
      for (const auto& row : distribution_table(np, n, ws, track, nullptr,
                                                threads))
        got.push_back(to_string(row.probability));
      std::string joined;
      for (const auto& s : got) joined += (joined.empty() ? "" : " ") + s;
      std::string tracked;
      for (const auto& t : track) tracked += (tracked.empty() ? "" : ",") + t;
      add("distribution n=" + std::to_string(n), got == expected,
          "engine " + joined, cmd("dist", n, " --track " + tracked));
    }

    if (golden.contains("cells")) {
      auto expected = golden["cells"].at("n_ij").get<std::vector<int>>();
      CellStructure cells(np.matrix, np.signature);
      std::vector<int> got;
      for (int i = 0; i < cells.num_types(); ++i)
        for (int j = i; j < cells.num_types(); ++j)
          got.push_back(cells.nij(i, j));
      std::string joined;
      for (int v : got) joined += (joined.empty() ? "" : " ") + std::to_string(v);
      add("cells", got == expected, "engine " + joined,
          "fo2count cells " + file.string());
    }
  }
};

}  // namespace

CorpusReport verify_corpus(const std::string& directory,
                           const CorpusOptions& options) {
  CorpusReport report;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(directory))
    if (e.path().extension() == ".fo2") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string name = f.stem().string();
    fs::path golden_path = f;
    golden_path.replace_extension(".json");
    Entry entry{name, f, json::object(), options, report};
    report.entries.push_back(name);
    try {
      entry.golden = json::parse(slurp(golden_path));
      std::string tags;
      for (const auto& t : entry.golden.value("tags", json::array()))
        tags += (tags.empty() ? "" : ",") + t.get<std::string>();
      report.tags.push_back(tags);
      entry.run();
    } catch (const std::exception& e) {
      if (report.tags.size() < report.entries.size()) report.tags.push_back("");
      report.checks.push_back({name, "load", false, e.what(),
                               "fo2count count -n 1 " + f.string()});
    }
  }
  return report;
}

}  // namespace fo2
