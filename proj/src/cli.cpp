#include "fo2/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "fo2/cells.hpp"
#include "fo2/corpus.hpp"
#include "fo2/engine.hpp"
#include "fo2/errors.hpp"
#include "fo2/oracle.hpp"
#include "fo2/weights.hpp"

namespace fo2::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Config {
  std::string input;
  std::string expr;
  bool infer = false;
  int n = 0;
  std::string n_range;
  std::string format = "text";
  std::vector<std::string> track;
  bool profiles = false;
  bool dump_normalized = false;
  bool dump_cells = false;
  std::string weight;
  std::string query;
  int threads = 0;
  int oracle_cap = 28;
  std::string strategy = "exclusion";
  std::string pair;        // cells: "i,j" for the n_ijv refinement
  std::string corpus_dir = "corpus";
  bool no_oracle = false;
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot read input file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Problem load(const Config& c) {
  ParseOptions po;
  po.strict = !c.infer && c.expr.empty();
  if (!c.expr.empty() && !c.input.empty())
    throw SemanticError("give either an input file or --expr, not both");
  if (c.expr.empty() && c.input.empty())
    throw SemanticError("no input: pass a problem file or --expr");
  Problem p = parse_problem(c.expr.empty() ? read_file(c.input) : c.expr, po);
  if (!c.weight.empty()) p.profile_weight = parse_num_expr(c.weight, p.signature);
  return p;
}

NormalizedProblem prepare(const Problem& p, const Config& c) {
  NormalizeOptions o;
  o.strategy = parse_strategy(c.strategy);
  return normalize(p, o);
}

std::vector<int> domain_sizes(const Config& c) {
  if (!c.n_range.empty()) {
    auto dots = c.n_range.find("..");
    if (dots == std::string::npos)
      throw SemanticError("--n-range expects A..B");
    int a = std::stoi(c.n_range.substr(0, dots));
    int b = std::stoi(c.n_range.substr(dots + 2));
    if (a < 1 || b < a) throw SemanticError("invalid --n-range " + c.n_range);
    std::vector<int> ns;
    for (int n = a; n <= b; ++n) ns.push_back(n);
    return ns;
  }
  if (c.n < 1) throw SemanticError("domain size -n must be at least 1");
  return {c.n};
}

long long ground_atoms(const Signature& sig, int n) {
  long long total = 0;
  for (const auto& p : sig.predicates())
    total += p.arity == 1 ? n : static_cast<long long>(n) * n;
  return total;
}

json fraction(const Rational& v) {
  return json{{"fraction", to_string(v)}, {"decimal", to_decimal(v, 12)}};
}

// Emits one result per domain size, as a single object or an array.
class Emitter {
 public:
  Emitter(const Config& c, std::ostream& out) : c_(c), out_(out) {}

  void add(json row, const std::string& text, const std::string& csv_header,
           const std::string& csv_row) {
    rows_.push_back(std::move(row));
    texts_.push_back(text);
    header_ = csv_header;
    csv_.push_back(csv_row);
  }

  void finish() {
    if (c_.format == "json") {
      if (rows_.size() == 1)
        out_ << rows_[0].dump(2) << "\n";
      else
        out_ << json(rows_).dump(2) << "\n";
    } else if (c_.format == "csv") {
      out_ << header_ << "\n";
      for (const auto& r : csv_) out_ << r << "\n";
    } else {
      for (const auto& t : texts_) out_ << t;
    }
  }

 private:
  const Config& c_;
  std::ostream& out_;
  std::vector<json> rows_;
  std::vector<std::string> texts_;
  std::string header_;
  std::vector<std::string> csv_;
};

void dumps(const NormalizedProblem& np, const Config& c, std::ostream& out,
           json* row) {
  if (c.dump_normalized) {
    std::string d = dump(np);
    if (row)
      (*row)["normalized"] = d;
    else
      out << d << "\n";
  }
  if (c.dump_cells) {
    std::string d = CellStructure(np.matrix, np.signature).csv();
    if (row)
      (*row)["cells"] = d;
    else
      out << d << "\n";
  }
}

json profiles_json(const std::vector<std::string>& names,
                   const std::vector<std::pair<std::vector<long long>,
                                               Rational>>& profiles) {
  json arr = json::array();
  for (const auto& [key, value] : profiles) {
    json card = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) card[names[i]] = key[i];
    arr.push_back(json{{"cardinalities", card}, {"count", to_string(value)}});
  }
  return arr;
}

std::string profiles_text(
    const std::vector<std::string>& names,
    const std::vector<std::pair<std::vector<long long>, Rational>>& profiles) {
  std::string s;
  for (const auto& [key, value] : profiles) {
    s += " ";
    for (std::size_t i = 0; i < names.size(); ++i)
      s += " |" + names[i] + "|=" + std::to_string(key[i]);
    s += " : " + to_string(value) + "\n";
  }
  return s;
}

// count and wfomc share everything but the mode label.
int cmd_count(const Config& c, std::ostream& out, bool weighted_mode) {
  Problem p = load(c);
  NormalizedProblem np = prepare(p, c);
  bool weighted = weighted_mode || !p.weights.empty() || p.profile_weight;
  std::string mode = weighted ? "wfomc" : "fomc";
  CardConstraint extra =
      c.query.empty() ? nullptr : parse_constraint(c.query, p.signature);
  if (c.format != "json") dumps(np, c, out, nullptr);
  Emitter em(c, out);
  for (int n : domain_sizes(c)) {
    auto t0 = Clock::now();
    CountRequest req;
    req.track = c.track;
    req.extra = extra;
    req.threads = c.threads;
    if (weighted) {
      req.weights = p.weights;
      req.profile_weight = p.profile_weight;
    }
    CountResult r = count(np, n, req);
    if (req.profile_weight) {
      // Report each profile's full contribution to the total.
      for (auto& [key, value] : r.profiles) {
        const auto& names = r.tracked;
        value *= evaluate(
            req.profile_weight,
            [&](const std::string& q) -> long long {
              for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == q) return key[i];
              throw SemanticError("untracked predicate " + q);
            },
            n);
      }
    }
    if (!weighted && !is_integer(r.total))
      throw ConsistencyError("non-integer model count " + to_string(r.total));
    if (r.total < 0 && !weighted)
      throw ConsistencyError("negative model count " + to_string(r.total));
    long long ms = static_cast<long long>(ms_since(t0));
    json row{{"n", n}, {"count", to_string(r.total)}, {"mode", mode}};
    bool show = c.profiles || !c.track.empty();
    if (show) row["profiles"] = profiles_json(r.tracked, r.profiles);
    row["runtime_ms"] = ms;
    if (c.format == "json") dumps(np, c, out, &row);
    std::string text = "n=" + std::to_string(n) + " " +
                       (weighted ? "wfomc=" : "count=") + to_string(r.total) +
                       "\n";
    if (show) text += profiles_text(r.tracked, r.profiles);
    em.add(row, text, "n,count", std::to_string(n) + "," + to_string(r.total));
  }
  em.finish();
  return 0;
}

int cmd_dist(const Config& c, std::ostream& out) {
  Problem p = load(c);
  NormalizedProblem np = prepare(p, c);
  WeightSpec ws{p.weights, p.profile_weight};
  if (c.query.empty() && c.track.empty())
    throw SemanticError("dist needs --query or --track");
  if (c.format != "json") dumps(np, c, out, nullptr);
  Emitter em(c, out);
  for (int n : domain_sizes(c)) {
    auto t0 = Clock::now();
    json row{{"n", n}};
    std::string text, csv;
    if (!c.query.empty()) {
      Probability pr = count_distribution(
          np, n, ws, parse_constraint(c.query, p.signature), c.threads);
      row["count"] = to_string(pr.numerator);
      row["mode"] = "dist";
      row["query"] = c.query;
      row["numerator"] = to_string(pr.numerator);
      row["Z"] = to_string(pr.partition);
      row["probability"] = fraction(pr.value);
      text = "n=" + std::to_string(n) + " P(" + c.query +
             ")=" + to_string(pr.value) + " ~ " + to_decimal(pr.value, 12) +
             " (numerator " + to_string(pr.numerator) + ", Z " +
             to_string(pr.partition) + ")\n";
      csv = std::to_string(n) + "," + to_string(pr.value);
    }
    if (!c.track.empty()) {
      Rational z;
      auto rows = distribution_table(np, n, ws, c.track, &z, c.threads);
      json table = json::array();
      if (c.query.empty()) {
        row["count"] = to_string(z);
        row["mode"] = "dist";
        row["Z"] = to_string(z);
      }
      for (const auto& r : rows) {
        json entry = json::object();
        std::string label;
        for (std::size_t i = 0; i < c.track.size(); ++i) {
          entry[c.track[i]] = r.counts[i];
          label += (i ? " |" : "|") + c.track[i] + "|=" +
                   std::to_string(r.counts[i]);
        }
        entry["probability"] = fraction(r.probability);
        table.push_back(entry);
        text += "n=" + std::to_string(n) + " " + label + " " +
                to_string(r.probability) + "\n";
        std::string line = std::to_string(n);
        for (long long k : r.counts) line += "," + std::to_string(k);
        csv += (csv.empty() ? "" : "\n") + line + "," + to_string(r.probability);
      }
      row["distribution"] = table;
    }
    row["runtime_ms"] = static_cast<long long>(ms_since(t0));
    if (c.format == "json") dumps(np, c, out, &row);
    std::string header = "n";
    if (!c.track.empty())
      for (const auto& t : c.track) header += "," + t;
    em.add(row, text, header + ",probability", csv);
  }
  em.finish();
  return 0;
}

int cmd_oracle(const Config& c, std::ostream& out) {
  Problem p = load(c);
  bool weighted = !p.weights.empty() || p.profile_weight;
  CardConstraint query =
      c.query.empty() ? nullptr : parse_constraint(c.query, p.signature);
  Emitter em(c, out);
  for (int n : domain_sizes(c)) {
    auto t0 = Clock::now();
    OracleOptions oo;
    oo.cap = c.oracle_cap;
    oo.threads = c.threads;
    OracleReport r = oracle_enumerate(p, n, oo);
    Rational total = weighted || query
                         ? oracle_weighted(r, p, p.weights, p.profile_weight)
                         : Rational(r.models);
    json row{{"n", n}};
    std::string text = "n=" + std::to_string(n);
    std::string csv = std::to_string(n);
    if (query) {
      if (total == 0)
        throw SemanticError("partition function Z is zero at n=" +
                            std::to_string(n));
      Rational num = oracle_weighted(r, p, p.weights, p.profile_weight, query);
      Rational prob = num / total;
      prob.canonicalize();
      row["count"] = to_string(num);
      row["mode"] = "dist";
      row["query"] = c.query;
      row["numerator"] = to_string(num);
      row["Z"] = to_string(total);
      row["probability"] = fraction(prob);
      text += " P(" + c.query + ")=" + to_string(prob);
      csv += "," + to_string(prob);
    } else {
      row["count"] = to_string(total);
      row["mode"] = weighted ? "wfomc" : "fomc";
      text += (weighted ? " wfomc=" : " count=") + to_string(total);
      csv += "," + to_string(total);
    }
    text += " (enumerated " + to_string(r.enumerated) + ")\n";
    bool show = c.profiles || !c.track.empty();
    if (show) {
      // Marginalize the full cardinality census onto the tracked predicates.
      std::vector<std::string> names =
          c.track.empty() ? r.predicates : c.track;
      std::vector<std::size_t> idx;
      for (const auto& t : names) {
        auto it = std::find(r.predicates.begin(), r.predicates.end(), t);
        if (it == r.predicates.end())
          throw SemanticError("cannot track unknown predicate " + t);
        idx.push_back(static_cast<std::size_t>(it - r.predicates.begin()));
      }
      std::map<std::vector<long long>, Rational> acc;
      for (const auto& [key, cnt] : r.by_cardinality) {
        std::vector<long long> k;
        for (auto i : idx) k.push_back(key[i]);
        acc[k] += Rational(cnt) *
                  oracle_model_weight(p, p.weights, p.profile_weight, key, n);
      }
      std::vector<std::pair<std::vector<long long>, Rational>> prof(acc.begin(),
                                                                    acc.end());
      row["profiles"] = profiles_json(names, prof);
      text += profiles_text(names, prof);
    }
    row["runtime_ms"] = static_cast<long long>(ms_since(t0));
    em.add(row, text, query ? "n,probability" : "n,count", csv);
  }
  em.finish();
  return 0;
}

int cmd_normalize(const Config& c, std::ostream& out) {
  Problem p = load(c);
  out << dump(prepare(p, c));
  return 0;
}

int cmd_cells(const Config& c, std::ostream& out) {
  Problem p = load(c);
  NormalizedProblem np = prepare(p, c);
  CellStructure cells(np.matrix, np.signature);
  if (c.pair.empty()) {
    out << cells.csv();
    return 0;
  }
  auto comma = c.pair.find(',');
  if (comma == std::string::npos) throw SemanticError("--pair expects I,J");
  int i = std::stoi(c.pair.substr(0, comma));
  int j = std::stoi(c.pair.substr(comma + 1));
  if (i < 0 || j < 0 || i >= cells.num_types() || j >= cells.num_types())
    throw SemanticError("--pair out of range");
  out << "i,j,v,n_ijv\n";
  for (int v = 0; v < cells.num_tables(); ++v)
    out << i << "," << j << "," << v << "," << (cells.nijv(i, j, v) ? 1 : 0)
        << "\n";
  return 0;
}

int cmd_bench(const Config& c, std::ostream& out) {
  Problem p = load(c);
  NormalizedProblem np = prepare(p, c);
  WeightSpec ws{p.weights, p.profile_weight};
  out << "n,lifted_ms,oracle_ms\n";
  for (int n : domain_sizes(c)) {
    auto t0 = Clock::now();
    Rational lifted = wfomc(np, n, ws, nullptr, c.threads);
    double lifted_ms = ms_since(t0);
    std::string oracle_ms = "skipped";
    if (ground_atoms(p.signature, n) <= c.oracle_cap) {
      OracleOptions oo;
      oo.cap = c.oracle_cap;
      oo.threads = c.threads;
      auto t1 = Clock::now();
      OracleReport r = oracle_enumerate(p, n, oo);
      Rational o = ws.symmetric.empty() && !ws.profile
                       ? Rational(r.models)
                       : oracle_weighted(r, p, p.weights, p.profile_weight);
      std::ostringstream ss;
      ss.setf(std::ios::fixed);
      ss.precision(3);
      ss << ms_since(t1);
      oracle_ms = ss.str();
      if (o != lifted)
        throw ConsistencyError("bench: engine " + to_string(lifted) +
                               " differs from oracle " + to_string(o) +
                               " at n=" + std::to_string(n));
    }
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(3);
    ss << n << "," << lifted_ms << "," << oracle_ms << "\n";
    out << ss.str() << std::flush;
  }
  return 0;
}

int cmd_verify(const Config& c, std::ostream& out) {
  CorpusOptions o;
  o.max_n = c.n > 0 ? c.n : 4;
  o.oracle_cap = c.oracle_cap;
  o.threads = c.threads;
  o.oracle = !c.no_oracle;
  CorpusReport r = verify_corpus(c.corpus_dir, o);
  int failed = 0;
  for (const auto& ch : r.checks) {
    if (ch.ok) {
      if (c.format == "text") out << "ok   " << ch.entry << ": " << ch.what << "\n";
    } else {
      ++failed;
      out << "FAIL " << ch.entry << ": " << ch.what << " (" << ch.detail
          << ")\n     reproduce: " << ch.repro << "\n";
    }
  }
  out << r.entries.size() << " entries, " << r.checks.size() << " checks, "
      << failed << " failed\n";
  return failed ? 3 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Config c;
  CLI::App app{"Exact lifted model counting for two-variable logic with "
               "counting quantifiers",
               "fo2count"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* s, bool with_n) {
    s->add_option("input", c.input, "problem file");
    s->add_option("-e,--expr", c.expr, "inline problem text");
    s->add_flag("--infer", c.infer, "infer undeclared predicate arities");
    s->add_option("--strategy", c.strategy,
                  "counting quantifier encoding: exclusion|maximize");
    s->add_option("--threads", c.threads, "worker threads (default: auto)");
    if (with_n) {
      s->add_option("-n,--domain-size", c.n, "domain size");
      s->add_option("--n-range", c.n_range, "domain sizes A..B");
      s->add_option("--format", c.format, "text|json|csv")
          ->check(CLI::IsMember({"text", "json", "csv"}));
    }
  };
  auto weighting = [&](CLI::App* s) {
    s->add_option("--weight", c.weight,
                  "profile weight expression over |P| and n");
    s->add_option("--query", c.query, "cardinality constraint");
    s->add_option("--track", c.track, "predicates to break down by")
        ->delimiter(',')
        ->allow_extra_args(false);
    s->add_flag("--profiles", c.profiles, "emit per-profile breakdown");
  };
  auto dumping = [&](CLI::App* s) {
    s->add_flag("--dump-normalized", c.dump_normalized,
                "print the normalized problem");
    s->add_flag("--dump-cells", c.dump_cells, "print the n_ij table as CSV");
  };

  auto* count_cmd = app.add_subcommand("count", "model count (FOMC)");
  common(count_cmd, true);
  weighting(count_cmd);
  dumping(count_cmd);
  auto* wfomc_cmd = app.add_subcommand("wfomc", "weighted model count");
  common(wfomc_cmd, true);
  weighting(wfomc_cmd);
  dumping(wfomc_cmd);
  auto* dist_cmd = app.add_subcommand("dist", "count distribution");
  common(dist_cmd, true);
  weighting(dist_cmd);
  dumping(dist_cmd);
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference");
  common(oracle_cmd, true);
  weighting(oracle_cmd);
  oracle_cmd->add_option("--oracle-cap", c.oracle_cap, "maximum ground atoms");
  auto* norm_cmd = app.add_subcommand("normalize", "print normalized problem");
  common(norm_cmd, false);
  auto* cells_cmd = app.add_subcommand("cells", "print the n_ij table");
  common(cells_cmd, false);
  cells_cmd->add_option("--pair", c.pair, "print n_ijv for I,J");
  auto* bench_cmd = app.add_subcommand("bench", "runtime scaling CSV");
  common(bench_cmd, true);
  bench_cmd->add_option("--weight", c.weight, "profile weight expression");
  bench_cmd->add_option("--oracle-cap", c.oracle_cap, "maximum ground atoms");
  auto* verify_cmd =
      app.add_subcommand("verify-corpus", "check corpus goldens");
  verify_cmd->add_option("dir", c.corpus_dir, "corpus directory");
  verify_cmd->add_option("-n,--max-n", c.n, "largest n to check (default 4)");
  verify_cmd->add_option("--oracle-cap", c.oracle_cap, "maximum ground atoms");
  verify_cmd->add_option("--threads", c.threads, "worker threads");
  verify_cmd->add_flag("--no-oracle", c.no_oracle, "skip oracle checks");
  verify_cmd->add_option("--format", c.format, "text prints passing checks")
      ->check(CLI::IsMember({"text", "quiet"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (c.threads <= 0) c.threads = default_threads();
  try {
    if (count_cmd->parsed()) return cmd_count(c, out, false);
    if (wfomc_cmd->parsed()) return cmd_count(c, out, true);
    if (dist_cmd->parsed()) return cmd_dist(c, out);
    if (oracle_cmd->parsed()) return cmd_oracle(c, out);
    if (norm_cmd->parsed()) return cmd_normalize(c, out);
    if (cells_cmd->parsed()) return cmd_cells(c, out);
    if (bench_cmd->parsed()) return cmd_bench(c, out);
    if (verify_cmd->parsed()) return cmd_verify(c, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const SemanticError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const ConsistencyError& e) {
    err << "consistency violation: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: bad numeric argument\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace fo2::cli
