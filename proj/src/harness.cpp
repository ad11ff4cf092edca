#include "mablab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mablab/lower_bounds.hpp"

namespace mablab {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(v))
    throw SchemaError("means line " + std::to_string(line) + ": not a number: '" + token + "'");
  return v;
}

ArmDistribution arm_from_json(const json& j, std::size_t idx) {
  const std::string where = "means entry " + std::to_string(idx) + ": ";
  if (!j.is_object()) throw SchemaError(where + "expected an object");
  const std::string kind = j.value("kind", std::string("gaussian"));
  try {
    if (kind == "gaussian") {
      if (j.contains("p")) throw SchemaError(where + "gaussian arms take 'mean', not 'p'");
      return ArmDistribution::gaussian(j.at("mean").get<double>(), j.value("variance", 1.0));
    }
    if (kind == "bernoulli") {
      const double p = j.contains("p") ? j.at("p").get<double>() : j.at("mean").get<double>();
      return ArmDistribution::bernoulli(p);
    }
  } catch (const json::exception& e) {
    throw SchemaError(where + e.what());
  }
  throw SchemaError(where + "unknown kind '" + kind + "'");
}

template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json record_to_json(const RunRecord& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["algo"] = r.algo;
  j["n"] = r.n;
  j["k"] = r.k;
  j["delta"] = r.delta;
  j["seed"] = r.seed;
  j["trial"] = r.trial;
  j["total_pulls"] = r.total_pulls;
  j["pulls"] = r.pulls;
  j["output"] = r.output;
  j["correct"] = r.correct;
  j["truncated"] = r.truncated;
  return j;
}

RunRecord record_from_json(const json& j) {
  static const std::vector<std::string> fields{"schema_version", "algo",  "n",      "k",       "delta",    "seed",
                                               "trial",          "total_pulls", "pulls", "output", "correct", "truncated"};
  if (!j.is_object()) throw SchemaError("expected an object");
  if (!j.contains("schema_version")) throw SchemaError("missing schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion)
    throw SchemaError("schema_version mismatch: expected " + std::to_string(kSchemaVersion) + ", got " +
                      j.at("schema_version").dump());
  for (const auto& f : fields)
    if (!j.contains(f)) throw SchemaError("missing field '" + f + "'");
  if (j.size() != fields.size()) throw SchemaError("unexpected extra fields");
  RunRecord r;
  r.algo = j.at("algo").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.k = j.at("k").get<std::size_t>();
  r.delta = j.at("delta").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trial = j.at("trial").get<std::uint64_t>();
  r.total_pulls = j.at("total_pulls").get<std::uint64_t>();
  r.pulls = j.at("pulls").get<std::vector<std::uint64_t>>();
  r.output = j.at("output").get<std::vector<std::size_t>>();
  r.correct = j.at("correct").get<bool>();
  r.truncated = j.at("truncated").get<bool>();
  return r;
}

}  // namespace

std::vector<ArmDistribution> parse_means(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    json arr;
    try {
      arr = json::parse(body);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("means file: ") + e.what());
    }
    std::vector<ArmDistribution> arms;
    for (std::size_t i = 0; i < arr.size(); ++i) arms.push_back(arm_from_json(arr[i], i));
    return arms;
  }
  std::vector<ArmDistribution> arms;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    arms.push_back(ArmDistribution::gaussian(parse_number(t, lineno)));
  }
  return arms;
}

std::vector<ArmDistribution> load_means_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open means file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_means(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Instance ExperimentConfig::instance() const {
  if (!means_file.empty()) return Instance(load_means_file(means_file), k);
  if (preset == "table1") {
    std::vector<double> mu(n, 0.25);
    std::fill_n(mu.begin(), std::min(k, n), 0.75);
    return Instance::gaussian(mu, k);
  }
  if (preset == "bestarm") {
    if (!(gap > 0.0)) throw std::invalid_argument("bestarm preset needs gap > 0");
    std::vector<double> mu(n, 1.0 - gap);
    mu[0] = 1.0;
    return Instance::gaussian(mu, 1);
  }
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

RunOptions ExperimentConfig::run_options() const {
  RunOptions o;
  o.delta = delta;
  o.sched = sched;
  o.max_pulls = max_pulls;
  return o;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms selected");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  sched.validate();
  instance();
}

std::vector<RunRecord> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  const Instance inst = cfg.instance();
  const RunOptions opts = cfg.run_options();
  const std::size_t per_algo = cfg.trials;
  std::vector<Runner> runners;
  for (auto id : cfg.algorithms) runners.push_back(make_runner(id, opts));

  std::vector<RunRecord> out(cfg.algorithms.size() * per_algo);
  parallel_for(out.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t ai = job / per_algo;
    const std::uint64_t trial = job % per_algo;
    const auto tag = static_cast<std::uint16_t>(cfg.algorithms[ai]);
    RunRecord rec;
    if (cfg.permute_each_trial) {
      const auto pi = Permutation::uniform(inst.n(), RngStream(cfg.master_seed, {StreamPurpose::Permutation, tag, trial, 0}));
      const Instance permuted = apply_permutation(inst, pi);
      const Transcript tr(permuted, cfg.master_seed, trial, tag);
      rec = runners[ai](permuted, tr);
      std::vector<std::uint64_t> pulls(inst.n());
      for (std::size_t a = 0; a < inst.n(); ++a) pulls[a] = rec.pulls[pi(a)];
      const auto inv = pi.inverse();
      std::vector<std::size_t> output;
      for (auto p : rec.output) output.push_back(inv(p));
      std::sort(output.begin(), output.end());
      rec.pulls = std::move(pulls);
      rec.output = std::move(output);
      rec.correct = rec.output == inst.top_set();
    } else {
      const Transcript tr(inst, cfg.master_seed, trial, tag);
      rec = runners[ai](inst, tr);
    }
    rec.seed = cfg.master_seed;
    rec.trial = trial;
    out[job] = std::move(rec);
  });
  return out;
}

const AlgoSummary& SummaryTable::row(std::string_view algo) const {
  for (const auto& r : rows)
    if (r.algo == algo) return r;
  throw std::out_of_range("no summary row for " + std::string(algo));
}

SummaryTable summarize(const std::vector<RunRecord>& records) {
  SummaryTable table;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    if (!groups.contains(r.algo)) order.push_back(r.algo);
    groups[r.algo].push_back(&r);
    table.n = r.n;
  }
  for (const auto& name : order) {
    const auto& g = groups[name];
    AlgoSummary s;
    s.algo = name;
    s.n = g.front()->n;
    s.trials = g.size();
    std::vector<double> t;
    double correct = 0.0;
    double truncated = 0.0;
    for (const auto* r : g) {
      t.push_back(static_cast<double>(r->total_pulls));
      correct += r->correct ? 1.0 : 0.0;
      truncated += r->truncated ? 1.0 : 0.0;
    }
    const double cnt = static_cast<double>(t.size());
    double sum = 0.0;
    for (double x : t) sum += x;
    s.mean_T = sum / cnt;
    double ss = 0.0;
    for (double x : t) ss += (x - s.mean_T) * (x - s.mean_T);
    s.std_error = t.size() > 1 ? std::sqrt(ss / (cnt - 1.0) / cnt) : 0.0;
    std::sort(t.begin(), t.end());
    const std::size_t mid = t.size() / 2;
    s.median_T = t.size() % 2 == 1 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
    s.correct_rate = correct / cnt;
    s.truncated_rate = truncated / cnt;
    table.rows.push_back(s);
  }
  double base = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : table.rows)
    if (r.algo == to_string(AlgorithmId::LucbPlusPlus)) base = r.mean_T;
  for (auto& r : table.rows) r.ratio = r.mean_T / base;
  return table;
}

std::vector<SummaryTable> table1_report(const std::vector<std::size_t>& sizes, std::size_t trials,
                                        std::uint64_t seed, const ExperimentConfig& base) {
  std::vector<SummaryTable> tables;
  for (std::size_t n : sizes) {
    ExperimentConfig cfg = base;
    cfg.preset = "table1";
    cfg.means_file.clear();
    cfg.n = n;
    cfg.k = 5;
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.algorithms = {AlgorithmId::LucbPlusPlus, AlgorithmId::Lucb, AlgorithmId::Oracle, AlgorithmId::Uniform};
    tables.push_back(summarize(run_trials(cfg)));
  }
  return tables;
}

void write_csv(std::ostream& out, const std::vector<SummaryTable>& tables) {
  out << "algo,n,mean_T,stderr,ratio,correct_rate,truncated_rate\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      out << r.algo << ',' << r.n << ',' << format_number(r.mean_T) << ',' << format_number(r.std_error) << ','
          << format_number(r.ratio) << ',' << format_number(r.correct_rate) << ',' << format_number(r.truncated_rate)
          << '\n';
    }
  }
}

BoundComparisonReport bound_comparison_report(const ExperimentConfig& cfg, double delta) {
  if (!cfg.permute_each_trial) throw std::invalid_argument("bound comparison needs permute_each_trial");
  const Instance inst = cfg.instance();
  BoundComparisonReport rep;
  rep.n = inst.n();
  rep.k = inst.k();
  rep.delta = delta;

  struct Bound {
    std::string name;
    double value;
    double required_ratio;
    std::optional<std::size_t> arm;  // nullopt: compare against mean T
  };
  std::vector<Bound> bounds;
  auto attempt = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      rep.skipped.push_back(name + ": " + e.what());
    }
  };
  attempt("permutation_total", [&] {
    bounds.push_back({"permutation_total", permutation_total_bound(inst, delta).value, 1.0, std::nullopt});
  });
  attempt("combined", [&] { bounds.push_back({"combined", combined_bound(inst, delta), 0.1, std::nullopt}); });
  attempt("gaussian_mab_top", [&] {
    const double v = gaussian_mab_per_arm_bound(inst, delta).value;
    bounds.push_back({"gaussian_mab_top", v, 0.1, inst.best_arm()});
  });
  attempt("topk_per_arm", [&] {
    const auto r = topk_per_arm_bounds(inst, delta);
    for (const auto& [a, v] : r.per_arm) bounds.push_back({"topk_arm_" + std::to_string(a), v, 0.1, a});
  });

  const auto records = run_trials(cfg);
  for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
    AlgoBoundComparison c;
    c.algo = std::string(to_string(cfg.algorithms[ai]));
    c.mean_pulls.assign(inst.n(), 0.0);
    std::vector<RunRecord> mine(records.begin() + static_cast<std::ptrdiff_t>(ai * cfg.trials),
                                records.begin() + static_cast<std::ptrdiff_t>((ai + 1) * cfg.trials));
    const auto summary = summarize(mine);
    c.mean_T = summary.rows.front().mean_T;
    c.std_error = summary.rows.front().std_error;
    for (const auto& r : mine)
      for (std::size_t a = 0; a < inst.n(); ++a) c.mean_pulls[a] += static_cast<double>(r.pulls[a]);
    for (auto& p : c.mean_pulls) p /= static_cast<double>(cfg.trials);
    for (const auto& b : bounds) {
      BoundCheck chk{b.name, b.arm ? c.mean_pulls[*b.arm] : c.mean_T, b.value, b.required_ratio, false};
      chk.below = chk.empirical < b.required_ratio * b.value;
      rep.any_below = rep.any_below || chk.below;
      c.checks.push_back(chk);
    }
    rep.algos.push_back(std::move(c));
  }
  return rep;
}

void write_records(std::ostream& out, const std::vector<RunRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void persist(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_records(out, records);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RunRecord> load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_records(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace mablab
