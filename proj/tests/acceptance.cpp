// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mablab/cli.hpp"
#include "mablab/confidence.hpp"
#include "mablab/harness.hpp"
#include "mablab/lower_bounds.hpp"
#include "mablab/simulator_lab.hpp"

using namespace mablab;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Instance best_arm(std::size_t n, double gap) {
  std::vector<double> mu(n, 1.0 - gap);
  mu[0] = 1.0;
  return Instance::gaussian(mu, 1);
}

Outcome ac1_correctness() {
  const double limit = 0.1 + 3 * std::sqrt(0.1 * 0.9 / 500);
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  auto check = [&](ExperimentConfig cfg, const char* label) {
    cfg.trials = 500;
    cfg.delta = 0.1;
    cfg.master_seed = 101;
    for (const auto& row : summarize(run_trials(cfg)).rows) {
      const double err = 1 - row.correct_rate;
      pass = pass && err <= limit;
      detail += fmt("%s/%s err=%.3f ", label, row.algo.c_str(), err);
      if (row.truncated_rate > 0) detail += fmt("(truncated %.3f) ", row.truncated_rate);
    }
  };
  ExperimentConfig a;
  a.n = 20;
  a.k = 5;
  // staged needs k = 1 and runs only on the best-arm instance
  a.algorithms = {AlgorithmId::LucbPlusPlus, AlgorithmId::Lucb, AlgorithmId::Oracle, AlgorithmId::Uniform};
  check(a, "table1");
  ExperimentConfig b;
  b.preset = "bestarm";
  b.n = 10;
  b.gap = 0.5;
  b.algorithms = {AlgorithmId::LucbPlusPlus, AlgorithmId::Lucb, AlgorithmId::Oracle, AlgorithmId::Uniform,
                  AlgorithmId::Staged};
  check(b, "bestarm");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && secs < 300;
  return {pass, detail + fmt("limit=%.3f", limit)};
}

Outcome ac2_table1() {
  struct Target {
    std::size_t n;
    double lucb, oracle, uniform;
    bool absolute;  // +-0.25 absolute, else +-30% relative
  };
  const std::vector<Target> targets{
      {10, 0.99, 1.60, 1.67, true}, {100, 1.17, 2.00, 3.4, false}, {1000, 1.50, 2.51, 5.32, false}};
  std::vector<std::size_t> sizes;
  for (const auto& t : targets) sizes.push_back(t.n);
  const auto tables = table1_report(sizes, 50, 7);

  bool pass = true;
  std::string detail;
  auto within = [](double got, double want, bool absolute) {
    return absolute ? std::abs(got - want) <= 0.25 : std::abs(got - want) <= 0.3 * want;
  };
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const auto& tab = tables[i];
    const double l = tab.row("lucb").ratio, o = tab.row("oracle").ratio, u = tab.row("uniform").ratio;
    pass = pass && within(l, t.lucb, t.absolute) && within(o, t.oracle, t.absolute) && within(u, t.uniform, t.absolute);
    detail += fmt("n=%zu lucb=%.3f oracle=%.3f uniform=%.3f; ", t.n, l, o, u);
    if (i > 0)
      for (const char* a : {"lucb", "oracle", "uniform"}) pass = pass && tab.row(a).ratio > tables[i - 1].row(a).ratio;
  }
  return {pass, detail};
}

Outcome ac3_permutation_bound() {
  ExperimentConfig cfg;
  cfg.preset = "bestarm";
  cfg.n = 10;
  cfg.gap = 0.5;
  cfg.delta = 0.05;
  cfg.trials = 500;
  cfg.master_seed = 303;
  cfg.permute_each_trial = true;
  const auto rep = bound_comparison_report(cfg, 0.05);
  const auto& a = rep.algos.front();
  const double perm = permutation_total_bound(cfg.instance(), 0.05).value;
  const double comb = combined_bound(cfg.instance(), 0.05);
  const bool pass = a.mean_T >= perm && a.mean_T >= 0.1 * comb;
  return {pass, fmt("mean_T=%.1f (se %.1f) permutation_total=%.4f combined=%.1f", a.mean_T, a.std_error, perm, comb)};
}

Outcome ac4_fano() {
  const auto start = std::chrono::steady_clock::now();
  const auto inst = best_arm(64, 0.5);
  RunOptions o;
  o.delta = 0.125;
  const auto runner = make_runner(AlgorithmId::LucbPlusPlus, o);
  bool pass = true;
  std::string detail;
  for (std::size_t m : {2, 4}) {
    const auto r = fano_event_check(inst, m, 1.0 / 16, 0.125, runner, 400, 404);
    pass = pass && r.rate >= 0.75 - 3 * r.std_error;
    detail += fmt("m=%zu rate=%.4f se=%.4f threshold=%.3f; ", m, r.rate, r.std_error, r.threshold);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {pass && secs < 600, detail};
}

Outcome ac5_tilting() {
  const auto start = std::chrono::steady_clock::now();
  int ok = 0, total = 0;
  std::string failures;
  std::uint64_t trial = 0;
  for (double gap : {0.25, 0.5, 1.0})
    for (double kappa : {0.05, 0.1, 0.25})
      for (std::uint64_t tau : {1, 8, 32}) {
        const RngStream stream(505, {StreamPurpose::Tilting, 0, trial++, 0});
        const auto r = verify_balance(0.0, -gap, tau, kappa, 1000000, stream);
        ++total;
        if (r.passed())
          ++ok;
        else
          failures += fmt(" [gap=%g kappa=%g tau=%llu]", gap, kappa, static_cast<unsigned long long>(tau));
      }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok == total && secs < 300, fmt("%d/%d grid points pass", ok, total) + failures};
}

Outcome ac6_lecam() {
  RunOptions o;
  o.delta = 0.05;
  const auto r = lecam_check(best_arm(5, 0.5), 1, 0.125, 0.05, make_runner(AlgorithmId::LucbPlusPlus, o), 1000, 606);
  return {r.holds(), fmt("lhs=%.4f (nu %.4f, swap %.4f) rhs=%.4f se=%.4f tau=%.3f", r.lhs, r.rate_nu, r.rate_swap,
                         r.rhs, r.std_error, r.tau)};
}

Outcome ac7_coverage() {
  const ConfidenceSchedule sched;
  const std::vector<double> deltas{0.01, 0.05, 0.1};
  std::vector<RadiusTable> tables;
  for (double d : deltas) tables.emplace_back(sched, d);
  const int traj = 10000, len = 10000;
  std::vector<int> crossed(deltas.size(), 0);
  for (int i = 0; i < traj; ++i) {
    const RngStream rng(707, {StreamPurpose::Test, 7, static_cast<std::uint64_t>(i), 0});
    std::vector<bool> hit(deltas.size(), false);
    double sum = 0;
    for (int t = 1; t <= len; ++t) {
      sum += rng.normal(static_cast<std::uint64_t>(t));
      const double mean = sum / t;
      for (std::size_t d = 0; d < deltas.size(); ++d)
        if (!hit[d] && mean >= tables[d](static_cast<std::uint64_t>(t))) hit[d] = true;
    }
    for (std::size_t d = 0; d < deltas.size(); ++d) crossed[d] += hit[d] ? 1 : 0;
  }
  bool pass = true;
  std::string detail;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const double rate = static_cast<double>(crossed[d]) / traj;
    pass = pass && rate <= deltas[d];
    detail += fmt("delta=%g rate=%.4f; ", deltas[d], rate);
  }
  return {pass, detail};
}

Outcome ac8_staged() {
  const auto inst = best_arm(10, 0.5);
  const auto cfg = StagedConfig::from_instance(inst);
  const double gap2 = cfg.mu1 - cfg.mu2;
  const double target = cfg.c1 / (gap2 * gap2);
  std::vector<double> xs, ys;
  for (int e = 1; e <= 4; ++e) {
    RunOptions o;
    o.delta = std::pow(10.0, -e);
    double sum = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i)
      sum += static_cast<double>(
          run_staged_known_means(inst, Transcript(inst, 808, static_cast<std::uint64_t>(i)),
                                 cfg, o)
              .total_pulls);
    xs.push_back(std::log(1 / o.delta));
    ys.push_back(sum / trials);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / 4, my += ys[i] / 4;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sum_inv = 0;
  for (double g : gap_profile(inst, GapKind::BestArm).gaps) sum_inv += 1 / (g * g);
  const bool pass = slope > 0 && slope >= target / 4 && slope <= target * 4 && intercept > slope * std::log(10.0) &&
                    sum_inv > 5 / (gap2 * gap2);
  return {pass, fmt("meanT=[%.0f %.0f %.0f %.0f] slope=%.2f (c1/gap^2=%.0f) intercept=%.0f vs slope*log10=%.0f",
                    ys[0], ys[1], ys[2], ys[3], slope, target, intercept, slope * std::log(10.0))};
}

Outcome ac9_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "mablab_accept";
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const auto means = dir / "means.txt";
  std::ofstream(means) << "1.0\n0.5\n0.5\n0.5\n0.5\n0.5\n0.5\n0.5\n0.5\n0.5\n";
  const std::vector<std::vector<std::string>> commands{
      {"run", "--algo", "lucbpp,lucb,oracle,uniform", "--n", "20", "--trials", "30", "--seed", "1", "--out",
       (dir / "run.jsonl").string()},
      {"run", "--preset", "bestarm", "--algo", "lucbpp,staged", "--trials", "30", "--seed", "2", "--permute", "--out",
       (dir / "perm.jsonl").string()},
      {"run", "--preset", "bestarm", "--delta", "0.05", "--trials", "30", "--permute", "--compare-bounds"},
      {"table1", "--sizes", "10,20", "--trials", "10", "--seed", "7", "--out", (dir / "t1.csv").string()},
      {"bounds", "--means-file", means.string(), "--delta", "0.05", "--k", "1"},
      {"tilting", "--mc", "100000", "--seed", "9"},
      {"simcheck", "--trials", "50", "--check", "both", "--n", "16"},
  };
  bool pass = true;
  int checked = 0;
  for (const auto& args : commands) {
    std::string outputs[2];
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::ostringstream out, err;
      const int code = cli_dispatch(args, out, err);
      pass = pass && code == 0;
      outputs[rep] = out.str();
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--out") files[rep] = slurp(args[i + 1]);
    }
    pass = pass && outputs[0] == outputs[1] && files[0] == files[1] && !outputs[0].empty();
    ++checked;
  }
  std::filesystem::remove_all(dir);
  return {pass, fmt("%d commands rerun, stdout and files compared byte for byte", checked)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 delta-correctness", ac1_correctness}, {"AC2 table1 ratios", ac2_table1},
      {"AC3 permutation bound", ac3_permutation_bound}, {"AC4 fano subset event", ac4_fano},
      {"AC5 tilting lemmas", ac5_tilting}, {"AC6 le cam swap", ac6_lecam},
      {"AC7 anytime coverage", ac7_coverage}, {"AC8 staged scaling", ac8_staged},
      {"AC9 determinism", ac9_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << name << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt("%.1f s", secs) << ") " << o.detail
              << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
