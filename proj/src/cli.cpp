#include "mablab/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mablab/harness.hpp"
#include "mablab/lower_bounds.hpp"
#include "mablab/simulator_lab.hpp"

namespace mablab {

using json = nlohmann::ordered_json;

namespace {

void add_schedule_flags(CLI::App* cmd, ConfidenceSchedule& s) {
  cmd->add_option("--lil-constant", s.lil_constant, "constant in front of the anytime radius")->capture_default_str();
  cmd->add_option("--lil-inflation", s.lil_log_inflation, "weight of the log-log term")->capture_default_str();
  cmd->add_option("--sigma2", s.sigma2, "sub-gaussian variance proxy")->capture_default_str();
}

void add_instance_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--preset", cfg.preset, "table1 or bestarm")->capture_default_str();
  cmd->add_option("--means-file", cfg.means_file, "one mean per line, or a JSON arm list");
  cmd->add_option("--n", cfg.n, "number of arms for presets")->capture_default_str();
  cmd->add_option("--k", cfg.k, "size of the target set")->capture_default_str();
  cmd->add_option("--gap", cfg.gap, "gap for the bestarm preset")->capture_default_str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  return f;
}

std::vector<AlgorithmId> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<AlgorithmId> out;
  for (const auto& n : names) out.push_back(parse_algorithm(n));
  return out;
}

json maybe(auto&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return json{{"error", e.what()}};
  }
}

json bounds_report(const Instance& inst, double delta, double eta, double alpha, double beta, std::size_t m) {
  json j;
  j["n"] = inst.n();
  j["k"] = inst.k();
  j["params"] = {{"delta", delta}, {"eta", eta}, {"alpha", alpha}, {"beta", beta}, {"m", m}};

  j["permutation_total"] = maybe([&] {
    const auto p = permutation_total_bound(inst, delta);
    return json{{"value", p.value}, {"eta_star", p.eta_star}, {"sum_tau", p.sum_tau}, {"vacuous", p.vacuous}};
  });
  j["permutation_tail"] = maybe([&] {
    json arms = json::object();
    for (std::size_t b = 0; b < inst.n(); ++b) {
      if (b == inst.best_arm()) continue;
      const auto t = permutation_tail_bound(inst, b, eta, delta);
      arms[std::to_string(b)] = {{"threshold", t.threshold}, {"probability", t.probability}};
    }
    return arms;
  });
  j["combined"] = maybe([&] { return json(combined_bound(inst, delta)); });
  j["gaussian_mab_per_arm"] = maybe([&] {
    const auto g = gaussian_mab_per_arm_bound(inst, delta);
    return json{{"value", g.value}, {"argmax_m", g.argmax_m}, {"in_regime", g.in_regime}};
  });
  j["topk_per_arm"] = maybe([&] {
    const auto r = topk_per_arm_bounds(inst, delta);
    json per = json::object();
    for (const auto& [a, v] : r.per_arm) per[std::to_string(a)] = v;
    return json{{"per_arm", per}, {"total", r.total}};
  });

  // Subset/Fano forms use the best arm against the runner-up.
  const auto order = inst.ranking();
  const double klsum =
      kl_divergence(inst.arm(order[0]), inst.arm(order[1])) + kl_divergence(inst.arm(order[1]), inst.arm(order[0]));
  j["best_arm_subset"] = maybe([&] {
    const auto s = best_arm_subset_bound(inst.n(), klsum, m, beta, delta);
    return json{{"kl_sum", klsum},
                {"threshold", s.threshold},
                {"probability", s.probability},
                {"top_threshold", s.top_threshold},
                {"top_probability", s.top_probability}};
  });
  j["fano_rhs"] = maybe([&] {
    const auto s = best_arm_subset_bound(inst.n(), klsum, m, beta, delta);
    return json{{"tau", s.threshold}, {"value", fano_rhs(inst.n(), m, s.threshold, klsum)}};
  });
  j["big_main"] = maybe([&] {
    NaturalFamily fam;
    std::vector<double> thetas;
    const bool bern = inst.arm(0).kind() == ArmKind::Bernoulli;
    if (bern) fam.kind = NaturalFamilyKind::Bernoulli;
    for (auto a : order) {
      const auto& d = inst.arm(a);
      if ((d.kind() == ArmKind::Bernoulli) != bern) throw std::invalid_argument("mixed arm families");
      if (!bern && d.variance() != 1.0) throw std::invalid_argument("big_main needs unit-variance gaussians");
      thetas.push_back(bern ? std::log(d.p() / (1.0 - d.p())) : d.mean());
    }
    const auto b = big_main_bound(thetas, alpha, delta, fam);
    const double top_gap = thetas.front() - thetas.back();
    return json{{"threshold", b.threshold},
                {"probability", b.probability},
                {"delta_eff2", b.delta_eff2},
                {"kappa_star", b.kappa_star},
                {"max_squared_gap", top_gap * top_gap}};
  });
  j["q_of_beta"] = maybe([&] { return json(q_of_beta(beta)); });
  return j;
}

json tilting_json(const TiltingReport& r, bool passed) {
  return json{{"p_event_analytic", r.p_event_analytic},
              {"p_event_mc", r.p_event_mc},
              {"p_event_mc_stderr", r.p_event_mc_stderr},
              {"p_event_lower_bound", r.p_event_lower_bound},
              {"tv_analytic", r.tv_analytic},
              {"tv_mc", r.tv_mc},
              {"tv_mc_stderr", r.tv_mc_stderr},
              {"tv_binning_error", r.tv_binning_error},
              {"kappa", r.kappa},
              {"mc_samples", r.mc_samples},
              {"event_matches_mc", r.event_matches_mc},
              {"event_above_lower_bound", r.event_above_lower_bound},
              {"tv_below_kappa", r.tv_below_kappa},
              {"tv_matches_mc", r.tv_matches_mc},
              {"passed", passed}};
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-confidence bandit laboratory", "mablab"};
  app.require_subcommand(1);

  // run
  ExperimentConfig run_cfg;
  std::vector<std::string> run_algos{"lucbpp"};
  std::string run_out;
  bool compare = false;
  auto* run = app.add_subcommand("run", "run trials and print a CSV summary");
  add_instance_flags(run, run_cfg);
  add_schedule_flags(run, run_cfg.sched);
  run->add_option("--algo", run_algos, "lucbpp, lucb, oracle, uniform, staged")->delimiter(',')->capture_default_str();
  run->add_option("--delta", run_cfg.delta)->capture_default_str();
  run->add_option("--trials", run_cfg.trials)->capture_default_str();
  run->add_option("--seed", run_cfg.master_seed)->capture_default_str();
  run->add_option("--max-pulls", run_cfg.max_pulls)->capture_default_str();
  run->add_option("--threads", run_cfg.threads, "0 uses every core")->capture_default_str();
  run->add_flag("--permute", run_cfg.permute_each_trial, "relabel arms uniformly at random in each trial");
  run->add_flag("--compare-bounds", compare, "print empirical pulls against lower bounds (needs --permute)");
  run->add_option("--out", run_out, "JSONL file for the raw records");

  // table1
  ExperimentConfig t1_cfg;
  std::vector<std::size_t> sizes{10, 100};
  std::string t1_out;
  auto* t1 = app.add_subcommand("table1", "LUCB++ against LUCB, oracle and uniform sampling");
  add_schedule_flags(t1, t1_cfg.sched);
  t1->add_option("--sizes", sizes)->delimiter(',')->capture_default_str();
  t1->add_option("--trials", t1_cfg.trials)->capture_default_str();
  t1->add_option("--seed", t1_cfg.master_seed)->capture_default_str();
  t1->add_option("--delta", t1_cfg.delta)->capture_default_str();
  t1->add_option("--max-pulls", t1_cfg.max_pulls)->capture_default_str();
  t1->add_option("--threads", t1_cfg.threads)->capture_default_str();
  t1->add_option("--out", t1_out, "CSV copy of the tables");

  // bounds
  ExperimentConfig b_cfg;
  b_cfg.preset = "bestarm";
  b_cfg.k = 1;
  double b_delta = 0.05;
  double b_eta = 0.125;
  double b_alpha = 10.0;
  double b_beta = 1.0 / 16.0;
  std::size_t b_m = 2;
  auto* bounds = app.add_subcommand("bounds", "evaluate every lower bound for an instance");
  add_instance_flags(bounds, b_cfg);
  bounds->add_option("--delta", b_delta)->capture_default_str();
  bounds->add_option("--eta", b_eta)->capture_default_str();
  bounds->add_option("--alpha", b_alpha)->capture_default_str();
  bounds->add_option("--beta", b_beta)->capture_default_str();
  bounds->add_option("--m", b_m, "subset size for the Fano forms")->capture_default_str();

  // tilting
  double theta1 = 0.5;
  double thetaj = 0.0;
  std::uint64_t tau = 10;
  double kappa = 0.1;
  std::uint64_t mc = 1'000'000;
  std::uint64_t tilt_seed = 0;
  std::string family = "gaussian";
  auto* tilting = app.add_subcommand("tilting", "censored-tilting kernel: analytic values and Monte Carlo");
  tilting->add_option("--theta1", theta1)->capture_default_str();
  tilting->add_option("--thetaj", thetaj)->capture_default_str();
  tilting->add_option("--tau", tau)->capture_default_str();
  tilting->add_option("--kappa", kappa)->capture_default_str();
  tilting->add_option("--mc", mc, "Monte Carlo draws, 0 to skip")->capture_default_str();
  tilting->add_option("--seed", tilt_seed)->capture_default_str();
  tilting->add_option("--family", family, "gaussian or bernoulli")->capture_default_str();

  // simcheck
  std::size_t s_n = 5;
  double s_gap = 0.5;
  double s_eta = 0.125;
  double s_delta = 0.05;
  std::size_t s_trials = 1000;
  std::uint64_t s_seed = 0;
  std::size_t s_m = 4;
  double s_beta = 1.0 / 16.0;
  std::string s_algo = "lucbpp";
  std::string s_check = "both";
  ConfidenceSchedule s_sched;
  auto* simcheck = app.add_subcommand("simcheck", "swap-simulator and Fano subset checks");
  add_schedule_flags(simcheck, s_sched);
  simcheck->add_option("--n", s_n)->capture_default_str();
  simcheck->add_option("--gap", s_gap)->capture_default_str();
  simcheck->add_option("--eta", s_eta)->capture_default_str();
  simcheck->add_option("--delta", s_delta)->capture_default_str();
  simcheck->add_option("--trials", s_trials)->capture_default_str();
  simcheck->add_option("--seed", s_seed)->capture_default_str();
  simcheck->add_option("--m", s_m)->capture_default_str();
  simcheck->add_option("--beta", s_beta)->capture_default_str();
  simcheck->add_option("--algo", s_algo)->capture_default_str();
  simcheck->add_option("--check", s_check, "lecam, fano or both")->capture_default_str();

  std::vector<const char*> argv{"mablab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      run_cfg.algorithms = parse_algorithms(run_algos);
      if (compare) {
        const auto rep = bound_comparison_report(run_cfg, run_cfg.delta);
        json j{{"n", rep.n}, {"k", rep.k}, {"delta", rep.delta}};
        json algos = json::array();
        for (const auto& a : rep.algos) {
          json checks = json::array();
          for (const auto& c : a.checks)
            checks.push_back({{"name", c.name},
                              {"empirical", c.empirical},
                              {"bound", c.bound},
                              {"required_ratio", c.required_ratio},
                              {"below", c.below}});
          algos.push_back({{"algo", a.algo},
                           {"mean_T", a.mean_T},
                           {"stderr", a.std_error},
                           {"mean_pulls", a.mean_pulls},
                           {"checks", checks}});
        }
        j["algos"] = algos;
        j["skipped"] = rep.skipped;
        j["any_below"] = rep.any_below;
        out << j.dump(2) << '\n';
        return 0;
      }
      const auto records = run_trials(run_cfg);
      if (!run_out.empty()) persist(records, run_out);
      write_csv(out, {summarize(records)});
      return 0;
    }
    if (t1->parsed()) {
      const auto tables = table1_report(sizes, t1_cfg.trials, t1_cfg.master_seed, t1_cfg);
      for (const auto& t : tables) {
        out << "# n=" << t.n << '\n';
        write_csv(out, {t});
      }
      if (!t1_out.empty()) {
        auto f = open_out(t1_out);
        write_csv(f, tables);
        if (!f) throw IoError("write failed for " + t1_out);
      }
      return 0;
    }
    if (bounds->parsed()) {
      const Instance inst = b_cfg.instance();
      out << bounds_report(inst, b_delta, b_eta, b_alpha, b_beta, b_m).dump(2) << '\n';
      return 0;
    }
    if (tilting->parsed()) {
      const RngStream stream(tilt_seed, {StreamPurpose::Tilting, 0, 0, 0});
      if (family == "gaussian") {
        const auto r = verify_balance(theta1, thetaj, tau, kappa, mc, stream);
        const auto k = tilting_kernel_new(theta1, thetaj, tau, kappa);
        json j{{"family", "gaussian"}, {"theta1", theta1}, {"thetaj", thetaj}, {"tau", tau}, {"c", k.c()}};
        j.update(tilting_json(r, r.passed()));
        out << j.dump(2) << '\n';
        return 0;
      }
      if (family == "bernoulli") {
        NaturalFamily fam{NaturalFamilyKind::Bernoulli};
        const auto k = tilting_kernel_new(theta1, thetaj, tau, kappa, fam);
        json j{{"family", "bernoulli"}, {"theta1", theta1}, {"thetaj", thetaj}, {"tau", tau}, {"c", k.c()},
               {"kappa", kappa}, {"p_event_lower_bound", balance_lower_bound(k)}};
        if (mc > 0) {
          const auto e = plain_event_probability(k, stream, mc);
          j["p_event_mc"] = e.value;
          j["p_event_mc_stderr"] = e.std_error;
        }
        out << j.dump(2) << '\n';
        return 0;
      }
      throw std::invalid_argument("unknown family '" + family + "'");
    }
    if (simcheck->parsed()) {
      if (s_check != "lecam" && s_check != "fano" && s_check != "both")
        throw std::invalid_argument("--check must be lecam, fano or both");
      ExperimentConfig cfg;
      cfg.preset = "bestarm";
      cfg.n = s_n;
      cfg.gap = s_gap;
      const Instance inst = cfg.instance();
      RunOptions opts;
      opts.delta = s_delta;
      opts.sched = s_sched;
      const Runner runner = make_runner(parse_algorithm(s_algo), opts);
      json j{{"n", s_n}, {"gap", s_gap}, {"delta", s_delta}, {"trials", s_trials}, {"algo", s_algo}};
      if (s_check != "fano") {
        const auto r = lecam_check(inst, 1, s_eta, s_delta, runner, s_trials, s_seed);
        j["lecam"] = {{"eta", s_eta},
                      {"tau", r.tau},
                      {"rate_nu", r.rate_nu},
                      {"rate_swap", r.rate_swap},
                      {"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"stderr", r.std_error},
                      {"holds", r.holds()}};
      }
      if (s_check != "lecam") {
        const auto r = fano_event_check(inst, s_m, s_beta, s_delta, runner, s_trials, s_seed);
        j["fano"] = {{"m", s_m},
                     {"beta", s_beta},
                     {"threshold", r.threshold},
                     {"rate", r.rate},
                     {"stderr", r.std_error},
                     {"floor", r.floor},
                     {"top_threshold", r.top_threshold},
                     {"top_rate", r.top_rate},
                     {"top_floor", r.top_floor},
                     {"holds", r.holds()}};
      }
      out << j.dump(2) << '\n';
      return 0;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mablab
