#include "mablab/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mablab {

std::string_view to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::LucbPlusPlus: return "lucbpp";
    case AlgorithmId::Lucb: return "lucb";
    case AlgorithmId::Oracle: return "oracle";
    case AlgorithmId::Uniform: return "uniform";
    case AlgorithmId::Staged: return "staged";
  }
  return "unknown";
}

AlgorithmId parse_algorithm(std::string_view name) {
  for (auto id : {AlgorithmId::LucbPlusPlus, AlgorithmId::Lucb, AlgorithmId::Oracle, AlgorithmId::Uniform,
                  AlgorithmId::Staged}) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

double PullState::mean(std::size_t arm) const {
  if (counts[arm] == 0) throw std::logic_error("empirical mean of an unpulled arm");
  return sums[arm] / static_cast<double>(counts[arm]);
}

StagedConfig StagedConfig::from_instance(const Instance& inst) {
  const auto g = gap_profile(inst, GapKind::BestArm);
  StagedConfig cfg;
  cfg.mu1 = g.sorted_means[0];
  cfg.mu2 = g.sorted_means[1];
  return cfg;
}

void StagedConfig::validate() const {
  if (!(mu1 > mu2)) throw ConfigurationError("staged config needs mu1 > mu2");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigurationError("staged constants must be positive");
  if (subroutine != AlgorithmId::LucbPlusPlus)
    throw ConfigurationError("staged subroutine must be lucbpp");
}

namespace {

// Orders arms best-first: larger mean, then lower index.
struct BetterMean {
  bool operator()(const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) const {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  }
};

std::vector<std::size_t> empirical_ranking(const PullState& state) {
  std::vector<std::size_t> idx(state.n());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> mu(state.n());
  for (std::size_t a = 0; a < state.n(); ++a) mu[a] = state.mean(a);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mu[a] > mu[b]; });
  return idx;
}

void check_deltas(double delta_top, double delta_bottom) {
  if (!(delta_top > 0.0 && delta_top < 1.0) || !(delta_bottom > 0.0 && delta_bottom < 1.0))
    throw std::invalid_argument("racing radii need confidence levels in (0,1)");
}

/// Incremental LUCB-family state: keeps TOP_t, the lower bounds inside it
/// and the upper bounds outside it in ordered sets so that each pull costs
/// O(log n). Decisions match racing_select exactly.
class RacingEngine {
 public:
  RacingEngine(std::size_t n, std::size_t k, RadiusTable& top_radius, RadiusTable& bottom_radius)
      : state_(n), k_(k), top_r_(&top_radius), bot_r_(&bottom_radius), in_top_(n, false), mean_(n, 0.0),
        bound_(n, 0.0) {}

  const PullState& state() const { return state_; }

  // Accumulate without maintaining the ordering; call build() afterwards.
  void seed_pull(std::size_t arm, double x) { state_.record(arm, x); }

  void build() {
    for (std::size_t a = 0; a < state_.n(); ++a) {
      mean_[a] = state_.mean(a);
      insert_top(a);
      rebalance();
    }
  }

  void pull(std::size_t arm, double x) {
    state_.record(arm, x);
    if (in_top_[arm]) {
      top_.erase({mean_[arm], arm});
      lcb_.erase({bound_[arm], arm});
    } else {
      bottom_.erase({mean_[arm], arm});
      ucb_.erase({bound_[arm], arm});
    }
    mean_[arm] = state_.mean(arm);
    insert_top(arm);
    rebalance();
  }

  bool should_stop() const { return lcb_.begin()->first > ucb_.begin()->first; }
  std::size_t h() const { return lcb_.begin()->second; }
  std::size_t l() const { return ucb_.begin()->second; }

  std::vector<std::size_t> top_set() const {
    std::vector<std::size_t> out;
    out.reserve(k_);
    for (const auto& e : top_) out.push_back(e.second);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void insert_top(std::size_t a) {
    in_top_[a] = true;
    bound_[a] = mean_[a] - (*top_r_)(state_.counts[a]);
    top_.insert({mean_[a], a});
    lcb_.insert({bound_[a], a});
  }

  void insert_bottom(std::size_t a) {
    in_top_[a] = false;
    bound_[a] = mean_[a] + (*bot_r_)(state_.counts[a]);
    bottom_.insert({mean_[a], a});
    ucb_.insert({bound_[a], a});
  }

  void demote_worst_top() {
    const auto worst = std::prev(top_.end())->second;
    top_.erase(std::prev(top_.end()));
    lcb_.erase({bound_[worst], worst});
    insert_bottom(worst);
  }

  void rebalance() {
    if (top_.size() > k_) {
      demote_worst_top();
      return;
    }
    if (top_.size() == k_ && !bottom_.empty() && BetterMean{}(*bottom_.begin(), *std::prev(top_.end()))) {
      const auto best = bottom_.begin()->second;
      bottom_.erase(bottom_.begin());
      ucb_.erase({bound_[best], best});
      demote_worst_top();
      insert_top(best);
    }
  }

  struct LargerBound {
    bool operator()(const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) const {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    }
  };

  PullState state_;
  std::size_t k_;
  RadiusTable* top_r_;
  RadiusTable* bot_r_;
  std::vector<bool> in_top_;
  std::vector<double> mean_;
  std::vector<double> bound_;  // lower bound if in TOP_t, upper bound otherwise
  std::set<std::pair<double, std::size_t>, BetterMean> top_;
  std::set<std::pair<double, std::size_t>, BetterMean> bottom_;
  std::set<std::pair<double, std::size_t>> lcb_;               // smallest first
  std::set<std::pair<double, std::size_t>, LargerBound> ucb_;  // largest first
};

struct RaceParams {
  std::size_t k;
  double delta_top;
  double delta_bottom;
  std::uint64_t budget;
};

struct RaceResult {
  PullState state;
  std::vector<std::size_t> output;
  bool truncated;
};

// Shared LUCB-style loop. `two_sided` pulls h and l each round; otherwise the
// arm returned by `next_arm` is pulled alone.
template <class NextArm>
RaceResult race(ArmReader& reader, const RaceParams& p, const ConfidenceSchedule& sched, bool two_sided,
                NextArm&& next_arm) {
  const std::size_t n = reader.num_arms();
  if (p.budget < n) throw std::invalid_argument("max_pulls must be at least n");
  check_deltas(p.delta_top, p.delta_bottom);
  RadiusTable top_r(sched, p.delta_top);
  RadiusTable bot_r(sched, p.delta_bottom);
  RacingEngine eng(n, p.k, top_r, bot_r);
  for (std::size_t a = 0; a < n; ++a) eng.seed_pull(a, reader.next(a));
  eng.build();
  next_arm.init(eng.state());

  const std::uint64_t per_round = two_sided ? 2 : 1;
  bool truncated = false;
  while (!eng.should_stop()) {
    if (eng.state().t + per_round > p.budget) {
      truncated = true;
      break;
    }
    if (two_sided) {
      const std::size_t h = eng.h();
      const std::size_t l = eng.l();
      eng.pull(h, reader.next(h));
      eng.pull(l, reader.next(l));
    } else {
      const std::size_t a = next_arm.pick();
      eng.pull(a, reader.next(a));
      next_arm.update(a, eng.state());
    }
  }
  return {eng.state(), eng.top_set(), truncated};
}

struct NoTracking {
  void init(const PullState&) {}
  std::size_t pick() { return 0; }
  void update(std::size_t, const PullState&) {}
};

// argmin_a N_a / w_a, ties by lowest index.
class WeightTracking {
 public:
  explicit WeightTracking(std::vector<double> weights) : w_(std::move(weights)) {}

  void init(const PullState& s) {
    for (std::size_t a = 0; a < w_.size(); ++a) queue_.insert({key(s, a), a});
  }
  std::size_t pick() { return queue_.begin()->second; }
  void update(std::size_t a, const PullState& s) {
    queue_.erase(queue_.begin());
    queue_.insert({key(s, a), a});
  }

 private:
  double key(const PullState& s, std::size_t a) const { return static_cast<double>(s.counts[a]) / w_[a]; }

  std::vector<double> w_;
  std::set<std::pair<double, std::size_t>> queue_;
};

RunRecord make_record(AlgorithmId id, const Instance& inst, double delta, const RaceResult& r) {
  RunRecord rec;
  rec.algo = std::string(to_string(id));
  rec.n = inst.n();
  rec.k = inst.k();
  rec.delta = delta;
  rec.total_pulls = r.state.t;
  rec.pulls = r.state.counts;
  rec.output = r.output;
  rec.correct = rec.output == inst.top_set();
  rec.truncated = r.truncated;
  return rec;
}

void check_source(const Instance& inst, const SampleSource& source) {
  if (source.num_arms() != inst.n()) throw std::invalid_argument("source and instance differ in arm count");
}

RaceParams lucbpp_params(std::size_t n, std::size_t k, double delta, std::uint64_t budget) {
  return {k, delta / (2.0 * static_cast<double>(n - k)), delta / (2.0 * static_cast<double>(k)), budget};
}

RaceParams lucb_params(std::size_t n, std::size_t k, double delta, std::uint64_t budget) {
  const double d = delta / static_cast<double>(n);
  return {k, d, d, budget};
}

RunRecord run_tracking(AlgorithmId id, const Instance& inst, const SampleSource& source, const RunOptions& opts,
                       std::vector<double> weights) {
  check_source(inst, source);
  ArmReader reader(source);
  WeightTracking tracker(std::move(weights));
  const auto r = race(reader, lucb_params(inst.n(), inst.k(), opts.delta, opts.max_pulls), opts.sched, false,
                      tracker);
  return make_record(id, inst, opts.delta, r);
}

}  // namespace

Decision racing_select(const PullState& state, std::size_t k, double delta_top, double delta_bottom,
                       const ConfidenceSchedule& sched) {
  const std::size_t n = state.n();
  if (k < 1 || k >= n) throw std::invalid_argument("racing_select needs 1 <= k < n");
  check_deltas(delta_top, delta_bottom);
  for (auto c : state.counts)
    if (c == 0) throw std::logic_error("racing_select: every arm must be pulled once first");

  const auto order = empirical_ranking(state);
  std::size_t h = order[0];
  double min_lcb = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t a = order[i];
    const double lcb = state.mean(a) - u_bound(sched, state.counts[a], delta_top);
    if (lcb < min_lcb || (lcb == min_lcb && a < h)) {
      min_lcb = lcb;
      h = a;
    }
  }
  std::size_t l = order[k];
  double max_ucb = -std::numeric_limits<double>::infinity();
  for (std::size_t i = k; i < n; ++i) {
    const std::size_t a = order[i];
    const double ucb = state.mean(a) + u_bound(sched, state.counts[a], delta_bottom);
    if (ucb > max_ucb || (ucb == max_ucb && a < l)) {
      max_ucb = ucb;
      l = a;
    }
  }
  if (min_lcb > max_ucb) {
    std::vector<std::size_t> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(top.begin(), top.end());
    return StopDecision{std::move(top)};
  }
  return PullDecision{h, l};
}

Decision lucbpp_select(const PullState& state, std::size_t k, double delta, const ConfidenceSchedule& sched) {
  const auto p = lucbpp_params(state.n(), k, delta, 0);
  return racing_select(state, k, p.delta_top, p.delta_bottom, sched);
}

Decision lucb_select(const PullState& state, std::size_t k, double delta, const ConfidenceSchedule& sched) {
  const auto p = lucb_params(state.n(), k, delta, 0);
  return racing_select(state, k, p.delta_top, p.delta_bottom, sched);
}

RunRecord run_lucbpp(const Instance& inst, const SampleSource& source, const RunOptions& opts) {
  check_source(inst, source);
  ArmReader reader(source);
  const auto r = race(reader, lucbpp_params(inst.n(), inst.k(), opts.delta, opts.max_pulls), opts.sched, true,
                      NoTracking{});
  return make_record(AlgorithmId::LucbPlusPlus, inst, opts.delta, r);
}

RunRecord run_lucb(const Instance& inst, const SampleSource& source, const RunOptions& opts) {
  check_source(inst, source);
  ArmReader reader(source);
  const auto r =
      race(reader, lucb_params(inst.n(), inst.k(), opts.delta, opts.max_pulls), opts.sched, true, NoTracking{});
  return make_record(AlgorithmId::Lucb, inst, opts.delta, r);
}

std::vector<double> oracle_weights(std::size_t n, std::size_t k) {
  if (k < 1 || n <= k) throw std::invalid_argument("oracle_weights needs n > k >= 1");
  if (n == 2 * k) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double w_top = (std::sqrt(nd / kd - 1.0) - 1.0) / (nd - 2.0 * kd);
  const double w_bottom = (1.0 - kd * w_top) / (nd - kd);
  std::vector<double> w(n, w_bottom);
  std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k), w_top);
  return w;
}

RunRecord run_oracle(const Instance& inst, const SampleSource& source, const RunOptions& opts) {
  const auto base = oracle_weights(inst.n(), inst.k());
  // Oracle privilege: the top-k weight goes to the true top-k arms.
  std::vector<double> w(inst.n(), base.back());
  for (std::size_t a : inst.top_set()) w[a] = base.front();
  return run_tracking(AlgorithmId::Oracle, inst, source, opts, std::move(w));
}

RunRecord run_uniform(const Instance& inst, const SampleSource& source, const RunOptions& opts) {
  return run_tracking(AlgorithmId::Uniform, inst, source, opts,
                      std::vector<double>(inst.n(), 1.0 / static_cast<double>(inst.n())));
}

StagedRun run_staged(const Instance& inst, const SampleSource& source, const StagedConfig& cfg,
                     const RunOptions& opts) {
  check_source(inst, source);
  if (inst.k() != 1) throw std::invalid_argument("staged algorithm solves best-arm problems (k = 1)");
  cfg.validate();
  const auto truth = StagedConfig::from_instance(inst);
  if (truth.mu1 != cfg.mu1 || truth.mu2 != cfg.mu2)
    throw ConfigurationError("staged config means do not match the instance's top two means");
  if (opts.max_pulls < inst.n()) throw std::invalid_argument("max_pulls must be at least n");

  const double gap = cfg.mu1 - cfg.mu2;
  const double accept_above = cfg.mu1 - gap / 2.0;
  ArmReader reader(source);
  std::vector<std::uint64_t> pulls(inst.n(), 0);
  std::uint64_t t = 0;

  StagedRun out;
  std::size_t answer = 0;
  bool truncated = false;
  bool accepted = false;
  for (int r = 1; !accepted && !truncated; ++r) {
    out.stages = r;
    const double delta_r = std::pow(10.0, -std::min(r, 300));
    // Subroutine: LUCB++ with k = 1 on fresh samples.
    const auto sub = race(reader, lucbpp_params(inst.n(), 1, delta_r, opts.max_pulls - t), opts.sched, true,
                          NoTracking{});
    for (std::size_t a = 0; a < inst.n(); ++a) pulls[a] += sub.state.counts[a];
    t += sub.state.t;
    answer = sub.output.front();
    if (sub.truncated) {
      truncated = true;
      break;
    }
    const double rr = static_cast<double>(r);
    const auto verify = static_cast<std::uint64_t>(
        std::ceil(cfg.c1 / (gap * gap) * std::log(cfg.c2 * rr * rr / opts.delta)));
    if (t + verify > opts.max_pulls) {
      truncated = true;
      break;
    }
    double sum = 0.0;
    for (std::uint64_t i = 0; i < verify; ++i) sum += reader.next(answer);
    pulls[answer] += verify;
    t += verify;
    accepted = sum / static_cast<double>(verify) > accept_above;
    if (!accepted && t + inst.n() > opts.max_pulls) truncated = true;
  }

  RunRecord& rec = out.record;
  rec.algo = std::string(to_string(AlgorithmId::Staged));
  rec.n = inst.n();
  rec.k = 1;
  rec.delta = opts.delta;
  rec.total_pulls = t;
  rec.pulls = std::move(pulls);
  rec.output = {answer};
  rec.correct = rec.output == inst.top_set();
  rec.truncated = truncated;
  return out;
}

RunRecord run_staged_known_means(const Instance& inst, const SampleSource& source, const StagedConfig& cfg,
                                 const RunOptions& opts) {
  return run_staged(inst, source, cfg, opts).record;
}

Runner make_runner(AlgorithmId id, const RunOptions& opts, std::optional<StagedConfig> staged) {
  opts.sched.validate();
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  switch (id) {
    case AlgorithmId::LucbPlusPlus:
      return [opts](const Instance& i, const SampleSource& s) { return run_lucbpp(i, s, opts); };
    case AlgorithmId::Lucb:
      return [opts](const Instance& i, const SampleSource& s) { return run_lucb(i, s, opts); };
    case AlgorithmId::Oracle:
      return [opts](const Instance& i, const SampleSource& s) { return run_oracle(i, s, opts); };
    case AlgorithmId::Uniform:
      return [opts](const Instance& i, const SampleSource& s) { return run_uniform(i, s, opts); };
    case AlgorithmId::Staged:
      return [opts, staged](const Instance& i, const SampleSource& s) {
        return run_staged_known_means(i, s, staged ? *staged : StagedConfig::from_instance(i), opts);
      };
  }
  throw std::invalid_argument("unknown algorithm id");
}

RunRecord symmetrize_with(const Runner& base, const Instance& inst, const SampleSource& source,
                          const Permutation& sigma) {
  const Instance relabeled = apply_permutation(inst, sigma);
  const RelabeledSource view(source, sigma);
  RunRecord rec = base(relabeled, view);

  std::vector<std::uint64_t> pulls(inst.n());
  for (std::size_t a = 0; a < inst.n(); ++a) pulls[a] = rec.pulls[sigma(a)];
  const auto inv = sigma.inverse();
  std::vector<std::size_t> output;
  output.reserve(rec.output.size());
  for (std::size_t p : rec.output) output.push_back(inv(p));
  std::sort(output.begin(), output.end());

  rec.pulls = std::move(pulls);
  rec.output = std::move(output);
  rec.correct = rec.output == inst.top_set();
  return rec;
}

RunRecord symmetrize(const Runner& base, const Instance& inst, const SampleSource& source,
                     const RngStream& sigma_stream) {
  return symmetrize_with(base, inst, source, Permutation::uniform(inst.n(), sigma_stream));
}

double lucbpp_complexity_bound(const Instance& inst, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const auto g = gap_profile(inst, GapKind::TopK);
  const auto top = inst.top_set();
  std::vector<bool> is_top(inst.n(), false);
  for (std::size_t a : top) is_top[a] = true;
  const double n = static_cast<double>(inst.n());
  const double k = static_cast<double>(inst.k());
  double total = 0.0;
  for (std::size_t a = 0; a < inst.n(); ++a) {
    const double inv_gap2 = 1.0 / (g.gaps[a] * g.gaps[a]);
    const double loglog = std::log(std::max(inv_gap2, std::numbers::e));
    const double side = is_top[a] ? n - k : k;
    total += inv_gap2 * std::log(side * loglog / delta);
  }
  return total;
}

}  // namespace mablab
