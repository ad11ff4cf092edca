#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mablab/confidence.hpp"
#include "mablab/core_model.hpp"
#include "mablab/transcript.hpp"

namespace mablab {

enum class AlgorithmId : std::uint16_t {
  LucbPlusPlus = 1,
  Lucb = 2,
  Oracle = 3,
  Uniform = 4,
  Staged = 5,
};

std::string_view to_string(AlgorithmId id);
// Accepts "lucbpp", "lucb", "oracle", "uniform", "staged".
AlgorithmId parse_algorithm(std::string_view name);

/// Per-arm pull counts N_a(t) and running sums.
struct PullState {
  std::vector<std::uint64_t> counts;
  std::vector<double> sums;
  std::uint64_t t{0};

  explicit PullState(std::size_t n) : counts(n, 0), sums(n, 0.0) {}

  void record(std::size_t arm, double x) {
    ++counts[arm];
    sums[arm] += x;
    ++t;
  }
  std::size_t n() const { return counts.size(); }
  // Throws std::logic_error for an unpulled arm.
  double mean(std::size_t arm) const;
};

struct RunRecord {
  std::string algo;
  std::size_t n{0};
  std::size_t k{0};
  double delta{0.0};
  std::uint64_t seed{0};
  std::uint64_t trial{0};
  std::uint64_t total_pulls{0};
  std::vector<std::uint64_t> pulls;
  std::vector<std::size_t> output;  // sorted arm indices
  bool correct{false};
  bool truncated{false};

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RunOptions {
  double delta{0.1};
  ConfidenceSchedule sched{};
  std::uint64_t max_pulls{10'000'000};
};

struct StagedConfig {
  double mu1{0.0};
  double mu2{0.0};
  double c1{8.0};
  double c2{4.0};
  AlgorithmId subroutine{AlgorithmId::LucbPlusPlus};

  // The true top two means of a best-arm instance, default constants.
  static StagedConfig from_instance(const Instance& inst);
  void validate() const;
};

struct StopDecision {
  std::vector<std::size_t> top_set;
  friend bool operator==(const StopDecision&, const StopDecision&) = default;
};
struct PullDecision {
  std::size_t h{0};
  std::size_t l{0};
  friend bool operator==(const PullDecision&, const PullDecision&) = default;
};
using Decision = std::variant<StopDecision, PullDecision>;

/// One LUCB-family decision from scratch. TOP_t holds the k largest
/// empirical means (ties: lowest index). Stops iff the smallest lower bound
/// in TOP_t, at radius U(N_a, delta_top), exceeds the largest upper bound
/// outside it, at radius U(N_a, delta_bottom). Otherwise h is the arg-min
/// lower bound in TOP_t and l the arg-max upper bound outside (ties: lowest
/// index). Every arm must have been pulled at least once.
Decision racing_select(const PullState& state, std::size_t k, double delta_top, double delta_bottom,
                       const ConfidenceSchedule& sched);

// LUCB++ radii: delta/(2(n-k)) on TOP_t, delta/(2k) on the rest.
Decision lucbpp_select(const PullState& state, std::size_t k, double delta, const ConfidenceSchedule& sched);
// Union bound over all n arms: delta/n on both sides.
Decision lucb_select(const PullState& state, std::size_t k, double delta, const ConfidenceSchedule& sched);

RunRecord run_lucbpp(const Instance& inst, const SampleSource& source, const RunOptions& opts);
RunRecord run_lucb(const Instance& inst, const SampleSource& source, const RunOptions& opts);

// w_i = (sqrt(n/k - 1) - 1)/(n - 2k) for the top k, (1 - k w)/(n - k) for
// the rest; 1/n everywhere when n = 2k.
std::vector<double> oracle_weights(std::size_t n, std::size_t k);

// Track argmin_a N_a/w_a with the LUCB stopping rule. The oracle knows which
// arms form the true top-k set; uniform uses w = 1/n.
RunRecord run_oracle(const Instance& inst, const SampleSource& source, const RunOptions& opts);
RunRecord run_uniform(const Instance& inst, const SampleSource& source, const RunOptions& opts);

struct StagedRun {
  RunRecord record;
  int stages{0};
};

// Best-arm algorithm given the top two means. Stage r runs the subroutine
// at confidence 10^-r, then re-samples its answer
// ceil(c1/gap^2 * log(c2 r^2/delta)) times and accepts if that mean exceeds
// mu1 - gap/2. All stages read fresh transcript samples.
StagedRun run_staged(const Instance& inst, const SampleSource& source, const StagedConfig& cfg,
                     const RunOptions& opts);
RunRecord run_staged_known_means(const Instance& inst, const SampleSource& source, const StagedConfig& cfg,
                                 const RunOptions& opts);

using Runner = std::function<RunRecord(const Instance&, const SampleSource&)>;

// Staged runners derive their config from the instance they are handed
// unless `staged` is given.
Runner make_runner(AlgorithmId id, const RunOptions& opts, std::optional<StagedConfig> staged = std::nullopt);

// Run `base` on the sigma-relabeled instance and source, then map pulls and
// output back through sigma^{-1}.
RunRecord symmetrize_with(const Runner& base, const Instance& inst, const SampleSource& source,
                          const Permutation& sigma);
// Same with sigma drawn uniformly from `sigma_stream`.
RunRecord symmetrize(const Runner& base, const Instance& inst, const SampleSource& source,
                     const RngStream& sigma_stream);

// Upper-bound shape with c = 1; Delta^-2 inside the log is clamped below at e.
double lucbpp_complexity_bound(const Instance& inst, double delta);

}  // namespace mablab
