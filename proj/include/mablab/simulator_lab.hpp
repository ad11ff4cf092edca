#pragma once

#include <cstddef>
#include <cstdint>

#include "mablab/algorithms.hpp"
#include "mablab/lower_bounds.hpp"
#include "mablab/rng.hpp"
#include "mablab/transcript.hpp"

namespace mablab {

/// Censored-tilting acceptance kernel for the sample mean of tau draws.
/// K(x) = exp(tau d x) / c on {exp(tau d x) <= c}, 0 above, d = theta1 - thetaj.
struct TiltingKernel {
  double theta1{0.0};
  double thetaj{0.0};
  std::uint64_t tau{1};
  double kappa{0.1};
  double log_c{0.0};
  NaturalFamily family{};

  double c() const;
  double gap() const { return theta1 - thetaj; }
  // Largest x with K(x) > 0; +inf when the kernel is constant.
  double cap() const;
  double weight(double x) const;
};

// Needs theta1 >= thetaj, kappa in (0,1) and [thetaj, 2 theta1 - thetaj]
// inside the family's parameter space (DomainError otherwise). theta1 ==
// thetaj or tau == 0 give the constant kernel K = kappa.
TiltingKernel tilting_kernel_new(double theta1, double thetaj, std::uint64_t tau, double kappa,
                                 const NaturalFamily& family = {});

struct MeasuredDraw {
  double x_bar{0.0};
  bool event{false};
};

// Draw number `draw` of X_bar_j and the uniform xi. Gaussian: X_bar_j ~
// N(thetaj, 1/tau). Bernoulli: mean of tau flips at A'(thetaj). Needs tau >= 1.
MeasuredDraw sample_measuring_event(const TiltingKernel& k, const RngStream& stream, std::uint64_t draw);

// Gaussian only. P(E) = exp(tau(A(theta1) - A(thetaj))) / c * (1 - Q).
double analytic_event_probability(const TiltingKernel& k);
// Gaussian only. Q = Pr(X_bar_1 > cap), X_bar_1 ~ N(theta1, 1/tau).
double analytic_tv(const TiltingKernel& k);

// kappa(1-kappa) exp(-tau * klsum).
double balance_lower_bound(const TiltingKernel& k);

struct Estimate {
  double value{0.0};
  double std_error{0.0};
};

// Event frequency over `draws` calls of sample_measuring_event.
Estimate plain_event_probability(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws);
// Gaussian only. Conditional MC (xi integrated out) with importance
// sampling from N(theta1, 2/tau); works for events far in the tail.
Estimate importance_event_probability(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws);

struct BinnedTv {
  double value{0.0};
  double std_error{0.0};
  double binning_error{0.0};  // noise floor plus discretization slack
};

// Gaussian only. Histogram of `draws` reference X_bar_1 draws against the
// importance-weighted histogram of X_bar_j | E. Bin width 0.02/sqrt(tau) over
// theta1 +- 8/sqrt(tau), plus two overflow bins.
BinnedTv binned_tv(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws);

struct TiltingReport {
  double p_event_analytic{0.0};
  double p_event_mc{0.0};
  double p_event_mc_stderr{0.0};
  double p_event_lower_bound{0.0};
  double tv_analytic{0.0};
  double tv_mc{0.0};
  double tv_mc_stderr{0.0};
  double tv_binning_error{0.0};
  double kappa{0.0};
  std::uint64_t mc_samples{0};

  bool event_matches_mc{true};
  bool event_above_lower_bound{false};
  bool tv_below_kappa{false};
  bool tv_matches_mc{true};

  bool passed() const { return event_matches_mc && event_above_lower_bound && tv_below_kappa && tv_matches_mc; }
};

// Gaussian family. mc_samples == 0 skips the Monte Carlo parts.
TiltingReport verify_balance(double theta1, double thetaj, std::uint64_t tau, double kappa,
                             std::uint64_t mc_samples, const RngStream& stream);

RunRecord run_on_transcript(const Runner& algorithm, const Instance& inst, const SampleSource& source);

struct LeCamResult {
  double lhs{0.0};
  double rhs{0.0};
  double std_error{0.0};
  double tau{0.0};
  double rate_nu{0.0};    // Pr_nu[N_b(T) > tau]
  double rate_swap{0.0};  // Pr_swap[N_a*(T) > tau]
  std::size_t trials{0};

  bool holds(double z = 3.0) const { return lhs >= rhs - z * std_error; }
};

// Symmetrized `algorithm` on nu and on nu with arms a* and b exchanged.
LeCamResult lecam_check(const Instance& inst, std::size_t b, double eta, double delta, const Runner& algorithm,
                        std::size_t trials, std::uint64_t seed);

struct FanoResult {
  double rate{0.0};
  double std_error{0.0};
  double floor{0.0};
  double threshold{0.0};
  double top_rate{0.0};
  double top_stderr{0.0};
  double top_floor{0.0};
  double top_threshold{0.0};
  std::size_t trials{0};

  bool holds(double z = 3.0) const { return rate >= floor - z * std_error; }
};

// Instance with one best arm and n-1 identical others. Each trial runs on a
// uniformly permuted copy.
FanoResult fano_event_check(const Instance& inst, std::size_t m, double beta, double delta, const Runner& algorithm,
                            std::size_t trials, std::uint64_t seed);

}  // namespace mablab
