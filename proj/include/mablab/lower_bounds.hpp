#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>

#include "mablab/core_model.hpp"

namespace mablab {

// Thrown when natural parameters leave the family's parameter space.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BoundParams {
  double delta{std::numeric_limits<double>::quiet_NaN()};
  double eta{std::numeric_limits<double>::quiet_NaN()};
  double alpha{std::numeric_limits<double>::quiet_NaN()};
  double beta{std::numeric_limits<double>::quiet_NaN()};
  std::size_t m{0};
};

struct LowerBoundReport {
  std::map<std::size_t, double> per_arm;  // expected-pull lower bounds
  double total{0.0};
  std::map<std::size_t, std::pair<double, double>> thresholds;  // arm -> (tau, probability)
  BoundParams params;
};

// Tail-form bound: Pr[pulls > threshold] >= probability.
struct TailBound {
  double threshold{0.0};
  double probability{0.0};
};

// Grid search over [lo, hi] with the given step, plus the endpoint.
struct GridMax {
  double argmax{0.0};
  double value{0.0};
};
template <class F>
GridMax grid_maximize(F&& f, double lo, double hi, double step) {
  GridMax best{lo, f(lo)};
  for (std::size_t i = 1;; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double xv = x < hi ? x : hi;
    const double v = f(xv);
    if (v > best.value) best = {xv, v};
    if (x >= hi) break;
  }
  return best;
}

inline constexpr double kDefaultGridStep = 1e-4;

// 1 / (KL(nu_best, nu_b) + KL(nu_b, nu_best)).
double symmetric_kl_inverse(const Instance& inst, std::size_t b);

// threshold tau_b log(1/(4 eta)), probability max(eta - delta, 0). Needs
// delta < eta <= 1/4 and b != best arm.
TailBound permutation_tail_bound(const Instance& inst, std::size_t b, double eta, double delta);

struct PermutationTotal {
  double value{0.0};
  double eta_star{0.0};
  double sum_tau{0.0};
  bool vacuous{false};  // delta >= 1/4
};

// sup_{eta in [delta, 1/4]} (eta - delta) log(1/(4 eta)) * sum_{b != best} tau_b.
PermutationTotal permutation_total_bound(const Instance& inst, double delta, double grid_step = kDefaultGridStep);

// max{ max_b gap_b^-2 log(1/delta), sum_b gap_b^-2 } over suboptimal arms.
double combined_bound(const Instance& inst, double delta);

struct GaussianMabBound {
  double value{0.0};
  std::size_t argmax_m{0};  // 1-based sorted position
  bool in_regime{true};     // delta <= 1/16
};

// max_{2 <= m <= n} (mu_(1) - mu_(m))^-2 log(m/delta).
GaussianMabBound gaussian_mab_per_arm_bound(const Instance& inst, double delta);

// Per-arm top-k bounds; total is their sum.
LowerBoundReport topk_per_arm_bounds(const Instance& inst, double delta);

struct SubsetBound {
  double threshold{0.0};      // kl_sum^-1 (beta log(n/m) - log 2), clamped at 0
  double probability{0.0};    // max(1 - 2 beta - delta, 0)
  double top_threshold{0.0};  // kl_sum^-1 (beta log n - log 2), clamped at 0
  double top_probability{0.0};  // max(1 - beta - delta, 0)
};

SubsetBound best_arm_subset_bound(std::size_t n, double kl_sum, std::size_t m, double beta, double delta);

// clamp(1 - (tau kl_sum + log 2)/log(n/m), 0, 1).
double fano_rhs(std::size_t n, std::size_t m, double tau, double kl_sum);

enum class NaturalFamilyKind { GaussianUnitVariance, Bernoulli };

/// One-parameter natural exponential family with parameter space
/// [lo, hi] (the whole real line by default).
struct NaturalFamily {
  NaturalFamilyKind kind{NaturalFamilyKind::GaussianUnitVariance};
  double lo{-std::numeric_limits<double>::infinity()};
  double hi{std::numeric_limits<double>::infinity()};

  bool contains(double theta) const { return std::isfinite(theta) && theta >= lo && theta <= hi; }
  double log_partition(double theta) const;  // A(theta)
  double mean(double theta) const;           // A'(theta)
  // KL between the laws at theta and theta2.
  double kl(double theta, double theta2) const;
};

// kl(theta1, thetaj) + kl(2 theta1 - thetaj, thetaj).
double tilted_kl_sum(const NaturalFamily& fam, double theta1, double thetaj);

struct BigMainBound {
  double threshold{0.0};
  double probability{0.0};
  double delta_eff2{0.0};
  double kappa_star{0.0};
};

// thetas[0] must be the strictly largest parameter. With `m`, uses the
// (m-1)-th smallest tilted kl sum and log(m/alpha).
BigMainBound big_main_bound(std::span<const double> thetas, double alpha, double delta,
                            const NaturalFamily& fam = {}, std::optional<std::size_t> m = std::nullopt,
                            double grid_step = kDefaultGridStep);

// min{1 - exp(-beta)/2, sqrt(beta/2)}.
double q_of_beta(double beta);

}  // namespace mablab
