#include "mablab/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mablab {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

void require_gaussian(const Instance& inst, const char* what) {
  for (const auto& a : inst.arms()) {
    if (a.kind() != ArmKind::Gaussian || a.variance() != 1.0)
      throw std::invalid_argument(std::string(what) + " needs unit-variance gaussian arms");
  }
}

}  // namespace

double symmetric_kl_inverse(const Instance& inst, std::size_t b) {
  const std::size_t best = inst.best_arm();
  if (b == best) throw std::invalid_argument("tau_b is undefined for the best arm");
  const double s = kl_divergence(inst.arm(best), inst.arm(b)) + kl_divergence(inst.arm(b), inst.arm(best));
  if (!(s > 0.0)) throw DegenerateInstanceError("arm has the same distribution as the best arm");
  return 1.0 / s;
}

TailBound permutation_tail_bound(const Instance& inst, std::size_t b, double eta, double delta) {
  check_delta(delta);
  if (!(eta > delta && eta <= 0.25)) throw std::invalid_argument("eta must lie in (delta, 1/4]");
  if (b >= inst.n()) throw std::invalid_argument("arm out of range");
  gap_profile(inst, GapKind::BestArm);  // unique best arm
  return {symmetric_kl_inverse(inst, b) * std::log(1.0 / (4.0 * eta)), std::max(eta - delta, 0.0)};
}

PermutationTotal permutation_total_bound(const Instance& inst, double delta, double grid_step) {
  check_delta(delta);
  gap_profile(inst, GapKind::BestArm);
  PermutationTotal out;
  const std::size_t best = inst.best_arm();
  for (std::size_t b = 0; b < inst.n(); ++b)
    if (b != best) out.sum_tau += symmetric_kl_inverse(inst, b);
  if (delta >= 0.25) {
    out.vacuous = true;
    return out;
  }
  const auto g = grid_maximize([&](double eta) { return (eta - delta) * std::log(1.0 / (4.0 * eta)); }, delta,
                               0.25, grid_step);
  out.eta_star = g.argmax;
  out.value = std::max(g.value, 0.0) * out.sum_tau;
  return out;
}

double combined_bound(const Instance& inst, double delta) {
  check_delta(delta);
  require_gaussian(inst, "combined_bound");
  const auto g = gap_profile(inst, GapKind::BestArm);
  const std::size_t best = inst.best_arm();
  double max_term = 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < inst.n(); ++b) {
    if (b == best) continue;
    const double inv = 1.0 / (g.gaps[b] * g.gaps[b]);
    max_term = std::max(max_term, inv * std::log(1.0 / delta));
    sum += inv;
  }
  return std::max(max_term, sum);
}

GaussianMabBound gaussian_mab_per_arm_bound(const Instance& inst, double delta) {
  check_delta(delta);
  require_gaussian(inst, "gaussian_mab_per_arm_bound");
  const auto g = gap_profile(inst, GapKind::BestArm);
  GaussianMabBound out;
  out.in_regime = delta <= 1.0 / 16.0;
  for (std::size_t pos = 1; pos < inst.n(); ++pos) {
    const double gap = g.sorted_means[0] - g.sorted_means[pos];
    const double m = static_cast<double>(pos + 1);
    const double v = std::log(m / delta) / (gap * gap);
    if (v > out.value) {
      out.value = v;
      out.argmax_m = pos + 1;
    }
  }
  return out;
}

LowerBoundReport topk_per_arm_bounds(const Instance& inst, double delta) {
  check_delta(delta);
  require_gaussian(inst, "topk_per_arm_bounds");
  gap_profile(inst, GapKind::TopK);
  const auto order = inst.ranking();
  std::vector<double> mu;
  for (std::size_t a : order) mu.push_back(inst.arm(a).mean());
  const std::size_t n = inst.n();
  const std::size_t k = inst.k();

  LowerBoundReport rep;
  rep.params.delta = delta;
  for (std::size_t j = 0; j < n; ++j) {  // 0-based sorted position; 1-based rank is j + 1
    double best = 0.0;
    if (j < k) {
      for (std::size_t m = k; m < n; ++m) {
        const double gap = mu[j] - mu[m];
        best = std::max(best, std::log(static_cast<double>(m + 1 - k + 1) / delta) / (gap * gap));
      }
    } else {
      for (std::size_t m = 0; m < k; ++m) {
        const double gap = mu[j] - mu[m];
        best = std::max(best, std::log(static_cast<double>(k + 2 - (m + 1)) / delta) / (gap * gap));
      }
    }
    rep.per_arm[order[j]] = best;
    rep.total += best;
  }
  return rep;
}

SubsetBound best_arm_subset_bound(std::size_t n, double kl_sum, std::size_t m, double beta, double delta) {
  if (m < 1 || m >= n) throw std::invalid_argument("subset bound needs 1 <= m < n");
  if (!(kl_sum > 0.0)) throw std::invalid_argument("subset bound needs a positive kl sum");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0,1)");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  SubsetBound out;
  out.threshold = std::max(0.0, (beta * std::log(nd / md) - std::log(2.0)) / kl_sum);
  out.probability = std::max(0.0, 1.0 - 2.0 * beta - delta);
  out.top_threshold = std::max(0.0, (beta * std::log(nd) - std::log(2.0)) / kl_sum);
  out.top_probability = std::max(0.0, 1.0 - (beta + delta));
  return out;
}

double fano_rhs(std::size_t n, std::size_t m, double tau, double kl_sum) {
  if (m < 1 || m >= n) throw std::invalid_argument("fano_rhs needs 1 <= m < n");
  if (!(tau >= 0.0) || !(kl_sum >= 0.0)) throw std::invalid_argument("fano_rhs needs tau, kl_sum >= 0");
  const double v = 1.0 - (tau * kl_sum + std::log(2.0)) / std::log(static_cast<double>(n) / static_cast<double>(m));
  return std::clamp(v, 0.0, 1.0);
}

double NaturalFamily::log_partition(double theta) const {
  if (kind == NaturalFamilyKind::GaussianUnitVariance) return theta * theta / 2.0;
  // log(1 + e^theta) without overflow
  return theta > 0.0 ? theta + std::log1p(std::exp(-theta)) : std::log1p(std::exp(theta));
}

double NaturalFamily::mean(double theta) const {
  if (kind == NaturalFamilyKind::GaussianUnitVariance) return theta;
  return 1.0 / (1.0 + std::exp(-theta));
}

double NaturalFamily::kl(double theta, double theta2) const {
  return (theta - theta2) * mean(theta) - log_partition(theta) + log_partition(theta2);
}

double tilted_kl_sum(const NaturalFamily& fam, double theta1, double thetaj) {
  const double mirrored = 2.0 * theta1 - thetaj;
  if (!fam.contains(thetaj) || !fam.contains(theta1) || !fam.contains(mirrored))
    throw DomainError("natural parameters violate [theta_j, 2 theta_1 - theta_j] in the parameter space");
  return fam.kl(theta1, thetaj) + fam.kl(mirrored, thetaj);
}

BigMainBound big_main_bound(std::span<const double> thetas, double alpha, double delta, const NaturalFamily& fam,
                            std::optional<std::size_t> m, double grid_step) {
  if (thetas.size() < 2) throw std::invalid_argument("big_main_bound needs at least two arms");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0,1)");
  const double theta1 = thetas[0];
  std::vector<double> sums;
  for (std::size_t j = 1; j < thetas.size(); ++j) {
    if (!(thetas[j] < theta1)) throw std::invalid_argument("theta_1 must be strictly largest");
    sums.push_back(tilted_kl_sum(fam, theta1, thetas[j]));
  }
  std::sort(sums.begin(), sums.end());

  BigMainBound out;
  double log_count = std::log(static_cast<double>(thetas.size()) / alpha);
  if (m) {
    if (*m < 2 || *m > thetas.size()) throw std::invalid_argument("m must lie in [2, n]");
    out.delta_eff2 = sums[*m - 2];
    log_count = std::log(static_cast<double>(*m) / alpha);
  } else {
    out.delta_eff2 = sums.back();
  }
  out.threshold = std::max(0.0, log_count / out.delta_eff2);
  const auto g = grid_maximize(
      [&](double kappa) { return 0.5 * (1.0 - std::exp(-alpha * kappa * (1.0 - kappa))) * (1.0 - 2.0 * kappa); },
      0.0, 1.0, grid_step);
  out.kappa_star = g.argmax;
  out.probability = std::max(0.0, g.value - delta);
  return out;
}

double q_of_beta(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("q_of_beta needs beta >= 0");
  return std::min(1.0 - 0.5 * std::exp(-beta), std::sqrt(beta / 2.0));
}

}  // namespace mablab
