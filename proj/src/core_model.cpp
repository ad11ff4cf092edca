#include "mablab/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mablab {

const char* to_string(ArmKind kind) {
  return kind == ArmKind::Gaussian ? "gaussian" : "bernoulli";
}

ArmDistribution ArmDistribution::gaussian(double mean, double variance) {
  if (!std::isfinite(mean)) throw std::invalid_argument("gaussian arm: mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("gaussian arm: variance must be positive");
  return ArmDistribution(ArmKind::Gaussian, mean, variance);
}

ArmDistribution ArmDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli arm: p must lie in [0,1]");
  return ArmDistribution(ArmKind::Bernoulli, p, 0.0);
}

double ArmDistribution::variance() const {
  return kind_ == ArmKind::Gaussian ? variance_ : mean_ * (1.0 - mean_);
}

double ArmDistribution::p() const {
  if (kind_ != ArmKind::Bernoulli) throw std::logic_error("p() on a non-Bernoulli arm");
  return mean_;
}

Instance::Instance(std::vector<ArmDistribution> arms, std::size_t k) : Instance(std::move(arms), k, false) {}

Instance::Instance(std::vector<ArmDistribution> arms, std::size_t k, bool ties_allowed)
    : arms_(std::move(arms)), k_(k), ties_allowed_(ties_allowed) {
  if (arms_.size() < 2) throw std::invalid_argument("instance needs at least 2 arms");
  if (k_ < 1 || k_ >= arms_.size()) throw std::invalid_argument("instance needs 1 <= k < n");
  if (ties_allowed_) return;
  const auto order = ranking();
  if (arms_[order[k_ - 1]].mean() <= arms_[order[k_]].mean())
    throw DegenerateInstanceError("instance has tied means at the top-k boundary");
}

Instance Instance::with_ties(std::vector<ArmDistribution> arms, std::size_t k) {
  return Instance(std::move(arms), k, true);
}

Instance Instance::with_k(std::size_t k) const { return Instance(arms_, k, ties_allowed_); }

Instance Instance::with_arms(std::vector<ArmDistribution> arms) const {
  return Instance(std::move(arms), k_, ties_allowed_);
}

Instance Instance::gaussian(std::span<const double> means, std::size_t k, double variance) {
  std::vector<ArmDistribution> arms;
  arms.reserve(means.size());
  for (double m : means) arms.push_back(ArmDistribution::gaussian(m, variance));
  return Instance(std::move(arms), k);
}

std::vector<double> Instance::means() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& a : arms_) out.push_back(a.mean());
  return out;
}

std::vector<std::size_t> Instance::ranking() const {
  std::vector<std::size_t> idx(arms_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return arms_[a].mean() > arms_[b].mean(); });
  return idx;
}

std::vector<std::size_t> Instance::top_set() const {
  auto r = ranking();
  r.resize(k_);
  std::sort(r.begin(), r.end());
  return r;
}

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) throw std::invalid_argument("permutation mapping is not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

Permutation Permutation::transposition(std::size_t n, std::size_t a, std::size_t b) {
  if (a >= n || b >= n) throw std::invalid_argument("transposition index out of range");
  auto m = identity(n).map_;
  std::swap(m[a], m[b]);
  return Permutation(std::move(m));
}

Permutation Permutation::uniform(std::size_t n, const RngStream& stream) {
  auto m = identity(n).map_;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform(n - i) * static_cast<double>(i));
    std::swap(m[i - 1], m[std::min(j, i - 1)]);
  }
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t a = 0; a < map_.size(); ++a) inv[map_[a]] = a;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& inner) const {
  if (inner.size() != size()) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::size_t> m(map_.size());
  for (std::size_t a = 0; a < m.size(); ++a) m[a] = map_[inner.map_[a]];
  return Permutation(std::move(m));
}

double kl_divergence(const ArmDistribution& a, const ArmDistribution& b) {
  if (a.kind() != b.kind()) throw std::invalid_argument("kl_divergence: arm kinds differ");
  if (a.kind() == ArmKind::Gaussian) {
    if (a.variance() != b.variance()) throw std::invalid_argument("kl_divergence: gaussian variances differ");
    const double d = a.mean() - b.mean();
    return d * d / (2.0 * a.variance());
  }
  const double p = a.p();
  const double q = b.p();
  if (p == q) return 0.0;
  auto term = [](double x, double y) {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return x * std::log(x / y);
  };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

double binary_kl(double p, double q) {
  if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0))
    throw std::invalid_argument("binary_kl: arguments must lie in (0,1)");
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

GapProfile gap_profile(const Instance& inst, GapKind kind) {
  const auto order = inst.ranking();
  GapProfile g;
  g.kind = kind;
  g.sorted_means.reserve(inst.n());
  for (std::size_t r : order) g.sorted_means.push_back(inst.arm(r).mean());
  g.gaps.assign(inst.n(), 0.0);

  const std::size_t boundary = kind == GapKind::BestArm ? 1 : inst.k();
  const double above = g.sorted_means[boundary - 1];
  const double below = g.sorted_means[boundary];
  if (above <= below) throw DegenerateInstanceError("gap_profile: tied boundary means");

  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const double mu = g.sorted_means[pos];
    g.gaps[order[pos]] = pos < boundary ? mu - below : above - mu;
  }
  return g;
}

Instance apply_permutation(const Instance& inst, const Permutation& pi) {
  if (pi.size() != inst.n()) throw std::invalid_argument("apply_permutation: size mismatch");
  std::vector<ArmDistribution> arms(inst.arms());
  for (std::size_t a = 0; a < inst.n(); ++a) arms[pi(a)] = inst.arm(a);
  return inst.with_arms(std::move(arms));
}

double draw_sample(const ArmDistribution& arm, const RngStream& rng, std::uint64_t s) {
  if (arm.kind() == ArmKind::Gaussian) return arm.mean() + std::sqrt(arm.variance()) * rng.normal(s);
  return rng.uniform(s) < arm.p() ? 1.0 : 0.0;
}

}  // namespace mablab
