#include "mablab/simulator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mablab {

namespace {

bool constant_kernel(const TiltingKernel& k) { return k.tau == 0 || k.gap() == 0.0; }

void require_gaussian(const TiltingKernel& k, const char* what) {
  if (k.family.kind != NaturalFamilyKind::GaussianUnitVariance)
    throw std::invalid_argument(std::string(what) + " is only available for the unit-variance gaussian family");
}

double upper_normal_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// log of phi_j(x) / q(x) with phi_j = N(thetaj, 1/tau), q = N(theta1, 2/tau).
double log_likelihood_ratio(const TiltingKernel& k, double x) {
  const double t = static_cast<double>(k.tau);
  const double dj = x - k.thetaj;
  const double d1 = x - k.theta1;
  return -t * dj * dj / 2.0 + t * d1 * d1 / 4.0 + 0.5 * std::log(2.0);
}

double log_weight(const TiltingKernel& k, double x) {
  if (constant_kernel(k)) return -k.log_c;
  const double e = static_cast<double>(k.tau) * k.gap() * x;
  return e <= k.log_c ? e - k.log_c : -std::numeric_limits<double>::infinity();
}

double proposal_draw(const TiltingKernel& k, const RngStream& stream, std::uint64_t i) {
  return k.theta1 + std::sqrt(2.0 / static_cast<double>(k.tau)) * stream.normal(i);
}

}  // namespace

double TiltingKernel::c() const { return std::exp(log_c); }

double TiltingKernel::cap() const {
  if (constant_kernel(*this)) return std::numeric_limits<double>::infinity();
  return log_c / (static_cast<double>(tau) * gap());
}

double TiltingKernel::weight(double x) const { return std::exp(log_weight(*this, x)); }

TiltingKernel tilting_kernel_new(double theta1, double thetaj, std::uint64_t tau, double kappa,
                                 const NaturalFamily& family) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
  if (!(theta1 >= thetaj)) throw std::invalid_argument("tilting needs theta1 >= thetaj");
  const double mirrored = 2.0 * theta1 - thetaj;
  if (!family.contains(thetaj) || !family.contains(theta1) || !family.contains(mirrored))
    throw DomainError("natural parameters violate [theta_j, 2 theta_1 - theta_j] in the parameter space");
  TiltingKernel k{theta1, thetaj, tau, kappa, 0.0, family};
  k.log_c = std::log(1.0 / kappa) +
            static_cast<double>(tau) * (family.log_partition(mirrored) - family.log_partition(theta1));
  if (constant_kernel(k)) k.log_c = std::log(1.0 / kappa);
  return k;
}

MeasuredDraw sample_measuring_event(const TiltingKernel& k, const RngStream& stream, std::uint64_t draw) {
  if (k.tau == 0) throw std::invalid_argument("sampling needs tau >= 1");
  const double t = static_cast<double>(k.tau);
  MeasuredDraw out;
  double xi = 0.0;
  if (k.family.kind == NaturalFamilyKind::GaussianUnitVariance) {
    out.x_bar = k.thetaj + stream.normal(2 * draw) / std::sqrt(t);
    xi = stream.uniform(2 * draw + 1);
  } else {
    const double p = k.family.mean(k.thetaj);
    const std::uint64_t base = draw * (k.tau + 1);
    std::uint64_t ones = 0;
    for (std::uint64_t s = 1; s <= k.tau; ++s) ones += stream.uniform(base + s) < p ? 1 : 0;
    out.x_bar = static_cast<double>(ones) / t;
    xi = stream.uniform(base);
  }
  out.event = xi <= k.weight(out.x_bar);
  return out;
}

double analytic_event_probability(const TiltingKernel& k) {
  require_gaussian(k, "analytic_event_probability");
  if (constant_kernel(k)) return k.kappa;
  const double t = static_cast<double>(k.tau);
  const double shift = t * (k.family.log_partition(k.theta1) - k.family.log_partition(k.thetaj));
  return std::exp(shift - k.log_c) * (1.0 - analytic_tv(k));
}

double analytic_tv(const TiltingKernel& k) {
  require_gaussian(k, "analytic_tv");
  if (constant_kernel(k)) return 0.0;
  return upper_normal_tail((k.cap() - k.theta1) * std::sqrt(static_cast<double>(k.tau)));
}

double balance_lower_bound(const TiltingKernel& k) {
  const double klsum = tilted_kl_sum(k.family, k.theta1, k.thetaj);
  return k.kappa * (1.0 - k.kappa) * std::exp(-static_cast<double>(k.tau) * klsum);
}

Estimate plain_event_probability(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws) {
  if (draws == 0) throw std::invalid_argument("need at least one draw");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < draws; ++i) hits += sample_measuring_event(k, stream, i).event ? 1 : 0;
  const double n = static_cast<double>(draws);
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Estimate importance_event_probability(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws) {
  require_gaussian(k, "importance_event_probability");
  if (k.tau == 0) throw std::invalid_argument("sampling needs tau >= 1");
  if (draws < 2) throw std::invalid_argument("need at least two draws");
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double x = proposal_draw(k, stream, i);
    const double y = std::exp(log_likelihood_ratio(k, x) + log_weight(k, x));
    sum += y;
    sum2 += y * y;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

BinnedTv binned_tv(const TiltingKernel& k, const RngStream& stream, std::uint64_t draws) {
  require_gaussian(k, "binned_tv");
  if (k.tau == 0) throw std::invalid_argument("sampling needs tau >= 1");
  if (draws == 0) throw std::invalid_argument("need at least one draw");
  const double sd = 1.0 / std::sqrt(static_cast<double>(k.tau));
  const double width = 0.02 * sd;
  const double lo = k.theta1 - 8.0 * sd;
  const std::size_t interior = 800;
  const std::size_t bins = interior + 2;  // [0] below, [bins-1] above
  auto bin_of = [&](double x) -> std::size_t {
    const double pos = std::floor((x - lo) / width);
    if (pos < 0.0) return 0;
    if (pos >= static_cast<double>(interior)) return bins - 1;
    return static_cast<std::size_t>(pos) + 1;
  };

  std::vector<double> ref(bins, 0.0);
  const RngStream ref_stream =
      stream.with({StreamPurpose::Reference, stream.id().tag, stream.id().trial, stream.id().arm});
  for (std::uint64_t i = 0; i < draws; ++i) ref[bin_of(k.theta1 + sd * ref_stream.normal(i))] += 1.0;

  std::vector<double> wsum(bins, 0.0);
  std::vector<double> wsum2(bins, 0.0);
  double total = 0.0;
  double total2 = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double x = proposal_draw(k, stream, i);
    const double y = std::exp(log_likelihood_ratio(k, x) + log_weight(k, x));
    const std::size_t b = bin_of(x);
    wsum[b] += y;
    wsum2[b] += y * y;
    total += y;
    total2 += y * y;
  }
  if (!(total > 0.0)) throw std::runtime_error("binned_tv: all importance weights vanished");

  const double n = static_cast<double>(draws);
  double tv = 0.0;
  double var_sum = 0.0;
  double noise_floor = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double p = ref[b] / n;
    const double q = wsum[b] / total;
    // delta-method variance of the self-normalized bin mass
    const double var_q = (wsum2[b] * (1.0 - q) * (1.0 - q) + (total2 - wsum2[b]) * q * q) / (total * total);
    const double var = p * (1.0 - p) / n + var_q;
    tv += std::abs(p - q);
    var_sum += var;
    noise_floor += std::sqrt(2.0 / std::numbers::pi * var);
  }

  // The two densities cross only at the cap, so only that bin can lose mass
  // to cancellation.
  double discretization = 0.0;
  const double cap = k.cap();
  if (std::isfinite(cap)) {
    const std::size_t b = bin_of(cap);
    discretization = std::min(ref[b] / n, wsum[b] / total);
  }
  return {0.5 * tv, 0.5 * std::sqrt(var_sum), 0.5 * noise_floor + discretization};
}

TiltingReport verify_balance(double theta1, double thetaj, std::uint64_t tau, double kappa,
                             std::uint64_t mc_samples, const RngStream& stream) {
  const auto k = tilting_kernel_new(theta1, thetaj, tau, kappa);
  TiltingReport r;
  r.kappa = kappa;
  r.mc_samples = mc_samples;
  r.p_event_analytic = analytic_event_probability(k);
  r.p_event_lower_bound = balance_lower_bound(k);
  r.tv_analytic = analytic_tv(k);
  r.event_above_lower_bound = r.p_event_analytic >= r.p_event_lower_bound;
  r.tv_below_kappa = r.tv_analytic <= kappa;
  if (mc_samples > 0 && tau > 0) {
    const auto ev = importance_event_probability(k, stream, mc_samples);
    r.p_event_mc = ev.value;
    r.p_event_mc_stderr = ev.std_error;
    r.event_matches_mc = std::abs(ev.value - r.p_event_analytic) <= 3.0 * ev.std_error;
    const auto tv = binned_tv(k, stream, mc_samples);
    r.tv_mc = tv.value;
    r.tv_mc_stderr = tv.std_error;
    r.tv_binning_error = tv.binning_error;
    r.tv_matches_mc = std::abs(tv.value - r.tv_analytic) <= tv.binning_error + 3.0 * tv.std_error;
  }
  return r;
}

RunRecord run_on_transcript(const Runner& algorithm, const Instance& inst, const SampleSource& source) {
  if (source.num_arms() != inst.n()) throw std::invalid_argument("source and instance disagree on n");
  return algorithm(inst, source);
}

LeCamResult lecam_check(const Instance& inst, std::size_t b, double eta, double delta, const Runner& algorithm,
                        std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("lecam_check needs trials >= 1");
  const auto tail = permutation_tail_bound(inst, b, eta, delta);
  const std::size_t a_star = inst.best_arm();
  const Instance swapped = apply_permutation(inst, Permutation::transposition(inst.n(), a_star, b));

  std::size_t hits_nu = 0;
  std::size_t hits_swap = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const Transcript tr(inst, seed, i, 1);
    const auto rec = symmetrize(algorithm, inst, tr, RngStream(seed, {StreamPurpose::Symmetrize, 1, i, 0}));
    hits_nu += static_cast<double>(rec.pulls[b]) > tail.threshold ? 1 : 0;

    const Transcript tr_swap(swapped, seed, i, 2);
    const auto rec_swap =
        symmetrize(algorithm, swapped, tr_swap, RngStream(seed, {StreamPurpose::Symmetrize, 2, i, 0}));
    hits_swap += static_cast<double>(rec_swap.pulls[a_star]) > tail.threshold ? 1 : 0;
  }

  const double t = static_cast<double>(trials);
  LeCamResult r;
  r.trials = trials;
  r.tau = tail.threshold;
  r.rhs = eta - delta;
  r.rate_nu = static_cast<double>(hits_nu) / t;
  r.rate_swap = static_cast<double>(hits_swap) / t;
  r.lhs = 0.5 * (r.rate_nu + r.rate_swap);
  r.std_error = 0.5 * std::sqrt(r.rate_nu * (1.0 - r.rate_nu) / t + r.rate_swap * (1.0 - r.rate_swap) / t);
  return r;
}

FanoResult fano_event_check(const Instance& inst, std::size_t m, double beta, double delta, const Runner& algorithm,
                            std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("fano_event_check needs trials >= 1");
  gap_profile(inst, GapKind::BestArm);
  const std::size_t best = inst.best_arm();
  const std::size_t other = best == 0 ? 1 : 0;
  for (std::size_t a = 0; a < inst.n(); ++a) {
    if (a != best && !(inst.arm(a) == inst.arm(other)))
      throw std::invalid_argument("fano_event_check needs a two-valued instance");
  }
  const double klsum = kl_divergence(inst.arm(best), inst.arm(other)) + kl_divergence(inst.arm(other), inst.arm(best));
  const auto sub = best_arm_subset_bound(inst.n(), klsum, m, beta, delta);

  std::size_t hits = 0;
  std::size_t top_hits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto pi = Permutation::uniform(inst.n(), RngStream(seed, {StreamPurpose::Permutation, 0, i, 0}));
    const Instance permuted = apply_permutation(inst, pi);
    const Transcript tr(permuted, seed, i, 3);
    const auto rec = algorithm(permuted, tr);
    const std::size_t top = pi(best);
    std::size_t in_s = 0;
    for (auto c : rec.pulls) in_s += static_cast<double>(c) > sub.threshold ? 1 : 0;
    const bool top_in = static_cast<double>(rec.pulls[top]) > sub.threshold;
    hits += top_in && in_s >= m ? 1 : 0;
    top_hits += static_cast<double>(rec.pulls[top]) > sub.top_threshold ? 1 : 0;
  }

  const double t = static_cast<double>(trials);
  FanoResult r;
  r.trials = trials;
  r.threshold = sub.threshold;
  r.floor = sub.probability;
  r.top_threshold = sub.top_threshold;
  r.top_floor = sub.top_probability;
  r.rate = static_cast<double>(hits) / t;
  r.std_error = std::sqrt(r.rate * (1.0 - r.rate) / t);
  r.top_rate = static_cast<double>(top_hits) / t;
  r.top_stderr = std::sqrt(r.top_rate * (1.0 - r.top_rate) / t);
  return r;
}

}  // namespace mablab
