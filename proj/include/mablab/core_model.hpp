#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mablab/rng.hpp"

namespace mablab {

// Tied boundary means or a non-unique best arm.
class DegenerateInstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent configuration (e.g. staged means that disagree with the instance).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ArmKind { Gaussian, Bernoulli };

const char* to_string(ArmKind kind);

class ArmDistribution {
 public:
  static ArmDistribution gaussian(double mean, double variance = 1.0);
  static ArmDistribution bernoulli(double p);

  ArmKind kind() const { return kind_; }
  double mean() const { return mean_; }
  // Gaussian variance, or p(1-p) for Bernoulli.
  double variance() const;
  double p() const;

  friend bool operator==(const ArmDistribution&, const ArmDistribution&) = default;

 private:
  ArmDistribution(ArmKind kind, double mean, double variance)
      : kind_(kind), mean_(mean), variance_(variance) {}

  ArmKind kind_{ArmKind::Gaussian};
  double mean_{0.0};
  double variance_{1.0};  // unused for Bernoulli
};

/// Ordered arm distributions plus the target set size k. Construction
/// enforces n >= 2, 1 <= k < n and a unique top-k set.
class Instance {
 public:
  Instance(std::vector<ArmDistribution> arms, std::size_t k);

  static Instance gaussian(std::span<const double> means, std::size_t k, double variance = 1.0);
  // Skips the unique-top-k check. For symmetry experiments on tied arms;
  // correctness of a run is then judged against the lowest-index top set.
  static Instance with_ties(std::vector<ArmDistribution> arms, std::size_t k);

  bool ties_allowed() const { return ties_allowed_; }

  std::size_t n() const { return arms_.size(); }
  std::size_t k() const { return k_; }
  const ArmDistribution& arm(std::size_t a) const { return arms_[a]; }
  const std::vector<ArmDistribution>& arms() const { return arms_; }
  std::vector<double> means() const;

  // Arm indices sorted by decreasing mean, ties broken by lowest index.
  std::vector<std::size_t> ranking() const;
  // The true top-k set, sorted by index.
  std::vector<std::size_t> top_set() const;
  std::size_t best_arm() const { return ranking().front(); }

  // Same arms with a different k; validated like the constructor.
  Instance with_k(std::size_t k) const;
  Instance with_arms(std::vector<ArmDistribution> arms) const;

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  Instance(std::vector<ArmDistribution> arms, std::size_t k, bool ties_allowed);

  std::vector<ArmDistribution> arms_;
  std::size_t k_;
  bool ties_allowed_{false};
};

enum class GapKind { BestArm, TopK };

struct GapProfile {
  std::vector<double> sorted_means;
  std::vector<double> gaps;  // indexed by original arm id
  GapKind kind{GapKind::TopK};
};

/// Bijection on {0,...,n-1}; mapping[a] is the image of a.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping);

  static Permutation identity(std::size_t n);
  static Permutation transposition(std::size_t n, std::size_t a, std::size_t b);
  // Fisher-Yates driven by `stream`, reading indices 0..n-2.
  static Permutation uniform(std::size_t n, const RngStream& stream);

  std::size_t size() const { return map_.size(); }
  std::size_t operator()(std::size_t a) const { return map_[a]; }
  const std::vector<std::size_t>& mapping() const { return map_; }

  Permutation inverse() const;
  // (this ∘ inner)(a) = this(inner(a)).
  Permutation compose(const Permutation& inner) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

// KL(a || b). Bernoulli with q in {0,1} and p != q gives +infinity.
double kl_divergence(const ArmDistribution& a, const ArmDistribution& b);
double binary_kl(double p, double q);

GapProfile gap_profile(const Instance& inst, GapKind kind);

// The arm at output position pi(a) is the input arm a.
Instance apply_permutation(const Instance& inst, const Permutation& pi);

double draw_sample(const ArmDistribution& arm, const RngStream& rng, std::uint64_t s);

}  // namespace mablab
