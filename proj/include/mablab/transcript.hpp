#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mablab/core_model.hpp"
#include "mablab/rng.hpp"

namespace mablab {

/// Random-access table of samples X[a, s], s >= 1. Algorithms read arm a's
/// samples in order s = 1, 2, ...; implementations must be pure functions of
/// (a, s).
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t num_arms() const = 0;
  virtual double sample(std::size_t arm, std::uint64_t s) const = 0;
};

// Seeded transcript of an instance: X[a, s] = draw_sample(nu_a, stream(arm = a), s).
class Transcript final : public SampleSource {
 public:
  Transcript(Instance instance, std::uint64_t seed, std::uint64_t trial = 0, std::uint16_t tag = 0);

  const Instance& instance() const { return instance_; }
  const RngStream& stream() const { return stream_; }

  std::size_t num_arms() const override { return instance_.n(); }
  double sample(std::size_t arm, std::uint64_t s) const override;

 private:
  Instance instance_;
  RngStream stream_;
};

// Checked read: throws std::invalid_argument for s == 0 or an unknown arm.
double transcript_read(const SampleSource& tr, std::size_t arm, std::uint64_t s);

/// One-arm swap simulator over a base transcript. Arms a_star and b keep
/// their first tau base samples; later samples are fresh draws from
/// nu_{a_star} taken from an independent tail stream. Other arms pass through.
class SwapSimulator final : public SampleSource {
 public:
  SwapSimulator(const Transcript& base, std::size_t a_star, std::size_t b, std::uint64_t tau,
                RngStream tail);

  std::size_t a_star() const { return a_star_; }
  std::size_t b() const { return b_; }
  std::uint64_t tau() const { return tau_; }

  std::size_t num_arms() const override { return base_->num_arms(); }
  double sample(std::size_t arm, std::uint64_t s) const override;

 private:
  const Transcript* base_;
  std::size_t a_star_;
  std::size_t b_;
  std::uint64_t tau_;
  RngStream tail_;
};

// View in which position sigma(a) reads base arm a.
class RelabeledSource final : public SampleSource {
 public:
  RelabeledSource(const SampleSource& base, const Permutation& sigma);

  std::size_t num_arms() const override { return base_->num_arms(); }
  double sample(std::size_t arm, std::uint64_t s) const override {
    return base_->sample(inverse_[arm], s);
  }

 private:
  const SampleSource* base_;
  std::vector<std::size_t> inverse_;
};

// Per-arm read cursor over a source; next(a) returns X[a, N_a + 1].
class ArmReader {
 public:
  explicit ArmReader(const SampleSource& source)
      : source_(&source), cursor_(source.num_arms(), 0) {}

  double next(std::size_t arm) { return source_->sample(arm, ++cursor_[arm]); }
  std::uint64_t consumed(std::size_t arm) const { return cursor_[arm]; }
  std::size_t num_arms() const { return cursor_.size(); }

 private:
  const SampleSource* source_;
  std::vector<std::uint64_t> cursor_;
};

}  // namespace mablab
