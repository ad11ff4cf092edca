#pragma once

#include <cstdint>
#include <vector>

namespace mablab {

struct ConfidenceSchedule {
  double sigma2{1.0};             // sub-Gaussian variance proxy
  double lil_constant{2.0};
  double lil_log_inflation{2.0};

  // Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
};

// Anytime radius
//   sqrt((lil_constant*sigma2/t) * (log(1/delta) + lil_log_inflation*log(1 + log2(max(t,2))))).
double u_bound(const ConfidenceSchedule& sched, std::uint64_t t, double delta);

// Fixed-time sub-Gaussian radius sqrt(2*sigma2*log(1/delta)/t).
double fixed_bound(const ConfidenceSchedule& sched, std::uint64_t t, double delta);

// Memoized u_bound(sched, t, delta) for one (sched, delta) pair. Values are
// produced by u_bound itself, so lookups are bit-identical to direct calls.
class RadiusTable {
 public:
  RadiusTable(const ConfidenceSchedule& sched, double delta);

  double operator()(std::uint64_t t);
  double delta() const { return delta_; }

 private:
  ConfidenceSchedule sched_;
  double delta_;
  std::vector<double> cache_;  // cache_[t-1]
};

}  // namespace mablab
