#include "mablab/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mablab {

namespace {

void check_args(std::uint64_t t, double delta) {
  if (t < 1) throw std::invalid_argument("confidence radius needs t >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence radius needs delta in (0,1)");
}

}  // namespace

void ConfidenceSchedule::validate() const {
  if (!(sigma2 > 0.0) || !(lil_constant > 0.0) || !(lil_log_inflation > 0.0))
    throw std::invalid_argument("confidence schedule constants must be strictly positive");
}

double u_bound(const ConfidenceSchedule& sched, std::uint64_t t, double delta) {
  check_args(t, delta);
  const double tt = static_cast<double>(t);
  const double iterated = std::log1p(std::log2(std::max(tt, 2.0)));
  const double width = std::log(1.0 / delta) + sched.lil_log_inflation * iterated;
  return std::sqrt(sched.lil_constant * sched.sigma2 / tt * width);
}

double fixed_bound(const ConfidenceSchedule& sched, std::uint64_t t, double delta) {
  check_args(t, delta);
  return std::sqrt(2.0 * sched.sigma2 * std::log(1.0 / delta) / static_cast<double>(t));
}

RadiusTable::RadiusTable(const ConfidenceSchedule& sched, double delta) : sched_(sched), delta_(delta) {
  sched_.validate();
  u_bound(sched_, 1, delta_);  // argument check
}

double RadiusTable::operator()(std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("confidence radius needs t >= 1");
  if (t > cache_.size()) {
    const std::size_t old = cache_.size();
    cache_.resize(std::max<std::size_t>(t, old * 2));
    for (std::size_t i = old; i < cache_.size(); ++i) cache_[i] = u_bound(sched_, i + 1, delta_);
  }
  return cache_[t - 1];
}

}  // namespace mablab
