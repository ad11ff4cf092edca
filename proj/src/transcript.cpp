#include "mablab/transcript.hpp"

#include <stdexcept>

namespace mablab {

Transcript::Transcript(Instance instance, std::uint64_t seed, std::uint64_t trial, std::uint16_t tag)
    : instance_(std::move(instance)),
      stream_(seed, StreamId{StreamPurpose::Transcript, tag, trial, 0}) {}

double Transcript::sample(std::size_t arm, std::uint64_t s) const {
  return draw_sample(instance_.arm(arm), stream_.with_arm(static_cast<std::uint32_t>(arm)), s);
}

double transcript_read(const SampleSource& tr, std::size_t arm, std::uint64_t s) {
  if (s < 1) throw std::invalid_argument("transcript index s must be >= 1");
  if (arm >= tr.num_arms()) throw std::invalid_argument("transcript arm out of range");
  return tr.sample(arm, s);
}

SwapSimulator::SwapSimulator(const Transcript& base, std::size_t a_star, std::size_t b,
                             std::uint64_t tau, RngStream tail)
    : base_(&base), a_star_(a_star), b_(b), tau_(tau), tail_(tail) {
  if (a_star >= base.num_arms() || b >= base.num_arms() || a_star == b)
    throw std::invalid_argument("swap simulator needs two distinct valid arms");
}

double SwapSimulator::sample(std::size_t arm, std::uint64_t s) const {
  if ((arm != a_star_ && arm != b_) || s <= tau_) return base_->sample(arm, s);
  return draw_sample(base_->instance().arm(a_star_), tail_.with_arm(static_cast<std::uint32_t>(arm)), s);
}

RelabeledSource::RelabeledSource(const SampleSource& base, const Permutation& sigma)
    : base_(&base), inverse_(sigma.inverse().mapping()) {
  if (sigma.size() != base.num_arms()) throw std::invalid_argument("relabeling size mismatch");
}

}  // namespace mablab
