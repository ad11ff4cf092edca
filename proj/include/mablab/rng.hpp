#pragma once

#include <array>
#include <cstdint>

namespace mablab {

// What a stream is used for. Part of the stream identity, so two purposes
// never share random numbers even with equal trial and arm indices.
enum class StreamPurpose : std::uint16_t {
  Transcript = 1,
  SwapTail = 2,
  Symmetrize = 3,
  Permutation = 4,
  Tilting = 5,
  Reference = 6,
  Test = 7,
};

struct StreamId {
  StreamPurpose purpose{StreamPurpose::Transcript};
  std::uint16_t tag{0};  // free sub-label, e.g. the algorithm id
  std::uint64_t trial{0};
  std::uint32_t arm{0};

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. Every value is a pure function of
/// (master_seed, id, index): coordinates can be read in any order and
/// re-reading one reproduces it bit-exactly.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, StreamId id);

  std::uint64_t master_seed() const { return seed_; }
  const StreamId& id() const { return id_; }

  // Same seed, different id.
  RngStream with(StreamId id) const { return RngStream(seed_, id); }
  RngStream with_arm(std::uint32_t arm) const;

  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index) const;
  // Standard normal via Box-Muller on one block.
  double normal(std::uint64_t index) const;

 private:
  std::uint64_t seed_{0};
  StreamId id_{};
  std::array<std::uint32_t, 2> key_{};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mablab
