#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace paradigms {

/// Philox4x32-10 block cipher used as a counter-based generator.
///
/// Every draw is a pure function of (key, counter), so a value keyed by
/// (seed, step) is the same no matter which thread asks for it or when.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter counter) const;

  const Key& key() const { return key_; }

 private:
  Key key_;
};

/// Independent substreams sharing one seed.
enum class Stream : std::uint32_t {
  kStepNoise = 0,
  kPrior = 1,
  kData = 2,
  kPermutation = 3,
};

/// Uniform double in the open interval (0, 1) at position `index` of the
/// (seed, stream, step) sequence.
double uniform_at(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index);

/// Fills `out` with standard normal variates for (seed, stream, step) via
/// Box-Muller on Philox output; out[i] depends only on (seed, stream, step, i).
void fill_standard_normal(std::uint64_t seed, Stream stream, std::uint64_t step,
                          std::span<double> out);

}  // namespace paradigms
