#include "paradigms/random.hpp"

#include <cmath>
#include <numbers>

namespace paradigms {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
constexpr int kRounds = 10;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

// 53-bit uniform in (0,1); the half-ulp offset keeps log() finite.
inline double to_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

Philox4x32::Counter block(std::uint64_t seed, Stream stream, std::uint64_t step,
                          std::uint64_t block_index) {
  const Philox4x32 gen(seed);
  // block_index is a within-vector position; 32 bits are plenty.
  return gen({static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(step),
              static_cast<std::uint32_t>(step >> 32), static_cast<std::uint32_t>(stream)});
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const {
  Key key = key_;
  for (int round = 0; round < kRounds; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, ctr[0], lo0, hi0);
    mulhilo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double uniform_at(std::uint64_t seed, Stream stream, std::uint64_t step, std::uint64_t index) {
  const auto words = block(seed, stream, step, index / 2);
  return index % 2 == 0 ? to_unit(words[0], words[1]) : to_unit(words[2], words[3]);
}

void fill_standard_normal(std::uint64_t seed, Stream stream, std::uint64_t step,
                          std::span<double> out) {
  for (std::size_t pair = 0; 2 * pair < out.size(); ++pair) {
    const auto words = block(seed, stream, step, pair);
    const double u1 = to_unit(words[0], words[1]);
    const double u2 = to_unit(words[2], words[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * pair] = radius * std::cos(angle);
    if (2 * pair + 1 < out.size()) out[2 * pair + 1] = radius * std::sin(angle);
  }
}

}  // namespace paradigms
