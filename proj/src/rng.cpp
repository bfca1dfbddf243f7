#include "bsar/rng.hpp"

#include <cmath>

#include "bsar/normal.hpp"

namespace bsar {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr,
                       const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    round_once(ctr, key);
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

Stream::Stream(std::uint64_t key)
    : key64_(key), key_{std::uint32_t(key), std::uint32_t(key >> 32)} {}

void Stream::refill() {
  buf_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), 0u, 0u}, key_);
  ++block_;
  pos_ = 0;
}

std::uint64_t Stream::next_u64() {
  if (pos_ > 2) refill();
  const std::uint64_t lo = buf_[pos_], hi = buf_[pos_ + 1];
  pos_ += 2;
  return lo | (hi << 32);
}

double Stream::uniform() {
  // 53 random bits, offset into the open interval
  return double(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double Stream::normal() { return norm_quantile(uniform()); }

double Stream::exponential() { return -std::log(uniform()); }

double Stream::gamma(double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Stream::chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

Stream replication_stream(std::uint64_t master_seed, std::uint32_t cell_id,
                          std::uint32_t replication_index, std::uint32_t substream) {
  std::uint64_t h = master_seed;
  h = mix64(h + 0x9E3779B97F4A7C15ull * (std::uint64_t(cell_id) + 1));
  h = mix64(h + 0x9E3779B97F4A7C15ull * (std::uint64_t(replication_index) + 1));
  h = mix64(h + 0x9E3779B97F4A7C15ull * (std::uint64_t(substream) + 1));
  return Stream(h);
}

}  // namespace bsar
