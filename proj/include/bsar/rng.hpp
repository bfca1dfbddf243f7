#pragma once

#include <array>
#include <cstdint>

namespace bsar {

// Philox4x32-10 block function (counter-based generator of Salmon et al.).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Keyed random stream. Cheap to copy; copies replay the same sequence from
// their current position. All draws are derived from uniforms by inversion,
// so the sequence is identical across platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t key);

  std::uint64_t next_u64();
  double uniform();      // strictly inside (0,1)
  double normal();       // standard normal via AS 241 inversion
  double exponential();  // rate 1
  double gamma(double shape);  // Marsaglia-Tsang, shape >= 1
  double chi_square(double dof);

  std::uint64_t key() const { return key64_; }

 private:
  void refill();

  std::uint64_t key64_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

// Independent, reproducible stream per (master_seed, cell, replication).
// `substream` separates consumers inside one replication (data generation
// vs. the samplers) without coordination.
Stream replication_stream(std::uint64_t master_seed, std::uint32_t cell_id,
                          std::uint32_t replication_index, std::uint32_t substream = 0);

}  // namespace bsar
