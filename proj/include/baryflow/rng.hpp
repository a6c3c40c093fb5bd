#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace baryflow {

// xoshiro256++ with splitmix64 seeding. Self-contained so streams are
// bit-reproducible across platforms and standard library versions
// (std::mt19937 would be fine, but std::normal_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_double();  // uniform on [0, 1), 53-bit
  double next_open();    // uniform on (0, 1]
  double normal();       // standard normal via Box-Muller, pair cached
  int next_int(int bound);  // uniform on [0, bound)

  // Deterministic child stream keyed by a label, e.g. "dataset/train"
  // or "layer/3/frame". Children with distinct labels are independent.
  Rng substream(std::string_view label) const;

  std::vector<int> sample_without_replacement(int n, int count);

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace baryflow
