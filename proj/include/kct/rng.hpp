#pragma once

#include <cstdint>
#include <random>

namespace kct {

// The project's single pseudo-random source: std::mt19937_64, whose output
// sequence is fixed by the C++ standard. Uniforms use the top 53 bits;
// Gaussians use the Box-Muller transform so that draws do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for work item `index` under `seed`. Parallel loops use
  // this so results do not depend on scheduling.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  bool coin() { return (engine_() >> 63) != 0; }
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace kct
