#pragma once

#include <cstdint>
#include <string>

namespace s2p {

// Deterministic splitmix64-based generator. std::mt19937 is portable but the
// standard distributions are not, so the few distributions we need are spelled
// out here; identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream for a named substream of `seed`, so adding
  // or removing one consumer never shifts the draws of another.
  static Rng for_name(std::uint64_t seed, const std::string& name);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace s2p
