#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rogsure {

/// Seeded generator with platform-independent derived distributions.
///
/// The standard library's distribution objects are implementation-defined, so
/// uniform and normal draws are computed here directly from mt19937_64 output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double normal();
  /// +1 or -1 with equal probability.
  double sign() { return (next() >> 63) != 0 ? 1.0 : -1.0; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic sub-seed for a named stage, so adding stages never perturbs
/// the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace rogsure
