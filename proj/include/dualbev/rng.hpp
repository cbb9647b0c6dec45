#pragma once

#include <array>
#include <cstdint>

#include "dualbev/tensor.hpp"

namespace dualbev {

/// xoshiro256** seeded through splitmix64.
///
/// Only integer arithmetic feeds the uniform stream, so a given seed yields
/// the same values on every platform. Single owner; derive child seeds with
/// fork() to hand independent streams to workers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 24 random mantissa bits.
  float next_float() noexcept;
  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() noexcept;
  /// Uniform in [lo, hi). Requires lo < hi.
  float uniform(float lo, float hi);
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  /// Seed for an independent child stream; advances this stream by one draw.
  std::uint64_t fork() noexcept { return next_u64(); }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Tensor of uniform draws in [lo, hi), filled in row-major order.
Tensor rng_uniform(Rng& rng, const Shape& shape, float lo, float hi);

}  // namespace dualbev
