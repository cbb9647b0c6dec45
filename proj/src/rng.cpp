#include "dualbev/rng.hpp"

#include <cmath>
#include <numbers>

#include "dualbev/error.hpp"

namespace dualbev {
namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) noexcept : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

float Rng::next_float() noexcept {
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

double Rng::next_double() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float Rng::uniform(float lo, float hi) {
  if (!(lo < hi)) throw Error(Errc::InvalidRange, "uniform requires lo < hi");
  const double u = static_cast<double>(next_u64() >> 40) * 0x1.0p-24;
  const auto x = static_cast<float>(static_cast<double>(lo) + (static_cast<double>(hi) - lo) * u);
  return x < hi ? x : std::nextafter(hi, lo);
}

double Rng::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor rng_uniform(Rng& rng, const Shape& shape, float lo, float hi) {
  if (shape.empty() || shape_volume(shape) == 0)
    throw Error(Errc::EmptyShape, "rng_uniform needs a non-empty shape");
  if (!(lo < hi)) throw Error(Errc::InvalidRange, "rng_uniform requires lo < hi");
  Tensor t(shape);
  for (auto& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

}  // namespace dualbev
