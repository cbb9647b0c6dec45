#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dualbev/nnops.hpp"

namespace dualbev {

/// Name and shape of one convolution in an architecture.
struct ConvSpec {
  std::string name;
  std::size_t out_channels;
  std::size_t in_channels;
  std::size_t kernel_h;
  std::size_t kernel_w;
};

struct SeededWeights {
  std::uint64_t seed;
};
struct LoadedWeights {
  std::filesystem::path path;
};
using WeightProvenance = std::variant<SeededWeights, LoadedWeights>;

/// Named convolution weights plus where they came from.
class WeightBundle {
 public:
  WeightBundle() = default;
  explicit WeightBundle(WeightProvenance provenance) : provenance_(std::move(provenance)) {}

  [[nodiscard]] const Conv2dWeights& at(const std::string& name) const;
  Conv2dWeights& at(const std::string& name);
  void set(const std::string& name, Conv2dWeights w);
  [[nodiscard]] bool contains(const std::string& name) const { return convs_.count(name) != 0; }

  [[nodiscard]] const std::map<std::string, Conv2dWeights>& convs() const noexcept { return convs_; }
  [[nodiscard]] const WeightProvenance& provenance() const noexcept { return provenance_; }

  /// Throws ConfigError if a listed name is missing or has the wrong shape.
  void check(std::span<const ConvSpec> specs) const;

 private:
  std::map<std::string, Conv2dWeights> convs_;
  WeightProvenance provenance_ = SeededWeights{0};
};

/// Kernels and biases drawn uniformly from +-1/sqrt(C_in * kh * kw), one Rng
/// stream, in `specs` order (kernel before bias).
WeightBundle seeded_bundle(std::span<const ConvSpec> specs, std::uint64_t seed);

/// Copy of `specs`-shaped bundle with every kernel and bias set to zero.
WeightBundle zero_bundle(std::span<const ConvSpec> specs);

// Directory layout: weights.json manifest
//   {"format": "dualbev-weights", "version": 1,
//    "tensors": {"<name>.weight": "<file>.btsr", "<name>.bias": "<file>.btsr", ...}}
// with one BTSR file per tensor next to it.
void save_bundle(const WeightBundle& bundle, const std::filesystem::path& dir);
WeightBundle load_bundle(const std::filesystem::path& dir, std::span<const ConvSpec> specs);

}  // namespace dualbev
