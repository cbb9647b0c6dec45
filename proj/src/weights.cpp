#include "dualbev/weights.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dualbev/btsr.hpp"
#include "dualbev/error.hpp"
#include "dualbev/rng.hpp"

namespace dualbev {

const Conv2dWeights& WeightBundle::at(const std::string& name) const {
  auto it = convs_.find(name);
  if (it == convs_.end()) throw Error(Errc::ConfigError, "weight bundle has no '" + name + "'");
  return it->second;
}

Conv2dWeights& WeightBundle::at(const std::string& name) {
  auto it = convs_.find(name);
  if (it == convs_.end()) throw Error(Errc::ConfigError, "weight bundle has no '" + name + "'");
  return it->second;
}

void WeightBundle::set(const std::string& name, Conv2dWeights w) {
  w.validate();
  convs_[name] = std::move(w);
}

void WeightBundle::check(std::span<const ConvSpec> specs) const {
  for (const auto& s : specs) {
    const auto& w = at(s.name);
    const Shape expected{s.out_channels, s.in_channels, s.kernel_h, s.kernel_w};
    if (w.kernel.shape() != expected || w.bias.shape() != Shape{s.out_channels})
      throw Error(Errc::ConfigError, "weight '" + s.name + "' has kernel " +
                                         shape_string(w.kernel.shape()) + ", expected " +
                                         shape_string(expected));
  }
}

WeightBundle seeded_bundle(std::span<const ConvSpec> specs, std::uint64_t seed) {
  WeightBundle bundle(SeededWeights{seed});
  Rng rng(seed);
  for (const auto& s : specs) {
    const auto bound =
        static_cast<float>(1.0 / std::sqrt(static_cast<double>(s.in_channels * s.kernel_h * s.kernel_w)));
    Conv2dWeights w;
    w.kernel = rng_uniform(rng, {s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}, -bound, bound);
    w.bias = rng_uniform(rng, {s.out_channels}, -bound, bound);
    bundle.set(s.name, std::move(w));
  }
  return bundle;
}

WeightBundle zero_bundle(std::span<const ConvSpec> specs) {
  WeightBundle bundle(SeededWeights{0});
  for (const auto& s : specs)
    bundle.set(s.name, {Tensor({s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}),
                        Tensor({s.out_channels})});
  return bundle;
}

void save_bundle(const WeightBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "dualbev-weights";
  manifest["version"] = 1;
  auto& tensors = manifest["tensors"];
  for (const auto& [name, w] : bundle.convs()) {
    tensor_write(w.kernel, dir / (name + ".weight.btsr"));
    tensor_write(w.bias, dir / (name + ".bias.btsr"));
    tensors[name + ".weight"] = name + ".weight.btsr";
    tensors[name + ".bias"] = name + ".bias.btsr";
  }
  std::ofstream out(dir / "weights.json");
  if (!out) throw Error(Errc::IoFailure, "cannot write weight manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

WeightBundle load_bundle(const std::filesystem::path& dir, std::span<const ConvSpec> specs) {
  const auto manifest_path = dir / "weights.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::ConfigError, "missing weight manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, "bad weight manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "dualbev-weights" || !manifest.contains("tensors"))
    throw Error(Errc::ConfigError, "not a dualbev weight manifest: " + manifest_path.string());
  const auto& tensors = manifest["tensors"];
  auto file_for = [&](const std::string& key) {
    if (!tensors.contains(key)) throw Error(Errc::ConfigError, "weight manifest lacks '" + key + "'");
    return dir / tensors[key].get<std::string>();
  };
  WeightBundle bundle(LoadedWeights{dir});
  for (const auto& s : specs)
    bundle.set(s.name, {tensor_read(file_for(s.name + ".weight")), tensor_read(file_for(s.name + ".bias"))});
  bundle.check(specs);
  return bundle;
}

}  // namespace dualbev
