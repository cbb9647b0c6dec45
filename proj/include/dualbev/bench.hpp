#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dualbev/config.hpp"
#include "dualbev/dff.hpp"

namespace dualbev {

struct LatencyStats {
  std::string name;
  double median_ms = 0.0;
  double worst_ms = 0.0;
  double best_ms = 0.0;

  bool operator==(const LatencyStats&) const = default;
};

struct BenchReport {
  int repetitions = 0;
  int warmup = 0;
  int threads = 1;
  std::size_t n_cams = 0;
  std::size_t channels = 0;
  std::size_t feat_h = 0;
  std::size_t feat_w = 0;
  std::size_t n_bins = 0;
  std::size_t ny = 0;
  std::size_t nx = 0;
  std::size_t n_heights = 0;
  std::size_t ht_records = 0;
  std::size_t lss_records = 0;
  std::vector<LatencyStats> entries;

  [[nodiscard]] const LatencyStats& entry(const std::string& name) const;
  /// Median ht_naive_interp latency over median ht_fast latency.
  [[nodiscard]] double fast_speedup() const;

  bool operator==(const BenchReport&) const = default;
};

/// Runs `fn` warmup times untimed, then `repetitions` timed runs.
LatencyStats time_op(const std::string& name, int repetitions, int warmup,
                     const std::function<void()>& fn);

/// Times ht_naive_interp, ht_fast, lss_pool and full_pipeline. Table builds
/// and file I/O stay outside the timed region. With threads > 1 the
/// multi-threaded outputs are first checked bitwise against one thread.
BenchReport run_bench(const ViewInputs& inputs, const ViewGeometry& geometry,
                      const PrecomputedTables& tables, const WeightBundle& weights,
                      const DffConfig& cfg, const PipelineOptions& options,
                      const BenchSettings& settings);

Json bench_to_json(const BenchReport& report);
BenchReport bench_from_json(const Json& j);
std::string render_bench_text(const BenchReport& report);

}  // namespace dualbev
