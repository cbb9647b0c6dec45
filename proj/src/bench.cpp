#include "dualbev/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "dualbev/error.hpp"

namespace dualbev {

const LatencyStats& BenchReport::entry(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(Errc::ConfigError, "bench report has no entry '" + name + "'");
}

double BenchReport::fast_speedup() const {
  const double fast = entry("ht_fast").median_ms;
  return fast > 0.0 ? entry("ht_naive_interp").median_ms / fast : 0.0;
}

LatencyStats time_op(const std::string& name, int repetitions, int warmup,
                     const std::function<void()>& fn) {
  if (repetitions < 3) throw Error(Errc::ConfigError, "bench needs at least 3 repetitions");
  if (warmup < 1) throw Error(Errc::ConfigError, "bench needs at least 1 warmup run");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  const double median = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  return {name, median, ms.back(), ms.front()};
}

BenchReport run_bench(const ViewInputs& inputs, const ViewGeometry& geometry,
                      const PrecomputedTables& tables, const WeightBundle& weights,
                      const DffConfig& cfg, const PipelineOptions& options,
                      const BenchSettings& settings) {
  if (settings.repetitions < 3) throw Error(Errc::ConfigError, "bench needs at least 3 repetitions");
  if (settings.warmup < 1) throw Error(Errc::ConfigError, "bench needs at least 1 warmup run");
  const int threads = options.threads;

  if (threads > 1) {
    const bool ht_ok = ht_transform_fast(inputs, tables.ht, threads)
                           .bitwise_equal(ht_transform_fast(inputs, tables.ht, 1));
    const bool lss_ok = lss_pool(inputs, tables.lss, options.lss_mode, threads)
                            .bitwise_equal(lss_pool(inputs, tables.lss, options.lss_mode, 1));
    if (!ht_ok || !lss_ok)
      throw Error(Errc::ShapeMismatch, "multi-threaded pooling differs from the sequential result");
  }

  BenchReport r;
  r.repetitions = settings.repetitions;
  r.warmup = settings.warmup;
  r.threads = threads;
  r.n_cams = inputs.n_cams();
  r.channels = inputs.channels();
  r.feat_h = inputs.height();
  r.feat_w = inputs.width();
  r.n_bins = inputs.n_bins();
  r.ny = static_cast<std::size_t>(geometry.grid.ny);
  r.nx = static_cast<std::size_t>(geometry.grid.nx);
  r.n_heights = geometry.heights.size();
  r.ht_records = tables.ht.size();
  r.lss_records = tables.lss.size();

  Tensor sink;
  r.entries.push_back(time_op("ht_naive_interp", settings.repetitions, settings.warmup, [&] {
    sink = ht_transform_naive(inputs, geometry.rigs, geometry.grid, geometry.heights, geometry.depth,
                              SamplerMode::Interp);
  }));
  r.entries.push_back(time_op("ht_fast", settings.repetitions, settings.warmup,
                              [&] { sink = ht_transform_fast(inputs, tables.ht, threads); }));
  r.entries.push_back(time_op("lss_pool", settings.repetitions, settings.warmup, [&] {
    sink = lss_pool(inputs, tables.lss, options.lss_mode, threads);
  }));
  PipelineOptions pipe = options;
  pipe.ht_path = HtPath::Fast;
  r.entries.push_back(time_op("full_pipeline", settings.repetitions, settings.warmup, [&] {
    sink = run_dualbev(inputs, geometry, &tables, weights, cfg, pipe).fused;
  }));
  return r;
}

Json bench_to_json(const BenchReport& r) {
  Json j;
  j["format"] = "dualbev-bench";
  j["version"] = 1;
  j["repetitions"] = r.repetitions;
  j["warmup"] = r.warmup;
  j["threads"] = r.threads;
  j["geometry"] = {{"n_cams", r.n_cams}, {"channels", r.channels}, {"feat_h", r.feat_h},
                   {"feat_w", r.feat_w}, {"n_bins", r.n_bins},     {"ny", r.ny},
                   {"nx", r.nx},         {"n_heights", r.n_heights}};
  j["tables"] = {{"ht_records", r.ht_records}, {"lss_records", r.lss_records}};
  j["latency_ms"] = Json::array();
  for (const auto& e : r.entries)
    j["latency_ms"].push_back(
        {{"name", e.name}, {"median", e.median_ms}, {"worst", e.worst_ms}, {"best", e.best_ms}});
  bool has_speedup = false;
  for (const auto& e : r.entries) has_speedup |= e.name == "ht_fast";
  if (has_speedup) j["fast_speedup"] = r.fast_speedup();
  return j;
}

BenchReport bench_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "dualbev-bench")
      throw Error(Errc::ConfigError, "not a dualbev bench report");
    BenchReport r;
    r.repetitions = j.at("repetitions").get<int>();
    r.warmup = j.at("warmup").get<int>();
    r.threads = j.at("threads").get<int>();
    const auto& g = j.at("geometry");
    r.n_cams = g.at("n_cams").get<std::size_t>();
    r.channels = g.at("channels").get<std::size_t>();
    r.feat_h = g.at("feat_h").get<std::size_t>();
    r.feat_w = g.at("feat_w").get<std::size_t>();
    r.n_bins = g.at("n_bins").get<std::size_t>();
    r.ny = g.at("ny").get<std::size_t>();
    r.nx = g.at("nx").get<std::size_t>();
    r.n_heights = g.at("n_heights").get<std::size_t>();
    r.ht_records = j.at("tables").at("ht_records").get<std::size_t>();
    r.lss_records = j.at("tables").at("lss_records").get<std::size_t>();
    for (const auto& e : j.at("latency_ms"))
      r.entries.push_back({e.at("name").get<std::string>(), e.at("median").get<double>(),
                           e.at("worst").get<double>(), e.at("best").get<double>()});
    return r;
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, std::string("bad bench report: ") + e.what());
  }
}

std::string render_bench_text(const BenchReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line,
                "cams=%zu features=%zux%zux%zu bins=%zu bev=%zux%zu heights=%zu threads=%d reps=%d warmup=%d\n",
                r.n_cams, r.channels, r.feat_h, r.feat_w, r.n_bins, r.ny, r.nx, r.n_heights, r.threads,
                r.repetitions, r.warmup);
  os << line;
  std::snprintf(line, sizeof line, "%-18s %12s %12s %12s\n", "op", "median_ms", "worst_ms", "best_ms");
  os << line;
  for (const auto& e : r.entries) {
    std::snprintf(line, sizeof line, "%-18s %12.3f %12.3f %12.3f\n", e.name.c_str(), e.median_ms,
                  e.worst_ms, e.best_ms);
    os << line;
  }
  bool has = false, has_naive = false;
  for (const auto& e : r.entries) {
    has |= e.name == "ht_fast";
    has_naive |= e.name == "ht_naive_interp";
  }
  if (has && has_naive) {
    std::snprintf(line, sizeof line, "ht_fast speedup over ht_naive_interp: %.1fx\n", r.fast_speedup());
    os << line;
  }
  return os.str();
}

}  // namespace dualbev
