#include "dualbev/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dualbev/bench.hpp"
#include "dualbev/btsr.hpp"
#include "dualbev/error.hpp"

namespace dualbev {
namespace fs = std::filesystem;
namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void write_json(const Json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::optional<SceneOnDisk> load_scene_if_any(const RunConfig& cfg) {
  if (cfg.scene_dir.empty()) return std::nullopt;
  if (!fs::is_directory(cfg.scene_dir))
    throw Error(Errc::ConfigError, "scene directory " + cfg.scene_dir.string() + " does not exist");
  return load_scene(cfg.scene_dir);
}

ViewGeometry resolve_geometry(const RunConfig& cfg, const SceneOnDisk* scene) {
  ViewGeometry g;
  if (cfg.rigs) g.rigs = *cfg.rigs;
  else if (scene) g.rigs = scene->rigs;
  else throw Error(Errc::ConfigError, "no camera rigs: give 'rigs' in the config or a scene directory");
  g.grid = cfg.grid ? *cfg.grid : scene ? scene->grid : BevGridSpec{};
  g.depth = cfg.depth ? *cfg.depth : scene ? scene->depth : DepthBinSpec{};
  g.heights = make_height_samples(cfg.heights);
  return g;
}

PrecomputedTables load_or_build_tables(const RunConfig& cfg, const ViewGeometry& geometry) {
  const bool have_ht = !cfg.ht_table.empty() && fs::exists(cfg.ht_table);
  const bool have_lss = !cfg.lss_table.empty() && fs::exists(cfg.lss_table);
  PrecomputedTables t;
  t.ht = have_ht ? table_read<TableKind::HeightTrans>(cfg.ht_table)
                 : precompute_ht_table(geometry.rigs, geometry.grid, geometry.heights, geometry.depth);
  t.lss = have_lss ? table_read<TableKind::LssPool>(cfg.lss_table)
                   : precompute_lss_table(geometry.rigs, geometry.grid, geometry.depth);
  return t;
}

WeightBundle resolve_weights(const RunConfig& cfg, const DffConfig& dff) {
  const auto specs = dff_weight_specs(dff);
  if (!cfg.weights_dir.empty()) return load_bundle(cfg.weights_dir, specs);
  return seeded_bundle(specs, cfg.weight_seed);
}

Json tensor_summary(const Tensor& t, const std::optional<Tensor>& gt) {
  Json j;
  j["shape"] = t.shape();
  double l2 = 0.0, mx = 0.0;
  for (float v : t.data()) {
    l2 += static_cast<double>(v) * v;
    mx = std::max(mx, static_cast<double>(std::abs(v)));
  }
  j["l2"] = std::sqrt(l2);
  j["max_abs"] = mx;
  if (gt && t.rank() == 3 && t.dim(1) == gt->dim(1) && t.dim(2) == gt->dim(2)) {
    const auto s = occupancy_stats(t, *gt);
    j["occupancy"] = {{"mean_occupied", s.mean_occupied},
                      {"mean_empty", s.mean_empty},
                      {"separation", s.separation()},
                      {"occupied_cells", s.occupied_cells},
                      {"empty_cells", s.empty_cells}};
  }
  return j;
}

std::string ht_path_name(HtPath p) {
  switch (p) {
    case HtPath::Fast: return "fast";
    case HtPath::NaiveRound: return "naive_round";
    case HtPath::NaiveInterp: return "naive_interp";
  }
  return "?";
}

}  // namespace

int cmd_synth(const fs::path& spec_json, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SceneDocument doc = scene_document_from_json(parse_json_file(spec_json));
    const SceneBundle bundle = generate_scene(doc.spec, doc.grid, doc.depth);
    save_scene(bundle, doc.spec.seed, doc.grid, doc.depth, out_dir);
    out << "wrote scene with " << bundle.rigs.size() << " cameras to " << out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_precompute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scene = load_scene_if_any(cfg);
    const ViewGeometry geometry = resolve_geometry(cfg, scene ? &*scene : nullptr);
    const fs::path ht_path = !cfg.ht_table.empty() ? cfg.ht_table : cfg.output_dir / "ht.htlt";
    const fs::path lss_path = !cfg.lss_table.empty() ? cfg.lss_table : cfg.output_dir / "lss.lspt";
    if (cfg.ht_table.empty() || cfg.lss_table.empty()) {
      if (cfg.output_dir.empty())
        throw Error(Errc::ConfigError, "precompute needs table paths or an output directory");
      fs::create_directories(cfg.output_dir);
    }
    const auto ht = precompute_ht_table(geometry.rigs, geometry.grid, geometry.heights, geometry.depth);
    const auto lss = precompute_lss_table(geometry.rigs, geometry.grid, geometry.depth);
    table_write(ht, ht_path);
    table_write(lss, lss_path);
    out << "ht table: " << ht.size() << " records -> " << ht_path.string() << '\n';
    out << "lss table: " << lss.size() << " records -> " << lss_path.string() << '\n';
    if (ht.empty()) err << "warning: HeightTrans table is empty (no BEV point is visible)\n";
    if (lss.empty()) err << "warning: LSS table is empty (no frustum point lands in the grid)\n";
    return kExitOk;
  });
}

int cmd_transform(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.scene_dir.empty()) throw Error(Errc::ConfigError, "transform needs a scene directory");
    if (cfg.output_dir.empty()) throw Error(Errc::ConfigError, "transform needs an output directory");
    const auto scene = load_scene_if_any(cfg);
    const ViewGeometry geometry = resolve_geometry(cfg, &*scene);
    const DffConfig dff = DffConfig::for_channels(scene->views.channels());
    const WeightBundle weights = resolve_weights(cfg, dff);
    const PrecomputedTables tables = load_or_build_tables(cfg, geometry);

    const DualBevResult r = run_dualbev(scene->views, geometry, &tables, weights, dff, cfg.options);
    if (r.unnormalized_depth_columns > 0)
      err << "warning: " << r.unnormalized_depth_columns << " depth columns do not sum to 1\n";

    fs::create_directories(cfg.output_dir);
    const std::pair<const char*, const Tensor*> outputs[] = {
        {"f_lss", &r.f_lss},       {"f_ht", &r.f_ht}, {"f_channel", &r.f_channel},
        {"affinity", &r.affinity}, {"prob", &r.prob}, {"fused", &r.fused}};
    Json summary;
    summary["format"] = "dualbev-transform";
    summary["version"] = 1;
    summary["ht_path"] = ht_path_name(cfg.options.ht_path);
    summary["weight_mode"] = cfg.options.lss_mode == WeightMode::DepthMask ? "depth_mask" : "depth_only";
    summary["ablations"] = {{"uniform_depth", cfg.options.uniform_depth},
                            {"disable_mask", cfg.options.disable_mask},
                            {"force_prob_one", cfg.options.force_prob_one},
                            {"force_affinity", cfg.options.force_affinity.has_value()}};
    summary["unnormalized_depth_columns"] = r.unnormalized_depth_columns;
    summary["tensors"] = Json::object();
    for (const auto& [name, t] : outputs) {
      tensor_write(*t, cfg.output_dir / (std::string(name) + ".btsr"));
      summary["tensors"][name] = tensor_summary(*t, scene->gt_bev);
    }
    write_json(summary, cfg.output_dir / "summary.json");
    out << "wrote F " << shape_string(r.fused.shape()) << " and diagnostics to "
        << cfg.output_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_bench(const RunConfig& cfg, const fs::path& json_out, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.bench.repetitions < 3) throw Error(Errc::ConfigError, "bench needs at least 3 repetitions");
    if (cfg.bench.warmup < 1) throw Error(Errc::ConfigError, "bench needs at least 1 warmup run");
    std::optional<SceneOnDisk> scene = load_scene_if_any(cfg);
    if (!scene) {
      // Default desk configuration: the standard synthetic scene.
      SceneOnDisk s;
      const SceneBundle b = generate_scene(standard_scene_spec(), s.grid, s.depth);
      s.rigs = b.rigs;
      s.views = b.views;
      s.gt_bev = b.gt_bev;
      scene = std::move(s);
    }
    const ViewGeometry geometry = resolve_geometry(cfg, &*scene);
    const DffConfig dff = DffConfig::for_channels(scene->views.channels());
    const WeightBundle weights = resolve_weights(cfg, dff);
    const PrecomputedTables tables = load_or_build_tables(cfg, geometry);
    const BenchReport report = run_bench(scene->views, geometry, tables, weights, dff, cfg.options, cfg.bench);
    out << render_bench_text(report);
    fs::path target = json_out;
    if (target.empty() && !cfg.output_dir.empty()) {
      fs::create_directories(cfg.output_dir);
      target = cfg.output_dir / "bench.json";
    }
    if (!target.empty()) write_json(bench_to_json(report), target);
    return kExitOk;
  });
}

CompareReport compare_dirs(const fs::path& baseline, const fs::path& variant) {
  for (const auto& d : {baseline, variant})
    if (!fs::is_directory(d)) throw Error(Errc::ConfigError, d.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(baseline))
    if (e.path().extension() == ".btsr") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());

  CompareReport report;
  for (const auto& name : names) {
    if (!fs::exists(variant / name)) {
      report.missing.push_back(name);
      continue;
    }
    const Tensor a = tensor_read(baseline / name);
    const Tensor b = tensor_read(variant / name);
    if (a.shape() != b.shape())
      throw Error(Errc::ShapeMismatch, name + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    CompareReport::FileDiff d{name, a.bitwise_equal(b), max_abs_diff(b, a), relative_l2(b, a)};
    report.max_abs_diff = std::max(report.max_abs_diff, d.max_abs_diff);
    report.files.push_back(d);
  }
  const auto occ = [](const fs::path& dir) -> Json {
    if (!fs::exists(dir / "summary.json")) return nullptr;
    const Json s = parse_json_file(dir / "summary.json");
    Json o = Json::object();
    if (s.contains("tensors"))
      for (const auto& [name, t] : s["tensors"].items())
        if (t.contains("occupancy")) o[name] = t["occupancy"];
    return o;
  };
  report.occupancy = {{"baseline", occ(baseline)}, {"variant", occ(variant)}};
  return report;
}

Json compare_to_json(const CompareReport& r) {
  Json j;
  j["format"] = "dualbev-compare";
  j["max_abs_diff"] = r.max_abs_diff;
  bool identical = r.missing.empty();
  j["files"] = Json::object();
  for (const auto& f : r.files) {
    identical &= f.bitwise_equal;
    j["files"][f.name] = {{"bitwise_equal", f.bitwise_equal},
                          {"max_abs_diff", f.max_abs_diff},
                          {"relative_l2", f.relative_l2}};
  }
  j["identical"] = identical;
  j["missing"] = r.missing;
  j["occupancy"] = r.occupancy;
  return j;
}

int cmd_compare(const fs::path& baseline, const fs::path& variant, const fs::path& json_out,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Json j = compare_to_json(compare_dirs(baseline, variant));
    if (!json_out.empty()) write_json(j, json_out);
    out << j.dump(2) << '\n';
    return kExitOk;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic dual-stream BEV view transformation", "dualbev"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-camera scene");
  synth->add_option("spec", spec_path, "Scene spec JSON")->required();
  synth->add_option("out_dir", synth_out, "Output scene directory")->required();

  // Shared run-config flags; set values override the JSON config.
  struct Overrides {
    std::string config, scene, out, ht_table, lss_table, weights, sampler, ht_path, weight_mode;
    std::vector<std::string> ablate;
    std::optional<int> threads, reps, warmup;
    std::optional<std::uint64_t> weight_seed;
    std::string json;
  };
  Overrides precompute_o, transform_o, bench_o;
  auto add_run_flags = [](CLI::App* sub, Overrides& o) {
    sub->add_option("-c,--config", o.config, "Run config JSON");
    sub->add_option("--scene", o.scene, "Scene directory");
    sub->add_option("-o,--out", o.out, "Output directory");
    sub->add_option("--ht-table", o.ht_table, "HeightTrans lookup table (HTLT)");
    sub->add_option("--lss-table", o.lss_table, "LSS pooling table (LSPT)");
    sub->add_option("--threads", o.threads, "Worker threads");
  };
  auto* precompute = app.add_subcommand("precompute", "Build HTLT and LSPT lookup tables");
  add_run_flags(precompute, precompute_o);

  auto* transform = app.add_subcommand("transform", "Run the view transformation on a scene");
  add_run_flags(transform, transform_o);
  auto add_model_flags = [](CLI::App* sub, Overrides& o) {
    sub->add_option("--weights", o.weights, "Weight bundle directory");
    sub->add_option("--weight-seed", o.weight_seed, "Seed for generated weights");
    sub->add_option("--sampler", o.sampler, "round | interp");
    sub->add_option("--ht-path", o.ht_path, "fast | naive");
    sub->add_option("--weight-mode", o.weight_mode, "depth_mask | depth_only");
    sub->add_option("--ablate", o.ablate, "uniform-D | disable-M | force-P | force-A");
  };
  add_model_flags(transform, transform_o);

  auto* bench = app.add_subcommand("bench", "Time the view-transformation kernels");
  add_run_flags(bench, bench_o);
  add_model_flags(bench, bench_o);
  bench->add_option("--reps", bench_o.reps, "Timed repetitions (>= 3)");
  bench->add_option("--warmup", bench_o.warmup, "Untimed warmup runs (>= 1)");
  bench->add_option("--json", bench_o.json, "Write the JSON report here");

  std::string base_dir, variant_dir, compare_json;
  auto* compare = app.add_subcommand("compare", "Diff two transform output directories");
  compare->add_option("baseline", base_dir, "Baseline output directory")->required();
  compare->add_option("variant", variant_dir, "Variant output directory")->required();
  compare->add_option("--json", compare_json, "Write the JSON report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (e.get_exit_code() == 0) return kExitOk;
    return kExitConfig;
  }

  auto to_config = [&](const Overrides& o, RunConfig& cfg) {
    return guarded(err, [&] {
      Json j = Json::object();
      fs::path base;
      if (!o.config.empty()) {
        j = parse_json_file(o.config);
        base = fs::path(o.config).parent_path();
      }
      cfg = run_config_from_json(j, base);
      if (!o.scene.empty()) cfg.scene_dir = o.scene;
      if (!o.out.empty()) cfg.output_dir = o.out;
      if (!o.ht_table.empty()) cfg.ht_table = o.ht_table;
      if (!o.lss_table.empty()) cfg.lss_table = o.lss_table;
      if (!o.weights.empty()) cfg.weights_dir = o.weights;
      if (o.weight_seed) cfg.weight_seed = *o.weight_seed;
      if (o.threads) {
        if (*o.threads < 1) throw Error(Errc::ConfigError, "threads must be >= 1");
        cfg.options.threads = *o.threads;
      }
      if (!o.sampler.empty() || !o.ht_path.empty()) {
        const std::string path = !o.ht_path.empty() ? o.ht_path
                                 : cfg.options.ht_path == HtPath::Fast ? (o.sampler == "interp" ? "naive" : "fast")
                                                                       : "naive";
        const std::string sampler = !o.sampler.empty() ? o.sampler
                                    : cfg.options.ht_path == HtPath::NaiveInterp ? "interp"
                                                                                 : "round";
        set_ht_path(cfg.options, path, sampler);
      }
      if (!o.weight_mode.empty()) {
        if (o.weight_mode == "depth_mask") cfg.options.lss_mode = WeightMode::DepthMask;
        else if (o.weight_mode == "depth_only") cfg.options.lss_mode = WeightMode::DepthOnly;
        else throw Error(Errc::ConfigError, "weight mode must be depth_mask or depth_only");
      }
      for (const auto& a : o.ablate) apply_ablation(cfg.options, a);
      if (o.reps) cfg.bench.repetitions = *o.reps;
      if (o.warmup) cfg.bench.warmup = *o.warmup;
      return kExitOk;
    });
  };

  if (synth->parsed()) return cmd_synth(spec_path, synth_out, out, err);
  if (compare->parsed()) return cmd_compare(base_dir, variant_dir, compare_json, out, err);
  RunConfig cfg;
  if (precompute->parsed()) {
    if (int rc = to_config(precompute_o, cfg)) return rc;
    return cmd_precompute(cfg, out, err);
  }
  if (transform->parsed()) {
    if (int rc = to_config(transform_o, cfg)) return rc;
    return cmd_transform(cfg, out, err);
  }
  if (bench->parsed()) {
    if (int rc = to_config(bench_o, cfg)) return rc;
    return cmd_bench(cfg, bench_o.json, out, err);
  }
  return kExitConfig;
}

}  // namespace dualbev
