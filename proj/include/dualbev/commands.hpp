#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualbev/config.hpp"

namespace dualbev {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

int cmd_synth(const std::filesystem::path& spec_json, const std::filesystem::path& out_dir,
              std::ostream& out, std::ostream& err);
int cmd_precompute(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_transform(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, const std::filesystem::path& json_out, std::ostream& out,
              std::ostream& err);
int cmd_compare(const std::filesystem::path& baseline, const std::filesystem::path& variant,
                const std::filesystem::path& json_out, std::ostream& out, std::ostream& err);

/// Diff of two transform output directories.
struct CompareReport {
  struct FileDiff {
    std::string name;
    bool bitwise_equal = false;
    double max_abs_diff = 0.0;
    double relative_l2 = 0.0;
  };
  std::vector<FileDiff> files;
  std::vector<std::string> missing;
  double max_abs_diff = 0.0;
  Json occupancy;  // per-side occupancy stats from summary.json, when present
};
CompareReport compare_dirs(const std::filesystem::path& baseline, const std::filesystem::path& variant);
Json compare_to_json(const CompareReport& report);

/// Entry point behind the `dualbev` executable; args exclude argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualbev
