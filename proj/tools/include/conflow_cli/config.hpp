#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflow/flow.hpp"
#include "conflow/fzoo.hpp"

namespace conflow::cli {

using nlohmann::json;

/// A parsed run configuration document with sections
/// {grid, background, u0, f, time, outputs, checks}.
struct LoadedConfig {
  json doc;
  std::filesystem::path source;
  RunConfig run;
  std::string out_dir;            // outputs.dir, possibly empty
  int output_snapshot_cadence = 0;
  std::vector<std::string> checks;
  std::vector<double> p_list{2.0};
  std::optional<double> tau_final;
  double minmax_eta = 1e-6;
};

/// Accepts "classical", "power:1.5", ... or an object such as
/// {"name": "power", "kappa": 1.5, "shift": 5}. Throws Error(config).
FSpec parse_f(const json& spec, std::uint64_t seed = 0);

/// Relative file: paths are resolved against base_dir.
LoadedConfig parse_config(const json& doc, const std::filesystem::path& base_dir,
                          std::uint64_t seed = 0);

LoadedConfig load_config(const std::filesystem::path& path, std::uint64_t seed = 0);

/// Every check name accepted by verify, in report order.
const std::vector<std::string>& all_check_names();

/// Expands "all" and rejects unknown names.
std::vector<std::string> normalize_checks(const std::vector<std::string>& names);

}  // namespace conflow::cli
