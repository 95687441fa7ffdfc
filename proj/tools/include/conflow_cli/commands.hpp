#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conflow/diagnostics.hpp"
#include "conflow_cli/config.hpp"

namespace conflow::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kFailure = 2 };

struct CommonOptions {
  std::optional<std::filesystem::path> out;  // exact output directory
  std::uint64_t seed = 0;
  int jobs = 0;                               // 0: take from the plan, else 1
  std::optional<std::vector<std::string>> checks;
};

/// --out, then outputs.dir, then $CONFLOW_OUT/<stem>, then conflow_runs/<stem>.
std::filesystem::path resolve_output_dir(const CommonOptions& opts, const std::string& config_dir_entry,
                                         const std::string& stem);

int exit_code_for(Termination t) noexcept;

struct CheckContext {
  const Trajectory* traj = nullptr;
  const Background* background = nullptr;
  const FSpec* f = nullptr;
  const RunConfig* config = nullptr;  // needed by "rescale" only
  std::vector<double> p_list{2.0};
  double minmax_eta = 1e-6;
  std::optional<double> tau_final;
};

std::vector<TheoremReport> run_checks(const CheckContext& ctx, const std::vector<std::string>& checks);

json report_json(const TheoremReport& r);

/// Splits "a,b , c" into names; an empty string gives an empty list.
std::vector<std::string> split_list(const std::string& text);

int cmd_run(const std::filesystem::path& config_path, const CommonOptions& opts, std::ostream& out,
            std::ostream& err);

int cmd_verify(const std::filesystem::path& input, const CommonOptions& opts, std::ostream& out,
               std::ostream& err);

int cmd_sweep(const std::filesystem::path& plan_path, const CommonOptions& opts, std::ostream& out,
              std::ostream& err);

int cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b, const std::string& mode,
                const CommonOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace conflow::cli
