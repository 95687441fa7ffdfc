#pragma once

// Run directory layout:
//
//   timeseries.csv     t,dt,Smin,Smax,A,sigma,vol,fSA_sup,lp2,lpn2,umin,umax
//   extras.csv         remaining per-record quantities, same row order
//   dts.csv            every step size taken
//   background.field   S0
//   snapshots/u_<record>.field
//   summary.json       termination, counts, final record, config echo

#include <filesystem>
#include <string>
#include <vector>

#include "conflow/flow.hpp"
#include "conflow_cli/config.hpp"

namespace conflow::cli {

extern const char* const kTimeseriesHeader;

/// Writes every snapshot whose record index is a multiple of `cadence`
/// (cadence 0: first only) plus the last one.
void write_run(const std::filesystem::path& dir, const Trajectory& traj, const Background& bg,
               const json& config_echo, int cadence);

json summary_json(const Trajectory& traj, const json& config_echo);

struct LoadedRun {
  Trajectory traj;
  Background background;
  json summary;
  std::filesystem::path dir;
};

/// Throws Error(io) if the directory does not look like a run.
LoadedRun read_run(const std::filesystem::path& dir);

bool is_run_dir(const std::filesystem::path& path);

/// Config document with relative file: specs rewritten as absolute paths.
json absolutize_config(const json& doc, const std::filesystem::path& base_dir);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace conflow::cli
