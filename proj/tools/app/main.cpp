#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conflow_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace conflow::cli;

  CLI::App app{"conflow: conformal curvature flows on periodic grids"};
  app.require_subcommand(1);

  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string checks;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Seed for the sampled monotonicity certification of f");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Integrate a flow and write its run directory");
  run->add_option("config", config_path, "Config JSON")->required();

  std::string input;
  auto* verify = app.add_subcommand("verify", "Run diagnostics on a config or a run directory");
  verify->add_option("input", input, "Config JSON or run directory")->required();
  auto* checks_opt = verify->add_option("--checks", checks, "Comma-separated checks, or all");

  std::string plan_path;
  auto* sweep = app.add_subcommand("sweep", "Run the Cartesian product of a plan");
  sweep->add_option("plan", plan_path, "Plan JSON")->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string a, b, mode = "shift";
  auto* compare = app.add_subcommand("compare", "Check shift or rescale equivalence of two runs");
  compare->add_option("a", a, "Config JSON or run directory")->required();
  compare->add_option("b", b, "Config JSON or run directory")->required();
  compare->add_option("--mode", mode, "shift or rescale")->check(CLI::IsMember({"shift", "rescale"}));

  for (auto* sub : {run, verify, sweep, compare}) {
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for the sampled monotonicity certification of f");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  CommonOptions opts;
  if (!out_dir.empty()) opts.out = out_dir;
  opts.seed = seed;
  opts.jobs = jobs;
  if (checks_opt->count() > 0) opts.checks = split_list(checks);

  try {
    if (*run) return cmd_run(config_path, opts, std::cout, std::cerr);
    if (*verify) return cmd_verify(input, opts, std::cout, std::cerr);
    if (*sweep) return cmd_sweep(plan_path, opts, std::cout, std::cerr);
    if (*compare) return cmd_compare(a, b, mode, opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "conflow: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
