#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "conflow/error.hpp"
#include "conflow_cli/commands.hpp"
#include "conflow_cli/persist.hpp"

using namespace conflow;
using namespace conflow::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conflow_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_json(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2));
  return path;
}

json small_negative(double t_final = 2.0) {
  return json{{"grid", {{"n", 4}, {"points", 32}}},
              {"background", "sinusoidal:-1.5,0.4,0"},
              {"f", "classical"},
              {"time", {{"T", t_final}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct Io {
  std::ostringstream out, err;
};

}  // namespace

TEST(Config, ParsesDefaultsAndObjects) {
  json doc = small_negative();
  doc["f"] = json{{"name", "linear"}, {"slope", -2.0}, {"shift", 1.0}};
  doc["checks"] = json{{"list", {"all"}}, {"p", {1.0, 2.0}}, {"tau_final", 0.5}};
  const LoadedConfig c = parse_config(doc, ".", 3);
  EXPECT_EQ(c.run.background.grid().size(), 32u);
  EXPECT_EQ(c.run.scheme, Scheme::rk4);
  EXPECT_DOUBLE_EQ(c.run.t_final, 2.0);
  EXPECT_DOUBLE_EQ(c.run.f(0.0), 1.0);
  EXPECT_DOUBLE_EQ(c.run.f(1.0), -1.0);
  EXPECT_EQ(c.checks, all_check_names());
  EXPECT_EQ(c.p_list, (std::vector<double>{1.0, 2.0}));
  ASSERT_TRUE(c.tau_final);
  EXPECT_DOUBLE_EQ(*c.tau_final, 0.5);
}

TEST(Config, RejectsBadInput) {
  auto rejects = [](const json& doc) {
    try {
      parse_config(doc, ".", 0);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::config;
    }
    return false;
  };
  json unknown = small_negative();
  unknown["colour"] = "red";
  EXPECT_TRUE(rejects(unknown));
  json missing = small_negative();
  missing.erase("f");
  EXPECT_TRUE(rejects(missing));
  json bad_check = small_negative();
  bad_check["checks"] = {"nonsense"};
  EXPECT_TRUE(rejects(bad_check));
  json bad_policy = small_negative();
  bad_policy["time"]["dt"] = {{"policy", "sometimes"}};
  EXPECT_TRUE(rejects(bad_policy));
  json bad_f = small_negative();
  bad_f["f"] = {{"name", "linear"}, {"slope", 1.0}};
  EXPECT_THROW(parse_config(bad_f, ".", 0), Error);
  json bad_grid = small_negative();
  bad_grid["grid"]["points"] = 2;
  EXPECT_TRUE(rejects(bad_grid));
}

TEST(Helpers, SplitListAndExitCodes) {
  EXPECT_TRUE(split_list("").empty());
  EXPECT_EQ(split_list("a, b ,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(exit_code_for(Termination::time_reached), 0);
  EXPECT_EQ(exit_code_for(Termination::stationary), 0);
  EXPECT_EQ(exit_code_for(Termination::blowup), 2);
  EXPECT_EQ(exit_code_for(Termination::f_domain_violation), 2);
}

TEST(Helpers, OutputDirPrecedence) {
  CommonOptions o;
  EXPECT_EQ(resolve_output_dir(o, "", "cfg"), fs::path("conflow_runs") / "cfg");
  EXPECT_EQ(resolve_output_dir(o, "here", "cfg"), fs::path("here"));
  o.out = "there";
  EXPECT_EQ(resolve_output_dir(o, "here", "cfg"), fs::path("there"));
}

TEST(Run, StationaryStartWritesOneRow) {
  const fs::path dir = scratch("fixed");
  const fs::path cfg = write_json(dir / "fixed.json", json{{"grid", {{"n", 4}, {"points", 32}}},
                                                          {"background", "constant:-1"},
                                                          {"f", "classical"},
                                                          {"time", {{"T", 1}, {"stop_tol", 0}}}});
  CommonOptions o;
  o.out = dir / "run";
  Io io;
  EXPECT_EQ(cmd_run(cfg, o, io.out, io.err), 0) << io.err.str();
  EXPECT_EQ(line_count(dir / "run" / "timeseries.csv"), 2u);
  const std::string header = slurp(dir / "run" / "timeseries.csv").substr(0, std::string(kTimeseriesHeader).size());
  EXPECT_EQ(header, kTimeseriesHeader);
  const LoadedRun r = read_run(dir / "run");
  EXPECT_EQ(r.traj.termination, Termination::stationary);
  EXPECT_EQ(r.summary.at("steps").get<std::size_t>(), 0u);
}

TEST(Run, IncreasingFIsRejected) {
  const fs::path dir = scratch("increasing");
  json doc = small_negative();
  doc["f"] = {{"name", "linear"}, {"slope", 1.0}};
  const fs::path cfg = write_json(dir / "inc.json", doc);
  CommonOptions o;
  o.out = dir / "run";
  Io io;
  EXPECT_EQ(cmd_run(cfg, o, io.out, io.err), 1);
  EXPECT_FALSE(io.err.str().empty());
  EXPECT_FALSE(fs::exists(dir / "run" / "summary.json"));
}

TEST(Run, MissingConfig) {
  Io io;
  EXPECT_EQ(cmd_run("/nonexistent/conflow.json", CommonOptions{}, io.out, io.err), 1);
}

TEST(Run, RoundTripAndDeterminism) {
  const fs::path dir = scratch("roundtrip");
  json doc = small_negative(1.0);
  doc["outputs"] = {{"snapshot_cadence", 10}};
  const fs::path cfg = write_json(dir / "neg.json", doc);
  CommonOptions o;
  Io io;
  o.out = dir / "a";
  ASSERT_EQ(cmd_run(cfg, o, io.out, io.err), 0);
  o.out = dir / "b";
  ASSERT_EQ(cmd_run(cfg, o, io.out, io.err), 0);
  EXPECT_EQ(slurp(dir / "a" / "timeseries.csv"), slurp(dir / "b" / "timeseries.csv"));
  EXPECT_EQ(slurp(dir / "a" / "extras.csv"), slurp(dir / "b" / "extras.csv"));

  const LoadedConfig lc = load_config(cfg, 0);
  const Trajectory direct = run(lc.run);
  const LoadedRun back = read_run(dir / "a");
  ASSERT_EQ(back.traj.records.size(), direct.records.size());
  for (std::size_t k = 0; k < direct.records.size(); ++k) {
    EXPECT_EQ(back.traj.records[k].s_max, direct.records[k].s_max);
    EXPECT_EQ(back.traj.records[k].lpn2, direct.records[k].lpn2);
    EXPECT_EQ(back.traj.records[k].step, direct.records[k].step);
  }
  EXPECT_EQ(back.traj.dts, direct.dts);
  ASSERT_FALSE(back.traj.snapshots.empty());
  EXPECT_EQ(back.traj.snapshots.back().record + 1, back.traj.records.size());
  for (const Snapshot& s : back.traj.snapshots) {
    EXPECT_TRUE(s.record == 0 || s.record % 10 == 0 || s.record + 1 == back.traj.records.size());
  }
  EXPECT_EQ(back.background.s0().values().size(), 32u);
}

TEST(Verify, EmptyListAndMissingInput) {
  const fs::path dir = scratch("verify_empty");
  const fs::path cfg = write_json(dir / "neg.json", small_negative(0.5));
  CommonOptions o;
  o.out = dir / "out";
  o.checks = std::vector<std::string>{};
  Io io;
  EXPECT_EQ(cmd_verify(cfg, o, io.out, io.err), 0) << io.err.str();
  const json report = json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_TRUE(report.at("checks").empty());

  Io io2;
  EXPECT_EQ(cmd_verify(dir / "nope.json", CommonOptions{}, io2.out, io2.err), 1);
  o.checks = std::vector<std::string>{"bogus"};
  Io io3;
  EXPECT_EQ(cmd_verify(cfg, o, io3.out, io3.err), 1);
}

TEST(Verify, PassingRunAndCraftedViolation) {
  const fs::path dir = scratch("verify_runs");
  json doc = small_negative(20.0);
  doc["checks"] = {"minmax", "u_bounds", "stationary"};
  const fs::path cfg = write_json(dir / "neg.json", doc);
  CommonOptions o;
  o.out = dir / "run";
  Io io;
  ASSERT_EQ(cmd_run(cfg, o, io.out, io.err), 0);
  CommonOptions v;
  Io good;
  EXPECT_EQ(cmd_verify(dir / "run", v, good.out, good.err), 0) << good.out.str() << good.err.str();

  // push S_max upward in the stored time series
  const fs::path ts = dir / "run" / "timeseries.csv";
  std::istringstream in(slurp(ts));
  std::string out, line;
  std::getline(in, line);
  out += line + '\n';
  int row = 0;
  while (std::getline(in, line)) {
    if (row++ == 5) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      cells[3] = "-0.5";
      line.clear();
      for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    }
    out += line + '\n';
  }
  write_text(ts, out);
  Io bad;
  EXPECT_EQ(cmd_verify(dir / "run", v, bad.out, bad.err), 2) << bad.out.str();
  EXPECT_NE(bad.out.str().find("fail"), std::string::npos);
}

TEST(Sweep, TwoByTwo) {
  const fs::path dir = scratch("sweep");
  const json plan{{"base", small_negative(2.0)},
                  {"vary", {{"grid.points", {16, 32}}, {"f", {"classical", "linear:-2"}}}},
                  {"jobs", 2}};
  const fs::path p = write_json(dir / "plan.json", plan);
  CommonOptions o;
  o.out = dir / "out";
  Io io;
  EXPECT_EQ(cmd_sweep(p, o, io.out, io.err), 0) << io.err.str();
  for (const char* id : {"run_000", "run_001", "run_002", "run_003"}) {
    EXPECT_TRUE(is_run_dir(dir / "out" / id)) << id;
  }
  EXPECT_EQ(line_count(dir / "out" / "sweep_summary.csv"), 5u);
  // axes in key order, last axis fastest
  const LoadedRun second = read_run(dir / "out" / "run_001");
  EXPECT_EQ(second.summary.at("config").at("f"), "classical");
  EXPECT_EQ(second.background.grid().size(), 32u);
  const LoadedRun third = read_run(dir / "out" / "run_002");
  EXPECT_EQ(third.summary.at("config").at("f"), "linear:-2");
  EXPECT_EQ(third.background.grid().size(), 16u);

  o.out = dir / "serial";
  o.jobs = 1;
  Io io2;
  ASSERT_EQ(cmd_sweep(p, o, io2.out, io2.err), 0);
  EXPECT_EQ(slurp(dir / "out" / "sweep_summary.csv"), slurp(dir / "serial" / "sweep_summary.csv"));
}

TEST(Sweep, BadPlan) {
  const fs::path dir = scratch("sweep_bad");
  const fs::path p = write_json(dir / "plan.json", json{{"base", small_negative()}, {"vary", {{"f", json::array()}}}});
  Io io;
  EXPECT_EQ(cmd_sweep(p, CommonOptions{}, io.out, io.err), 1);
}

TEST(Compare, ShiftAndRescale) {
  const fs::path dir = scratch("compare");
  const fs::path a = write_json(dir / "a.json", small_negative(1.0));
  json shifted = small_negative(1.0);
  shifted["f"] = {{"name", "classical"}, {"shift", 5.0}};
  const fs::path b = write_json(dir / "b.json", shifted);
  json raw = small_negative(1.0);
  raw["time"]["normalized"] = false;
  const fs::path c = write_json(dir / "c.json", raw);

  CommonOptions o;
  o.out = dir / "cmp";
  Io io;
  EXPECT_EQ(cmd_compare(a, b, "shift", o, io.out, io.err), 0) << io.out.str() << io.err.str();
  EXPECT_NE(io.out.str().find("PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "cmp" / "compare.json"));

  Io io2;
  EXPECT_EQ(cmd_compare(a, c, "rescale", CommonOptions{}, io2.out, io2.err), 0) << io2.out.str() << io2.err.str();

  // a different background is not a shift
  json other = small_negative(1.0);
  other["background"] = "sinusoidal:-1.5,0.3,0";
  const fs::path d = write_json(dir / "d.json", other);
  Io io3;
  EXPECT_EQ(cmd_compare(a, d, "shift", CommonOptions{}, io3.out, io3.err), 2);

  Io io4;
  EXPECT_EQ(cmd_compare(a, b, "sideways", CommonOptions{}, io4.out, io4.err), 1);
}
