#include "conflow_cli/persist.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "conflow/error.hpp"
#include "conflow/field_io.hpp"

namespace conflow::cli {

namespace fs = std::filesystem;

const char* const kTimeseriesHeader = "t,dt,Smin,Smax,A,sigma,vol,fSA_sup,lp2,lpn2,umin,umax";

namespace {

constexpr const char* kExtrasHeader =
    "step,lp1,dudt_sup,vol_drift,flat_integral,step3,u_margin,fp_margin";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_row(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += fmt17(v);
    first = false;
  }
  line += '\n';
  return line;
}

std::string snapshot_name(std::size_t record) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%06zu.field", record);
  return buf;
}

std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(ErrorKind::io, "unexpected header in '" + path.string() + "'");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

Termination parse_termination(const std::string& s) {
  for (Termination t : {Termination::time_reached, Termination::stationary, Termination::blowup,
                        Termination::f_domain_violation, Termination::positivity_lost}) {
    if (s == to_string(t)) return t;
  }
  throw Error(ErrorKind::io, "unknown termination '" + s + "'");
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

json summary_json(const Trajectory& traj, const json& config_echo) {
  json s;
  s["termination"] = to_string(traj.termination);
  s["message"] = traj.message;
  s["normalized"] = traj.normalized;
  s["steps"] = traj.steps;
  s["records"] = traj.records.size();
  if (!traj.records.empty()) {
    const Record& r = traj.records.back();
    s["final"] = {{"t", r.t},           {"Smin", r.s_min},      {"Smax", r.s_max},
                  {"A", r.a},           {"sigma", r.sigma},     {"vol", r.vol},
                  {"fSA_sup", r.fsa_sup}, {"umin", r.u_min},    {"umax", r.u_max},
                  {"vol_drift", r.vol_drift}};
  }
  s["config"] = config_echo;
  return s;
}

void write_run(const fs::path& dir, const Trajectory& traj, const Background& bg,
               const json& config_echo, int cadence) {
  fs::create_directories(dir / "snapshots");

  std::string ts = std::string(kTimeseriesHeader) + '\n';
  std::string ex = std::string(kExtrasHeader) + '\n';
  for (const Record& r : traj.records) {
    ts += join_row({r.t, r.dt, r.s_min, r.s_max, r.a, r.sigma, r.vol, r.fsa_sup, r.lp2, r.lpn2,
                    r.u_min, r.u_max});
    ex += join_row({static_cast<double>(r.step), r.lp1, r.dudt_sup, r.vol_drift, r.flat_integral,
                    r.step3, r.u_margin, r.fp_margin});
  }
  write_text(dir / "timeseries.csv", ts);
  write_text(dir / "extras.csv", ex);

  std::string dts = "dt\n";
  for (double dt : traj.dts) dts += fmt17(dt) + '\n';
  write_text(dir / "dts.csv", dts);

  write_field((dir / "background.field").string(), bg.s0());

  json names = json::array();
  const std::size_t last = traj.records.empty() ? 0 : traj.records.size() - 1;
  for (const Snapshot& s : traj.snapshots) {
    const bool keep = s.record == 0 || s.record == last ||
                      (cadence > 0 && s.record % static_cast<std::size_t>(cadence) == 0);
    if (!keep) continue;
    const std::string name = snapshot_name(s.record);
    write_field((dir / "snapshots" / name).string(), s.u);
    names.push_back({{"record", s.record}, {"t", s.t}, {"file", "snapshots/" + name}});
  }

  json summary = summary_json(traj, config_echo);
  summary["snapshots"] = names;
  write_text(dir / "summary.json", summary.dump(2) + '\n');
}

bool is_run_dir(const fs::path& path) {
  return fs::is_directory(path) && fs::exists(path / "summary.json") &&
         fs::exists(path / "timeseries.csv");
}

LoadedRun read_run(const fs::path& dir) {
  if (!is_run_dir(dir)) throw Error(ErrorKind::io, "'" + dir.string() + "' is not a run directory");
  LoadedRun out;
  out.dir = dir;
  {
    std::ifstream in(dir / "summary.json");
    try {
      out.summary = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::io, std::string("bad summary.json: ") + e.what());
    }
  }
  out.background = Background(read_field((dir / "background.field").string()));
  const GridPtr grid = out.background.grid_ptr();

  const auto ts = read_csv(dir / "timeseries.csv", kTimeseriesHeader);
  const auto ex = read_csv(dir / "extras.csv", kExtrasHeader);
  if (ts.size() != ex.size()) throw Error(ErrorKind::io, "timeseries and extras differ in length");

  Trajectory& tr = out.traj;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& a = ts[i];
    const auto& b = ex[i];
    if (a.size() != 12 || b.size() != 8) throw Error(ErrorKind::io, "malformed CSV row");
    Record r;
    r.t = a[0];
    r.dt = a[1];
    r.s_min = a[2];
    r.s_max = a[3];
    r.a = a[4];
    r.sigma = a[5];
    r.vol = a[6];
    r.fsa_sup = a[7];
    r.lp2 = a[8];
    r.lpn2 = a[9];
    r.u_min = a[10];
    r.u_max = a[11];
    r.step = static_cast<std::size_t>(b[0]);
    r.lp1 = b[1];
    r.dudt_sup = b[2];
    r.vol_drift = b[3];
    r.flat_integral = b[4];
    r.step3 = b[5];
    r.u_margin = b[6];
    r.fp_margin = b[7];
    tr.records.push_back(r);
  }
  if (fs::exists(dir / "dts.csv")) {
    std::ifstream in(dir / "dts.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (!line.empty()) tr.dts.push_back(std::strtod(line.c_str(), nullptr));
    }
  }
  const json& s = out.summary;
  tr.termination = parse_termination(s.value("termination", "time_reached"));
  tr.message = s.value("message", "");
  tr.normalized = s.value("normalized", true);
  tr.steps = s.value("steps", std::size_t{0});
  for (const json& snap : s.value("snapshots", json::array())) {
    const ScalarField u = read_field((dir / snap.at("file").get<std::string>()).string());
    if (!(u.grid().spec() == grid->spec())) throw Error(ErrorKind::io, "snapshot grid mismatch");
    std::vector<double> values(u.values().begin(), u.values().end());
    tr.snapshots.push_back(
        {snap.at("record").get<std::size_t>(), snap.at("t").get<double>(), ScalarField(grid, values)});
  }
  return out;
}

json absolutize_config(const json& doc, const fs::path& base_dir) {
  json out = doc;
  for (const char* key : {"background", "u0"}) {
    if (!out.contains(key) || !out[key].is_string()) continue;
    const std::string spec = out[key].get<std::string>();
    if (spec.rfind("file:", 0) != 0) continue;
    fs::path p(spec.substr(5));
    if (p.is_relative()) p = fs::absolute(base_dir / p);
    out[key] = "file:" + p.string();
  }
  return out;
}

}  // namespace conflow::cli
