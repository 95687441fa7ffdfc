#include "conflow_cli/config.hpp"

#include <fstream>
#include <numbers>
#include <set>

#include "conflow/error.hpp"

namespace conflow::cli {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::config, msg); }

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("config key '") + key + "' has the wrong type");
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    bad(where + " needs a numeric '" + key + "'");
  }
  return obj.at(key).get<double>();
}

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) bad("unknown key '" + item.key() + "' in " + where);
  }
}

std::string field_spec(const json& value, const std::filesystem::path& base_dir, const std::string& where) {
  if (!value.is_string()) bad(where + " must be a field spec string");
  std::string spec = value.get<std::string>();
  if (spec.rfind("file:", 0) == 0) {
    std::filesystem::path p(spec.substr(5));
    if (p.is_relative()) p = base_dir / p;
    spec = "file:" + p.string();
  }
  return spec;
}

}  // namespace

FSpec parse_f(const json& spec, std::uint64_t seed) {
  FSpec f;
  double offset = 0.0;
  if (spec.is_string()) {
    f = fzoo::by_name(spec.get<std::string>());
  } else if (spec.is_object()) {
    const std::string name = get_or<std::string>(spec, "name", "");
    offset = get_or<double>(spec, "shift", 0.0);
    if (name == "classical") {
      allow_keys(spec, {"name", "shift"}, "f");
      f = fzoo::classical();
    } else if (name == "linear") {
      allow_keys(spec, {"name", "slope", "shift"}, "f");
      f = fzoo::linear(require_number(spec, "slope", "f linear"));
    } else if (name == "power") {
      allow_keys(spec, {"name", "kappa", "shift"}, "f");
      f = fzoo::power(require_number(spec, "kappa", "f power"));
    } else if (name == "reciprocal") {
      allow_keys(spec, {"name", "offset", "exponent", "shift"}, "f");
      f = fzoo::reciprocal(get_or<double>(spec, "offset", 0.0), get_or<double>(spec, "exponent", 1.0));
    } else if (name == "expdecay") {
      allow_keys(spec, {"name", "rate", "shift"}, "f");
      f = fzoo::expdecay(require_number(spec, "rate", "f expdecay"));
    } else if (name == "table") {
      allow_keys(spec, {"name", "x", "f", "shift"}, "f");
      f = fzoo::from_table(get_or<std::vector<double>>(spec, "x", {}),
                           get_or<std::vector<double>>(spec, "f", {}));
    } else {
      bad("unknown f name '" + name + "'");
    }
  } else {
    bad("f must be a string or an object");
  }
  if (offset != 0.0) f = shift(f, offset);
  certify(f, CertifyOptions{10000, seed});
  return f;
}

LoadedConfig parse_config(const json& doc, const std::filesystem::path& base_dir, std::uint64_t seed) {
  if (!doc.is_object()) bad("config must be a JSON object");
  allow_keys(doc, {"grid", "background", "u0", "f", "time", "outputs", "checks", "name"}, "config");
  for (const char* key : {"grid", "background", "f"}) {
    if (!doc.contains(key)) bad(std::string("config is missing '") + key + "'");
  }
  LoadedConfig out;
  out.doc = doc;

  const json& g = doc.at("grid");
  allow_keys(g, {"n", "points", "period"}, "grid");
  GridSpec spec;
  spec.ambient_n = get_or<int>(g, "n", 4);
  if (!g.contains("points")) bad("grid needs 'points'");
  if (g.at("points").is_number()) {
    spec.points = {g.at("points").get<int>()};
  } else {
    spec.points = get_or<std::vector<int>>(g, "points", {});
  }
  if (!g.contains("period")) {
    spec.periods.assign(spec.points.size(), 2.0 * std::numbers::pi);
  } else if (g.at("period").is_number()) {
    spec.periods.assign(spec.points.size(), g.at("period").get<double>());
  } else {
    spec.periods = get_or<std::vector<double>>(g, "period", {});
  }
  GridPtr grid;
  try {
    grid = make_grid(spec);
  } catch (const Error& e) {
    bad(std::string("invalid grid: ") + e.what());
  }

  RunConfig& run = out.run;
  run.background = Background::from_spec(grid, field_spec(doc.at("background"), base_dir, "background"));
  run.u0 = make_field(grid, field_spec(doc.value("u0", json("constant:1")), base_dir, "u0"));
  run.f = parse_f(doc.at("f"), seed);

  const json time = doc.value("time", json::object());
  allow_keys(time, {"T", "scheme", "dt", "stop_tol", "renormalize", "normalized", "log_cadence", "max_steps"},
             "time");
  run.t_final = get_or<double>(time, "T", 10.0);
  run.scheme = parse_scheme(get_or<std::string>(time, "scheme", "rk4"));
  run.stop_tol = get_or<double>(time, "stop_tol", 1e-8);
  run.renormalize_volume = get_or<bool>(time, "renormalize", true);
  run.normalized = get_or<bool>(time, "normalized", true);
  run.log_cadence = get_or<int>(time, "log_cadence", 1);
  run.max_steps = get_or<std::size_t>(time, "max_steps", run.max_steps);
  const json dt = time.value("dt", json::object());
  if (dt.is_number()) {
    run.dt = DtPolicy::fixed(dt.get<double>());
  } else {
    allow_keys(dt, {"policy", "safety", "value"}, "time.dt");
    const std::string policy = get_or<std::string>(dt, "policy", "adaptive");
    if (policy == "adaptive") {
      run.dt = DtPolicy::adaptive(get_or<double>(dt, "safety", 0.8));
    } else if (policy == "fixed") {
      run.dt = DtPolicy::fixed(require_number(dt, "value", "time.dt fixed"));
    } else {
      bad("unknown dt policy '" + policy + "'");
    }
  }

  const json outputs = doc.value("outputs", json::object());
  allow_keys(outputs, {"dir", "snapshot_cadence"}, "outputs");
  out.out_dir = get_or<std::string>(outputs, "dir", "");
  out.output_snapshot_cadence = get_or<int>(outputs, "snapshot_cadence", 0);
  if (out.output_snapshot_cadence < 0) bad("outputs.snapshot_cadence must be >= 0");
  run.snapshot_cadence = out.output_snapshot_cadence;

  const json checks = doc.value("checks", json::object());
  if (checks.is_array()) {
    out.checks = checks.get<std::vector<std::string>>();
  } else {
    allow_keys(checks, {"list", "p", "tau_final", "minmax_eta"}, "checks");
    out.checks = get_or<std::vector<std::string>>(checks, "list", {});
    out.p_list = get_or<std::vector<double>>(checks, "p", {2.0});
    if (checks.contains("tau_final")) out.tau_final = get_or<double>(checks, "tau_final", 0.0);
    out.minmax_eta = get_or<double>(checks, "minmax_eta", 1e-6);
  }
  out.checks = normalize_checks(out.checks);

  validate(run);
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  LoadedConfig cfg = parse_config(doc, path.parent_path(), seed);
  cfg.source = path;
  return cfg;
}

const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {"minmax",       "decay",  "u_bounds",
                                                 "identities",   "lnhalf", "positive_S",
                                                 "flat_identity", "rescale", "stationary"};
  return names;
}

std::vector<std::string> normalize_checks(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& a : all_check_names()) add(a);
    } else if (std::find(all_check_names().begin(), all_check_names().end(), n) !=
               all_check_names().end()) {
      add(n);
    } else {
      bad("unknown check '" + n + "'");
    }
  }
  return out;
}

}  // namespace conflow::cli
