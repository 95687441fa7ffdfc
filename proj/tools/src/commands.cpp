#include "conflow_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "conflow/error.hpp"
#include "conflow_cli/persist.hpp"

namespace conflow::cli {

namespace fs = std::filesystem;

namespace {

json entries_json(const TheoremReport::Entries& entries) {
  json out = json::object();
  for (const auto& [k, v] : entries) out[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// A loaded input: either a config to be run or an existing run directory.
struct Input {
  std::optional<LoadedConfig> config;
  std::optional<LoadedRun> run;
};

Input load_input(const fs::path& path, std::uint64_t seed) {
  if (!fs::exists(path)) throw Error(ErrorKind::io, "input '" + path.string() + "' does not exist");
  Input in;
  if (is_run_dir(path)) {
    in.run = read_run(path);
    const json& echo = in.run->summary.value("config", json());
    if (echo.is_object() && !echo.empty()) in.config = parse_config(echo, path, seed);
  } else if (fs::is_directory(path)) {
    throw Error(ErrorKind::io, "'" + path.string() + "' is not a run directory");
  } else {
    in.config = load_config(path, seed);
  }
  return in;
}

void print_table(std::ostream& out, const std::vector<TheoremReport>& reports) {
  out << "check           verdict       notes\n";
  for (const auto& r : reports) {
    char line[64];
    std::snprintf(line, sizeof line, "%-15s %-13s ", r.id.c_str(), to_string(r.verdict));
    out << line;
    for (std::size_t i = 0; i < r.notes.size(); ++i) out << (i ? "; " : "") << r.notes[i];
    out << '\n';
  }
}

void set_path(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorKind::config, "empty vary path");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw Error(ErrorKind::config, "vary path '" + dotted + "' crosses a non-object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

}  // namespace

fs::path resolve_output_dir(const CommonOptions& opts, const std::string& config_dir_entry,
                            const std::string& stem) {
  if (opts.out) return *opts.out;
  if (!config_dir_entry.empty()) return config_dir_entry;
  const char* root = std::getenv("CONFLOW_OUT");
  return fs::path(root && *root ? root : "conflow_runs") / stem;
}

int exit_code_for(Termination t) noexcept {
  return t == Termination::time_reached || t == Termination::stationary ? kOk : kFailure;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

json report_json(const TheoremReport& r) {
  return {{"id", r.id},
          {"verdict", to_string(r.verdict)},
          {"measured", entries_json(r.measured)},
          {"predicted", entries_json(r.predicted)},
          {"tolerances", entries_json(r.tolerances)},
          {"notes", r.notes},
          {"first_record", r.first_record},
          {"last_record", r.last_record},
          {"t_begin", r.t_begin},
          {"t_end", r.t_end}};
}

std::vector<TheoremReport> run_checks(const CheckContext& ctx, const std::vector<std::string>& checks) {
  std::vector<TheoremReport> out;
  const Trajectory& tr = *ctx.traj;
  const Background& bg = *ctx.background;
  const FSpec& f = *ctx.f;
  for (const std::string& name : normalize_checks(checks)) {
    if (name == "minmax") {
      out.push_back(check_minmax_principle(tr, bg, f, ctx.minmax_eta));
    } else if (name == "decay") {
      out.push_back(compare_decay(fit_decay(tr), tr, bg, f));
    } else if (name == "u_bounds") {
      out.push_back(check_u_bounds(tr, bg, f));
    } else if (name == "identities") {
      out.push_back(check_evolution_identities(tr, bg, f, ctx.p_list));
    } else if (name == "lnhalf") {
      out.push_back(check_Lnhalf_monotone(tr, bg));
    } else if (name == "positive_S") {
      out.push_back(check_positive_S_bounds(tr, bg, f));
    } else if (name == "flat_identity") {
      out.push_back(check_flat_identity(tr, bg));
    } else if (name == "stationary") {
      out.push_back(check_stationary_limit(tr, bg, f));
    } else if (name == "rescale") {
      if (!ctx.config) {
        TheoremReport r;
        r.id = "rescale";
        r.notes.push_back("needs a run configuration");
        out.push_back(r);
      } else {
        out.push_back(check_rescale_equivalence(*ctx.config, ctx.tau_final.value_or(ctx.config->t_final)));
      }
    }
  }
  return out;
}

int cmd_run(const fs::path& config_path, const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  LoadedConfig cfg;
  try {
    cfg = load_config(config_path, opts.seed);
  } catch (const Error& e) {
    err << "conflow run: " << e.what() << '\n';
    return kUsage;
  }
  try {
    const Trajectory traj = run(cfg.run);
    const fs::path dir = resolve_output_dir(opts, cfg.out_dir, config_path.stem().string());
    write_run(dir, traj, cfg.run.background,
              absolutize_config(cfg.doc, config_path.parent_path()), cfg.output_snapshot_cadence);
    const Record& last = traj.records.back();
    out << "termination " << to_string(traj.termination) << "  steps " << traj.steps << "  t "
        << fmt(last.t) << "  sup|f(S)-A| " << fmt(last.fsa_sup) << "  -> " << dir.string() << '\n';
    if (!traj.message.empty()) out << traj.message << '\n';
    return exit_code_for(traj.termination);
  } catch (const Error& e) {
    err << "conflow run: " << e.what() << '\n';
    return e.kind() == ErrorKind::config ? kUsage : kFailure;
  }
}

int cmd_verify(const fs::path& input, const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  Input in;
  try {
    in = load_input(input, opts.seed);
  } catch (const Error& e) {
    err << "conflow verify: " << e.what() << '\n';
    return kUsage;
  }
  std::vector<std::string> checks;
  try {
    if (opts.checks) {
      checks = normalize_checks(*opts.checks);
    } else if (in.config && in.config->doc.contains("checks")) {
      checks = in.config->checks;
    } else {
      checks = all_check_names();
    }
  } catch (const Error& e) {
    err << "conflow verify: " << e.what() << '\n';
    return kUsage;
  }

  try {
    CheckContext ctx;
    Trajectory traj;
    Background bg;
    FSpec f;
    fs::path dir;
    if (in.run) {
      traj = in.run->traj;
      bg = in.run->background;
      dir = opts.out.value_or(input);
      if (!in.config) throw Error(ErrorKind::config, "run directory has no config echo");
      f = in.config->run.f;
    } else {
      RunConfig rc = in.config->run;
      if (!checks.empty()) rc.snapshot_cadence = 1;
      traj = run(rc);
      bg = rc.background;
      f = rc.f;
      dir = resolve_output_dir(opts, in.config->out_dir, input.stem().string());
    }
    ctx.traj = &traj;
    ctx.background = &bg;
    ctx.f = &f;
    if (in.config) {
      ctx.config = &in.config->run;
      ctx.p_list = in.config->p_list;
      ctx.minmax_eta = in.config->minmax_eta;
      ctx.tau_final = in.config->tau_final;
    }
    const std::vector<TheoremReport> reports = run_checks(ctx, checks);

    json report;
    report["input"] = input.string();
    report["termination"] = to_string(traj.termination);
    report["checks"] = json::array();
    int failed = 0;
    for (const auto& r : reports) {
      report["checks"].push_back(report_json(r));
      failed += r.failed() ? 1 : 0;
    }
    report["failed"] = failed;
    fs::create_directories(dir);
    write_text(dir / "report.json", report.dump(2) + '\n');
    print_table(out, reports);
    out << "report -> " << (dir / "report.json").string() << '\n';
    return failed > 0 ? kFailure : kOk;
  } catch (const Error& e) {
    err << "conflow verify: " << e.what() << '\n';
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::io ? kUsage : kFailure;
  }
}

int cmd_sweep(const fs::path& plan_path, const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  json plan;
  json base;
  fs::path base_dir = plan_path.parent_path();
  try {
    plan = read_json_file(plan_path);
    if (!plan.is_object() || !plan.contains("base")) throw Error(ErrorKind::config, "plan needs 'base'");
    if (plan["base"].is_string()) {
      const fs::path p = base_dir / plan["base"].get<std::string>();
      base = read_json_file(p);
      base_dir = p.parent_path();
    } else {
      base = plan["base"];
    }
  } catch (const Error& e) {
    err << "conflow sweep: " << e.what() << '\n';
    return kUsage;
  }

  // Cartesian product over the vary axes, in key order.
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  const json vary = plan.value("vary", json::object());
  for (const auto& item : vary.items()) {
    if (!item.value().is_array() || item.value().empty()) {
      err << "conflow sweep: vary '" << item.key() << "' must be a non-empty list\n";
      return kUsage;
    }
    axes.push_back({item.key(), item.value().get<std::vector<json>>()});
  }
  struct Variant {
    std::string id, label;
    json doc;
  };
  std::vector<Variant> variants;
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.second.size();
  for (std::size_t k = 0; k < total; ++k) {
    Variant v;
    v.doc = base;
    std::size_t rem = k;
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = rem % axes[a].second.size();
      rem /= axes[a].second.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const json& value = axes[a].second[idx[a]];
      set_path(v.doc, axes[a].first, value);
      if (!v.label.empty()) v.label += ' ';
      v.label += axes[a].first + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
    }
    char id[32];
    std::snprintf(id, sizeof id, "run_%03zu", k);
    v.id = id;
    variants.push_back(std::move(v));
  }

  const fs::path root =
      opts.out ? *opts.out
               : (plan.contains("out") ? fs::path(plan["out"].get<std::string>())
                                       : resolve_output_dir(opts, "", plan_path.stem().string()));
  int jobs = opts.jobs > 0 ? opts.jobs : plan.value("jobs", 1);
  jobs = std::clamp(jobs, 1, static_cast<int>(variants.size()));

  struct Outcome {
    bool ok = false;
    std::string termination = "error";
    std::size_t steps = 0;
    double t_end = std::nan("");
    double b_fit = std::nan(""), b_pred = std::nan(""), residual = std::nan("");
    std::string error;
  };
  std::vector<Outcome> outcomes(variants.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < variants.size(); i = next++) {
      Outcome& o = outcomes[i];
      try {
        json doc = variants[i].doc;
        doc.erase("outputs");
        const LoadedConfig cfg = parse_config(doc, base_dir, opts.seed);
        const Trajectory traj = run(cfg.run);
        write_run(root / variants[i].id, traj, cfg.run.background, absolutize_config(doc, base_dir),
                  cfg.output_snapshot_cadence);
        o.termination = to_string(traj.termination);
        o.ok = exit_code_for(traj.termination) == kOk;
        o.steps = traj.steps;
        o.t_end = traj.records.back().t;
        const Background& bg = cfg.run.background;
        if (bg.case_tag() == CurvatureCase::negative) {
          o.b_pred = predict_decay(bg.s0_min(), bg.s0_max(), cfg.run.f).b;
        }
        const DecayFit fit = fit_decay(traj);
        if (fit.samples >= 3) {
          o.b_fit = fit.b_fit;
          o.residual = fit.residual;
        }
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(root);
  std::string csv = "id,label,termination,steps,t_end,B_fit,B_pred,fit_residual\n";
  int failures = 0;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const Outcome& o = outcomes[i];
    std::string label = variants[i].label;
    std::replace(label.begin(), label.end(), ',', ';');
    std::replace(label.begin(), label.end(), '"', '\'');
    csv += variants[i].id + ',' + label + ',' + o.termination + ',' + std::to_string(o.steps) + ',' +
           fmt(o.t_end, "%.17g") + ',' + fmt(o.b_fit, "%.17g") + ',' + fmt(o.b_pred, "%.17g") + ',' +
           fmt(o.residual, "%.17g") + '\n';
    out << variants[i].id << "  " << o.termination << "  " << variants[i].label << '\n';
    if (!o.error.empty()) err << variants[i].id << ": " << o.error << '\n';
    failures += o.ok ? 0 : 1;
  }
  write_text(root / "sweep_summary.csv", csv);
  out << variants.size() << " runs, " << failures << " failed -> " << (root / "sweep_summary.csv").string()
      << '\n';
  return failures > 0 ? kFailure : kOk;
}

int cmd_compare(const fs::path& a, const fs::path& b, const std::string& mode, const CommonOptions& opts,
                std::ostream& out, std::ostream& err) {
  if (mode != "shift" && mode != "rescale") {
    err << "conflow compare: mode must be shift or rescale\n";
    return kUsage;
  }
  Input ia, ib;
  try {
    ia = load_input(a, opts.seed);
    ib = load_input(b, opts.seed);
    if (ia.run.has_value() != ib.run.has_value()) {
      throw Error(ErrorKind::config, "compare needs two configs or two run directories");
    }
  } catch (const Error& e) {
    err << "conflow compare: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const bool from_configs = !ia.run.has_value();
    const double tol = mode == "shift" ? 1e-10 : 1e-4;
    Trajectory ta, tb;
    double worst = 0.0;
    std::size_t compared = 0;
    std::string note;

    if (mode == "shift") {
      if (from_configs) {
        RunConfig ca = ia.config->run;
        ca.snapshot_cadence = 1;
        ta = run(ca);
        RunConfig cb = ib.config->run;
        cb.snapshot_cadence = 1;
        cb.dt = DtPolicy::replay(ta.dts);
        tb = run(cb);
      } else {
        ta = ia.run->traj;
        tb = ib.run->traj;
      }
      if (ta.snapshots.size() != tb.snapshots.size()) note = "snapshot counts differ";
      const std::size_t m = std::min(ta.snapshots.size(), tb.snapshots.size());
      for (std::size_t k = 0; k < m; ++k) {
        const Snapshot& sa = ta.snapshots[k];
        const Snapshot& sb = tb.snapshots[k];
        if (sa.record != sb.record || std::fabs(sa.t - sb.t) > tol * std::max(1.0, std::fabs(sa.t))) {
          note = "snapshot times differ";
          break;
        }
        for (std::size_t i = 0; i < sa.u.size(); ++i) worst = std::max(worst, std::fabs(sa.u[i] - sb.u[i]));
        ++compared;
      }
    } else {
      Background bg_b;
      FSpec f_b;
      if (from_configs) {
        RunConfig ca = ia.config->run;
        ca.normalized = true;
        ca.log_cadence = 1;
        ca.snapshot_cadence = 1;
        ta = run(ca);
        RunConfig cb = ib.config->run;
        if (!cb.f.alpha_homogeneous) throw Error(ErrorKind::not_homogeneous, "f of B declares no degree");
        cb.normalized = false;
        cb.log_cadence = 1;
        cb.snapshot_cadence = 1;
        cb.t_final = std::numeric_limits<double>::max();
        cb.stop_when = rescaled_time_stop(cb.background, *cb.f.alpha_homogeneous, ta.records.back().t);
        tb = run(cb);
        bg_b = cb.background;
        f_b = cb.f;
      } else {
        ta = ia.run->traj;
        tb = ib.run->traj;
        bg_b = ib.run->background;
        if (!ib.config) throw Error(ErrorKind::config, "run B has no config echo");
        f_b = ib.config->run.f;
      }
      const Trajectory rescaled = hamilton_rescale(bg_b, tb, f_b);
      const double tau_end = rescaled.records.back().t;
      for (const Snapshot& s : ta.snapshots) {
        if (s.t > tau_end * (1 + 1e-12)) break;
        const ScalarField v = interpolate_u(rescaled, s.t);
        for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::fabs(v[i] - s.u[i]));
        ++compared;
      }
    }

    const bool pass = note.empty() && compared > 0 && worst <= tol;
    json result = {{"mode", mode},          {"a", a.string()},    {"b", b.string()},
                   {"sup_norm", worst},     {"tolerance", tol},   {"compared_snapshots", compared},
                   {"verdict", pass ? "pass" : "fail"}, {"note", note}};
    if (opts.out) {
      fs::create_directories(*opts.out);
      write_text(*opts.out / "compare.json", result.dump(2) + '\n');
    }
    out << "compare " << mode << ": sup|u_a - u_b| = " << fmt(worst, "%.3e") << " over " << compared
        << " snapshots, tolerance " << fmt(tol, "%.0e") << " -> " << (pass ? "PASS" : "FAIL");
    if (!note.empty()) out << " (" << note << ')';
    out << '\n';
    return pass ? kOk : kFailure;
  } catch (const Error& e) {
    err << "conflow compare: " << e.what() << '\n';
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::io ? kUsage : kFailure;
  }
}

}  // namespace conflow::cli
