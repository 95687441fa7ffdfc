#include "conflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "conflow/error.hpp"
#include "summation.hpp"

namespace conflow {

const char* to_string(Scheme s) noexcept { return s == Scheme::euler ? "euler" : "rk4"; }

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::time_reached: return "time_reached";
    case Termination::stationary: return "stationary";
    case Termination::blowup: return "blowup";
    case Termination::f_domain_violation: return "f_domain_violation";
    case Termination::positivity_lost: return "positivity_lost";
  }
  return "time_reached";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk4") return Scheme::rk4;
  throw Error(ErrorKind::config, "unknown scheme '" + std::string(name) + "'");
}

Evaluation evaluate(const Background& bg, const ScalarField& u, const FSpec& f) {
  Evaluation e;
  e.s = scalar_curvature(bg, u);
  require_in_domain(f, e.s);
  e.fs = e.s.map([&](double x) { return f(x); });
  for (std::size_t i = 0; i < e.fs.size(); ++i) {
    if (!std::isfinite(e.fs[i])) {
      throw Error(ErrorKind::f_domain_violation, "f(S) is not finite at S = " + std::to_string(e.s[i]));
    }
  }
  const double gamma = bg.constants().gamma;
  const double weight = u.grid().weight();
  e.w = u.map([&](double v) { return std::pow(v, gamma) * weight; });
  detail::CompensatedSum vol, fa, sa;
  for (std::size_t i = 0; i < u.size(); ++i) {
    vol.add(e.w[i]);
    fa.add(e.fs[i] * e.w[i]);
    sa.add(e.s[i] * e.w[i]);
  }
  e.vol = vol.value();
  e.a = fa.value() / e.vol;
  e.sigma = sa.value() / e.vol;
  return e;
}

ScalarField rhs_normalized(const Background& bg, const ScalarField& u, const FSpec& f) {
  const Evaluation e = evaluate(bg, u, f);
  const double rate = bg.constants().rate;
  ScalarField out(u);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = rate * (e.fs[i] - e.a) * u[i];
  return out;
}

ScalarField rhs_nonnormalized(const Background& bg, const ScalarField& u, const FSpec& f) {
  const ScalarField s = scalar_curvature(bg, u);
  require_in_domain(f, s);
  const double rate = bg.constants().rate;
  ScalarField out(u);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = rate * f(s[i]) * u[i];
  return out;
}

ParabolicMargins check_parabolic_validity(const Background& bg, const ScalarField& u,
                                          const FSpec& f) {
  ParabolicMargins m;
  m.u_margin = field_min(u);
  const ScalarField s = scalar_curvature(bg, u);
  require_in_domain(f, s);
  double fp = std::numeric_limits<double>::infinity();
  for (double x : s.values()) fp = std::min(fp, -f.fp(x));
  const double hull = check_decreasing(f, Interval::closed(field_min(s), field_max(s)), 64);
  m.fp_margin = std::min(fp, hull);
  return m;
}

double stable_dt(const Background& bg, const ScalarField& u, const FSpec& f, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "safety must lie in (0, 1]");
  }
  const ParabolicMargins m = check_parabolic_validity(bg, u, f);
  if (!(m.fp_margin > 0.0)) {
    throw Error(ErrorKind::parabolicity_lost, "parabolicity lost: f' >= 0 on the current S range");
  }
  const ScalarField s = scalar_curvature(bg, u);
  const Constants& k = bg.constants();
  double kappa = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    kappa = std::max(kappa, (k.n - 1.0) * std::fabs(f.fp(s[i])) * std::pow(u[i], 1.0 - k.beta));
  }
  const double h = u.grid().min_spacing();
  return safety * h * h / (2.0 * u.grid().active_dims() * kappa);
}

namespace {

ScalarField rhs(const Background& bg, const ScalarField& u, const FSpec& f, bool normalized) {
  return normalized ? rhs_normalized(bg, u, f) : rhs_nonnormalized(bg, u, f);
}

ScalarField axpy(const ScalarField& y, double a, const ScalarField& x) {
  ScalarField out(y);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
  return out;
}

}  // namespace

ConformalState step(const Background& bg, const ConformalState& state, const FSpec& f, double dt,
                    Scheme scheme, bool normalized) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
  const ScalarField& u = state.u;
  ConformalState out{u, state.t + dt};
  if (scheme == Scheme::euler) {
    out.u = axpy(u, dt, rhs(bg, u, f, normalized));
  } else {
    const ScalarField k1 = rhs(bg, u, f, normalized);
    const ScalarField k2 = rhs(bg, axpy(u, 0.5 * dt, k1), f, normalized);
    const ScalarField k3 = rhs(bg, axpy(u, 0.5 * dt, k2), f, normalized);
    const ScalarField k4 = rhs(bg, axpy(u, dt, k3), f, normalized);
    for (std::size_t i = 0; i < u.size(); ++i) {
      out.u[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  for (double v : out.u.values()) {
    if (!(v > 0.0)) throw Error(ErrorKind::positivity_lost, "state outside positive cone");
  }
  return out;
}

ConformalState renormalize_volume(const ConformalState& state) {
  const double vol = volume(state.u);
  const double gamma = volume_exponent(state.u.grid().ambient_n());
  return {state.u * std::pow(vol, -1.0 / gamma), state.t};
}

namespace {

struct Measured {
  Record record;
  double step3_integrand = 0.0;
};

Measured measure_full(const Background& bg, const ScalarField& u, const FSpec& f, bool normalized) {
  const Evaluation e = evaluate(bg, u, f);
  const Constants& k = bg.constants();
  Measured m;
  Record& r = m.record;
  r.s_min = field_min(e.s);
  r.s_max = field_max(e.s);
  r.a = e.a;
  r.sigma = e.sigma;
  r.vol = e.vol;
  r.u_min = field_min(u);
  r.u_max = field_max(u);

  const double half_n = 0.5 * k.n;
  const double q3 = static_cast<double>(k.n) * k.n / (2.0 * (k.n - 2.0));
  detail::CompensatedSum l1, l2, ln2, s3, flat;
  double fsa = 0.0, dudt = 0.0, fp = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = std::fabs(e.s[i]);
    l1.add(s * e.w[i]);
    l2.add(s * s * e.w[i]);
    ln2.add(std::pow(s, half_n) * e.w[i]);
    s3.add(std::pow(s, q3) * e.w[i]);
    flat.add(std::pow(u[i], k.beta) * e.s[i]);
    const double g = normalized ? e.fs[i] - e.a : e.fs[i];
    fsa = std::max(fsa, std::fabs(e.fs[i] - e.a));
    dudt = std::max(dudt, k.rate * std::fabs(g) * u[i]);
    fp = std::min(fp, -f.fp(e.s[i]));
  }
  r.fsa_sup = fsa;
  r.lp1 = l1.value();
  r.lp2 = std::sqrt(l2.value());
  r.lpn2 = std::pow(ln2.value(), 1.0 / half_n);
  r.dudt_sup = dudt;
  r.flat_integral = flat.value() * u.grid().weight();
  r.u_margin = r.u_min;
  r.fp_margin = fp;
  m.step3_integrand = std::pow(s3.value(), (k.n - 2.0) / k.n);
  return m;
}

Termination termination_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::positivity_lost: return Termination::positivity_lost;
    case ErrorKind::f_domain_violation:
    case ErrorKind::parabolicity_lost: return Termination::f_domain_violation;
    default: throw;
  }
}

}  // namespace

Record measure(const Background& bg, const ScalarField& u, const FSpec& f, bool normalized) {
  return measure_full(bg, u, f, normalized).record;
}

const Snapshot* Trajectory::snapshot_for(std::size_t record) const {
  auto it = std::lower_bound(snapshots.begin(), snapshots.end(), record,
                             [](const Snapshot& s, std::size_t r) { return s.record < r; });
  return it != snapshots.end() && it->record == record ? &*it : nullptr;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (!c.background.grid_ptr()) fail("background is not set");
  if (!c.u0.grid_ptr()) fail("u0 is not set");
  if (!(c.u0.grid().spec() == c.background.grid().spec())) fail("u0 and background grids differ");
  if (!c.f.eval_f || !c.f.eval_fp || !c.f.eval_fpp) fail("f is not set");
  if (!(c.t_final > 0.0)) fail("T_final must be positive");
  if (!(c.stop_tol >= 0.0)) fail("stop_tol must be nonnegative");
  if (c.log_cadence < 1) fail("log_cadence must be >= 1");
  if (c.snapshot_cadence < 0) fail("snapshot_cadence must be >= 0");
  switch (c.dt.kind) {
    case DtPolicy::Kind::adaptive:
      if (!(c.dt.safety > 0.0 && c.dt.safety <= 1.0)) fail("safety must lie in (0, 1]");
      break;
    case DtPolicy::Kind::fixed:
      if (!(c.dt.dt > 0.0)) fail("fixed dt must be positive");
      break;
    case DtPolicy::Kind::replay:
      for (double d : c.dt.sequence) {
        if (!(d > 0.0)) fail("replayed dt values must be positive");
      }
      break;
  }
  for (double v : c.u0.values()) {
    if (!(v > 0.0)) fail("u0 must be positive");
  }
}

Trajectory run(const RunConfig& cfg) {
  validate(cfg);
  const Background& bg = cfg.background;
  const FSpec& f = cfg.f;

  Trajectory tr;
  tr.normalized = cfg.normalized;
  ConformalState st{cfg.u0, 0.0};
  if (cfg.renormalize_volume) st = renormalize_volume(st);

  Measured cur;
  try {
    cur = measure_full(bg, st.u, f, cfg.normalized);
  } catch (const Error& e) {
    tr.termination = termination_for(e.kind());
    tr.message = e.what();
    return tr;
  }
  cur.record.step = 0;
  double drift = 0.0;
  double step3 = 0.0;
  bool logged = false;
  bool stop_requested = false;

  auto log_current = [&]() {
    const std::size_t idx = tr.records.size();
    tr.records.push_back(cur.record);
    const bool keep = idx == 0 || (cfg.snapshot_cadence > 0 && idx % cfg.snapshot_cadence == 0);
    if (keep) tr.snapshots.push_back({idx, st.t, st.u});
    logged = true;
    if (cfg.stop_when && cfg.stop_when(tr.records.back())) stop_requested = true;
  };
  log_current();

  auto finish = [&](Termination why, std::string msg) {
    tr.termination = why;
    tr.message = std::move(msg);
  };

  while (true) {
    if (cfg.normalized && cur.record.fsa_sup <= cfg.stop_tol) {
      finish(Termination::stationary, "sup|f(S) - A| below stop_tol");
      break;
    }
    if (st.t >= cfg.t_final) {
      finish(Termination::time_reached, "reached T_final");
      break;
    }
    if (stop_requested) {
      finish(Termination::time_reached, "stop condition met");
      break;
    }
    if (tr.steps >= cfg.max_steps) {
      finish(Termination::time_reached, "step limit reached");
      break;
    }

    double dt = 0.0;
    try {
      switch (cfg.dt.kind) {
        case DtPolicy::Kind::adaptive:
          dt = stable_dt(bg, st.u, f, cfg.dt.safety);
          break;
        case DtPolicy::Kind::fixed:
          dt = cfg.dt.dt;
          break;
        case DtPolicy::Kind::replay:
          dt = tr.steps < cfg.dt.sequence.size() ? cfg.dt.sequence[tr.steps] : 0.0;
          break;
      }
    } catch (const Error& e) {
      finish(termination_for(e.kind()), e.what());
      break;
    }
    if (cfg.dt.kind == DtPolicy::Kind::replay && dt == 0.0) {
      finish(Termination::time_reached, "replayed dt sequence exhausted");
      break;
    }
    if (cfg.dt.kind != DtPolicy::Kind::replay) dt = std::min(dt, cfg.t_final - st.t);

    ConformalState next;
    try {
      next = step(bg, st, f, dt, cfg.scheme, cfg.normalized);
    } catch (const Error& e) {
      finish(termination_for(e.kind()), e.what());
      break;
    }
    if (!next.u.all_finite()) {
      finish(Termination::blowup, "non-finite conformal factor");
      break;
    }
    if (field_min(next.u) <= cfg.positivity_floor) {
      finish(Termination::positivity_lost, "state outside positive cone");
      break;
    }
    if (cfg.normalized) {
      drift += volume(next.u) - cur.record.vol;
      if (cfg.renormalize_volume) next = renormalize_volume(next);
    }

    Measured m;
    try {
      m = measure_full(bg, next.u, f, cfg.normalized);
    } catch (const Error& e) {
      finish(termination_for(e.kind()), e.what());
      break;
    }
    step3 += 0.5 * dt * (cur.step3_integrand + m.step3_integrand);
    st = std::move(next);
    ++tr.steps;
    tr.dts.push_back(dt);
    cur = std::move(m);
    cur.record.step = tr.steps;
    cur.record.t = st.t;
    cur.record.dt = dt;
    cur.record.vol_drift = drift;
    cur.record.step3 = step3;
    logged = false;

    if (cur.record.u_max > cfg.blowup_threshold ||
        std::max(std::fabs(cur.record.s_min), std::fabs(cur.record.s_max)) > cfg.blowup_threshold) {
      log_current();
      finish(Termination::blowup, "sup norm exceeded the blow-up threshold");
      break;
    }
    if (tr.steps % static_cast<std::size_t>(cfg.log_cadence) == 0) log_current();
  }

  if (!logged) log_current();
  if (tr.snapshots.empty() || tr.snapshots.back().record + 1 != tr.records.size()) {
    tr.snapshots.push_back({tr.records.size() - 1, st.t, st.u});
  }
  return tr;
}

Trajectory hamilton_rescale(const Background& bg, const Trajectory& traj, const FSpec& f) {
  if (!f.alpha_homogeneous) {
    throw Error(ErrorKind::not_homogeneous, "f '" + f.name + "' declares no homogeneity degree");
  }
  const double alpha = *f.alpha_homogeneous;
  const auto triples = default_homogeneity_samples(f);
  if (homogeneity_check(f, alpha, triples) > 1e-9) {
    throw Error(ErrorKind::not_homogeneous, "f '" + f.name + "' is not homogeneous of the declared degree");
  }
  if (traj.normalized) {
    throw Error(ErrorKind::invalid_argument, "rescaling expects a non-normalized trajectory");
  }
  if (traj.records.empty() || !traj.has_all_snapshots()) {
    throw Error(ErrorKind::invalid_argument, "rescaling needs a snapshot at every record");
  }

  const double rate = bg.constants().rate;
  Trajectory out;
  out.normalized = true;
  out.termination = traj.termination;
  out.message = traj.message;
  out.steps = traj.steps;
  // d(log Vol)/dt = (n/2) A holds exactly for the semi-discrete flow, so eta
  // follows from the logged volumes instead of a quadrature of A
  const double vol0 = traj.records.front().vol;
  const double eta_per_log_vol = 2.0 / bg.n();
  double eta = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    if (k > 0) {
      const double dt = traj.records[k].t - traj.records[k - 1].t;
      const double eta_next = eta_per_log_vol * std::log(traj.records[k].vol / vol0);
      tau += 0.5 * dt * (std::exp(-alpha * eta) + std::exp(-alpha * eta_next));
      eta = eta_next;
    }
    ScalarField u = traj.snapshots[k].u * std::exp(-rate * eta);
    Record r = measure(bg, u, f, true);
    r.step = traj.records[k].step;
    r.t = tau;
    r.dt = k > 0 ? tau - out.records.back().t : 0.0;
    out.records.push_back(r);
    out.snapshots.push_back({k, tau, std::move(u)});
    if (k > 0) out.dts.push_back(r.dt);
  }
  return out;
}

std::function<bool(const Record&)> rescaled_time_stop(const Background& bg, double alpha, double tau_final) {
  struct Clock {
    double t = 0.0, vol0 = 0.0, eta = 0.0, tau = 0.0;
    bool started = false;
  };
  const double eta_per_log_vol = 2.0 / bg.n();
  return [clock = Clock{}, alpha, tau_final, eta_per_log_vol](const Record& rec) mutable {
    if (!clock.started) {
      clock.started = true;
      clock.vol0 = rec.vol;
    } else {
      const double eta_next = eta_per_log_vol * std::log(rec.vol / clock.vol0);
      clock.tau += 0.5 * (rec.t - clock.t) * (std::exp(-alpha * clock.eta) + std::exp(-alpha * eta_next));
      clock.eta = eta_next;
    }
    clock.t = rec.t;
    return clock.tau >= tau_final;
  };
}

ScalarField frechet_apply(const Background& bg, const ScalarField& u, const ScalarField& h,
                          const FSpec& f) {
  require_same_grid(u, h);
  const ScalarField s = scalar_curvature(bg, u);
  require_in_domain(f, s);
  const ScalarField lh = conformal_laplacian(bg, h);
  const double beta = bg.constants().beta;
  ScalarField out(h);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ds_u = std::pow(u[i], 1.0 - beta) * lh[i] - beta * s[i] * h[i];
    out[i] = f(s[i]) * h[i] + f.fp(s[i]) * ds_u;
  }
  return out;
}

ScalarField frechet_normalized_apply(const Background& bg, const ScalarField& u,
                                     const ScalarField& h, const FSpec& f) {
  require_same_grid(u, h);
  const Evaluation e = evaluate(bg, u, f);
  const ScalarField lh = conformal_laplacian(bg, h);
  const Constants& k = bg.constants();
  detail::CompensatedSum d_mean;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ds = std::pow(u[i], -k.beta) * lh[i] - k.beta * e.s[i] * h[i] / u[i];
    d_mean.add(f.fp(e.s[i]) * ds * e.w[i]);
    d_mean.add(k.gamma * (e.fs[i] - e.a) * h[i] / u[i] * e.w[i]);
  }
  const double da = d_mean.value() / e.vol;
  ScalarField out = frechet_apply(bg, u, h, f);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] -= e.a * h[i] + da * u[i];
  return out;
}

ScalarField interpolate_u(const Trajectory& traj, double t) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw Error(ErrorKind::invalid_argument, "trajectory has no snapshots");
  if (t <= snaps.front().t) return snaps.front().u;
  if (t >= snaps.back().t) return snaps.back().u;
  auto hi = std::upper_bound(snaps.begin(), snaps.end(), t,
                             [](double v, const Snapshot& s) { return v < s.t; });
  auto lo = hi - 1;
  const double span = hi->t - lo->t;
  const double s = span > 0.0 ? (t - lo->t) / span : 0.0;
  ScalarField out(lo->u);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - s) * lo->u[i] + s * hi->u[i];
  return out;
}

}  // namespace conflow
