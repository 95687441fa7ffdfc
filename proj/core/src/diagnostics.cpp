#include "conflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "conflow/error.hpp"
#include "summation.hpp"

namespace conflow {

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double TheoremReport::value(const std::string& key) const {
  for (const auto& [k, v] : measured) {
    if (k == key) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

TheoremReport start(const std::string& id, const Trajectory& traj) {
  TheoremReport r;
  r.id = id;
  if (!traj.records.empty()) {
    r.first_record = 0;
    r.last_record = traj.records.size() - 1;
    r.t_begin = traj.records.front().t;
    r.t_end = traj.records.back().t;
  }
  return r;
}

TheoremReport inconclusive(TheoremReport r, const std::string& why) {
  r.verdict = Verdict::inconclusive;
  r.notes.push_back(why);
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool starts_at_one(const Trajectory& traj) {
  const Record& r0 = traj.records.front();
  return std::fabs(r0.u_min - 1.0) <= 1e-12 && std::fabs(r0.u_max - 1.0) <= 1e-12;
}

}  // namespace

DecayFit fit_decay(const Trajectory& traj, double skip_fraction) {
  DecayFit fit;
  if (traj.records.empty()) return fit;
  const double t0 = traj.records.front().t;
  const double t1 = traj.records.back().t;
  fit.t_begin = t0 + skip_fraction * (t1 - t0);
  fit.t_end = t1;
  std::vector<double> ts, ys;
  for (const Record& r : traj.records) {
    if (r.t < fit.t_begin || !(r.fsa_sup > 0.0)) continue;
    ts.push_back(r.t);
    ys.push_back(std::log(r.fsa_sup));
  }
  fit.samples = ts.size();
  if (ts.size() < 3) return fit;
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= ts.size();
  my /= ts.size();
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  if (stt <= 0.0) return fit;
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double e = ys[i] - (intercept + slope * ts[i]);
    ss += e * e;
  }
  fit.b_fit = -slope;
  fit.c_fit = std::exp(intercept);
  fit.residual = std::sqrt(ss / ts.size());
  return fit;
}

DecayPrediction predict_decay(double s_min0, double s_max0, const FSpec& f) {
  DecayPrediction p;
  p.width = s_max0 - s_min0;
  double fp_max = -std::numeric_limits<double>::infinity();
  double fp_abs = 0.0;
  const int samples = 2001;
  for (int i = 0; i < samples; ++i) {
    const double x = i + 1 == samples ? s_max0 : s_min0 + p.width * i / (samples - 1);
    const double d = f.fp(x);
    fp_max = std::max(fp_max, d);
    fp_abs = std::max(fp_abs, std::fabs(d));
  }
  p.fp_max = fp_max;
  p.fp_min_abs = -fp_max;
  p.b = fp_max * s_max0;  // (-c) * S_max with -c = max f'
  p.c = fp_abs * p.width;
  return p;
}

TheoremReport compare_decay(const DecayFit& fit, const Trajectory& traj, const Background& bg,
                            const FSpec& f) {
  TheoremReport r = start("decay", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  const Record& r0 = traj.records.front();
  if (!(r0.s_max < 0.0)) return inconclusive(r, "exponential decay applies to negative initial curvature");
  if (!starts_at_one(traj)) r.notes.push_back("u0 is not 1; the initial curvature range is used in place of S0");
  (void)bg;
  const DecayPrediction p = predict_decay(r0.s_min, r0.s_max, f);
  r.predicted = {{"B", p.b}, {"C", p.c}, {"c0", p.width}, {"min_abs_fp", p.fp_min_abs}};
  r.tolerances = {{"B_fraction", 0.9}, {"envelope_factor", 1.1}, {"max_fit_residual", 0.1}};

  double worst_ratio = 0.0;
  bool envelope_ok = true;
  for (const Record& rec : traj.records) {
    const double bound = p.c * std::exp(-p.b * rec.t);
    if (bound > 0.0) worst_ratio = std::max(worst_ratio, rec.fsa_sup / bound);
    if (rec.fsa_sup > 1.1 * bound) envelope_ok = false;
  }
  r.measured = {{"B_fit", fit.b_fit},          {"C_fit", fit.c_fit},
                {"fit_residual", fit.residual}, {"fit_samples", static_cast<double>(fit.samples)},
                {"fit_t_begin", fit.t_begin},   {"envelope_ratio_max", worst_ratio}};

  if (p.width == 0.0) {
    r.verdict = Verdict::pass;
    r.notes.push_back("constant initial curvature; the decay bound holds vacuously");
    return r;
  }
  if (fit.samples < 3) return inconclusive(r, "too few samples in the fit window");
  if (fit.residual > 0.1) return inconclusive(r, "fit residual above 0.1");
  const bool rate_ok = fit.b_fit >= 0.9 * p.b;
  if (!rate_ok) r.notes.push_back("fitted rate below 0.9 of the predicted rate");
  if (!envelope_ok) r.notes.push_back("sup|f(S)-A| exceeds 1.1 C exp(-B t)");
  r.verdict = rate_ok && envelope_ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_minmax_principle(const Trajectory& traj, const Background& bg, const FSpec& f,
                                     double eta) {
  (void)f;
  TheoremReport r = start("minmax", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  r.tolerances = {{"eta", eta}};
  const Record& r0 = traj.records.front();

  double smax_rise = 0.0;  // worst increase of S_max while S_max <= 0
  double smin_drop = 0.0;  // worst decrease of S_min while S_min <= 0
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    const Record& a = traj.records[k - 1];
    const Record& b = traj.records[k];
    if (a.s_max <= 0.0) smax_rise = std::max(smax_rise, b.s_max - a.s_max);
    if (a.s_min <= 0.0) smin_drop = std::max(smin_drop, a.s_min - b.s_min);
  }
  r.measured = {{"smax_increase_max", smax_rise}, {"smin_decrease_max", smin_drop}};
  bool ok = smax_rise <= eta && smin_drop <= eta;

  if (r0.s_max < 0.0) {
    double excess = 0.0;
    for (const Record& rec : traj.records) {
      excess = std::max({excess, r0.s_min - rec.s_min, rec.s_max - r0.s_max});
    }
    r.predicted = {{"S_lower", r0.s_min}, {"S_upper", r0.s_max}};
    r.measured.push_back({"containment_excess", excess});
    if (excess > eta) {
      ok = false;
      r.notes.push_back("S left the initial curvature range");
    }
    if (bg.case_tag() != CurvatureCase::negative) {
      r.notes.push_back("background is not negative; the initial curvature range is used");
    }
  }
  if (r0.s_min >= 0.0) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const Record& rec : traj.records) lowest = std::min(lowest, rec.s_min);
    r.measured.push_back({"s_min_lowest", lowest});
    if (lowest < -eta) {
      ok = false;
      r.notes.push_back("S became negative from a nonnegative start");
    }
  }
  if (smax_rise > eta) r.notes.push_back("S_max increased while nonpositive");
  if (smin_drop > eta) r.notes.push_back("S_min decreased while nonpositive");
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_u_bounds(const Trajectory& traj, const Background& bg, const FSpec& f) {
  TheoremReport r = start("u_bounds", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  const Record& r0 = traj.records.front();
  const double rate = bg.constants().rate;
  const double gamma = bg.constants().gamma;

  if (r0.s_max < 0.0) {
    if (!starts_at_one(traj)) return inconclusive(r, "the negative-case bounds assume u0 = 1");
    const DecayPrediction p = predict_decay(r0.s_min, r0.s_max, f);
    if (p.width == 0.0) {
      r.predicted = {{"u_band", 0.0}};
      double dev = 0.0;
      for (const Record& rec : traj.records) {
        dev = std::max({dev, std::fabs(std::log(rec.u_min)), std::fabs(std::log(rec.u_max))});
      }
      r.measured = {{"log_u_max_abs", dev}};
      r.tolerances = {{"slack", 1e-12}};
      r.verdict = dev <= 1e-12 ? Verdict::pass : Verdict::fail;
      return r;
    }
    const double band = rate * p.c / p.b;
    const double ct = rate * p.c * std::exp(band);
    r.predicted = {{"log_u_band", band}, {"B", p.b}, {"C", p.c}, {"dudt_constant", ct}};
    r.tolerances = {{"envelope_factor", 1.1}};
    double dev = 0.0, env = 0.0;
    for (const Record& rec : traj.records) {
      dev = std::max({dev, std::fabs(std::log(rec.u_min)), std::fabs(std::log(rec.u_max))});
      env = std::max(env, rec.dudt_sup / (ct * std::exp(-p.b * rec.t)));
    }
    r.measured = {{"log_u_max_abs", dev}, {"dudt_envelope_ratio_max", env}};
    const bool ok = dev <= band && env <= 1.1;
    if (dev > band) r.notes.push_back("u left the exp(+-(n-2)C/4B) band");
    if (env > 1.1) r.notes.push_back("sup|du/dt| exceeds 1.1 c exp(-B t)");
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    return r;
  }

  if (bg.case_tag() == CurvatureCase::flat) {
    const double ratio0 = r0.u_min / r0.u_max;
    const double k = std::pow(ratio0, gamma);
    double ratio_drop = -std::numeric_limits<double>::infinity();
    double harnack = -std::numeric_limits<double>::infinity();
    for (const Record& rec : traj.records) {
      ratio_drop = std::max(ratio_drop, ratio0 - rec.u_min / rec.u_max);
      harnack = std::max(harnack, k * rec.vol - std::pow(rec.u_min, gamma));
    }
    r.predicted = {{"ratio0", ratio0}, {"k", k}};
    r.tolerances = {{"slack", 1e-8}};
    r.measured = {{"ratio_drop_max", ratio_drop}, {"volume_bound_deficit_max", harnack}};
    const bool ok = ratio_drop <= 1e-8 && harnack <= 1e-8;
    if (ratio_drop > 1e-8) r.notes.push_back("u_min/u_max fell below its initial value");
    if (harnack > 1e-8) r.notes.push_back("u_min^{2n/(n-2)} fell below k Vol");
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    return r;
  }

  if (bg.case_tag() == CurvatureCase::positive && r0.s_min >= 0.0) {
    if (!f.bounded_below) return inconclusive(r, "positive-case band needs f bounded below");
    if (!starts_at_one(traj)) return inconclusive(r, "the positive-case band assumes u0 = 1");
    if (!f.domain.contains(0.0)) return inconclusive(r, "0 is outside the domain of f");
    const double top = f(0.0) - *f.bounded_below;
    r.predicted = {{"band_rate", rate * top}};
    r.tolerances = {{"slack", 1e-12}};
    r.notes.push_back("band exponent uses (n-2)/4, obtained by integrating du/dt");
    double excess = -std::numeric_limits<double>::infinity();
    for (const Record& rec : traj.records) {
      const double band = rate * top * rec.t;
      excess = std::max({excess, std::log(rec.u_max) - band, -std::log(rec.u_min) - band});
    }
    r.measured = {{"band_excess_max", excess}};
    r.verdict = excess <= 1e-12 ? Verdict::pass : Verdict::fail;
    return r;
  }
  return inconclusive(r, std::string("no explicit u bound for case ") + to_string(bg.case_tag()));
}

namespace {

double signed_pow(double x, double e) {
  return x == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(x), e), x);
}


struct IdentityTracker {
  double max_defect = 0.0;
  double max_scale = 0.0;
  void add(double d, double rhs, double scale) {
    max_defect = std::max(max_defect, std::fabs(d - rhs));
    max_scale = std::max(max_scale, scale);
  }
  double relative() const {
    if (max_scale == 0.0) return max_defect == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return max_defect / max_scale;
  }
};

std::string pname(const std::string& base, double p) {
  std::ostringstream os;
  os << base << "_p" << p;
  return os.str();
}

// Integral quantities of one state.
std::map<std::string, double> integrals(const Evaluation& e, const std::vector<double>& ps) {
  std::map<std::string, double> q;
  q["A"] = e.a;
  q["sigma"] = e.sigma;
  q["sigma_centered"] = e.sigma;
  q["vol"] = e.vol;
  for (double p : ps) {
    detail::CompensatedSum is, js, ks, hs;
    for (std::size_t i = 0; i < e.s.size(); ++i) {
      is.add(std::pow(std::fabs(e.s[i]), p) * e.w[i]);
      js.add(std::pow(std::fabs(e.s[i] - e.sigma), p) * e.w[i]);
      ks.add(std::pow(std::fabs(e.fs[i] - e.a), p) * e.w[i]);
      hs.add(std::pow(std::fabs(e.fs[i]), p) * e.w[i]);
    }
    q[pname("S", p)] = is.value();
    q[pname("S_minus_sigma", p)] = js.value();
    q[pname("fS_minus_A", p)] = ks.value();
    q[pname("fS", p)] = hs.value();
  }
  return q;
}

struct Rhs {
  double value = 0.0;
  double scale = 0.0;
};

// Right-hand sides of the evolution identities at one state.
std::map<std::string, Rhs> identity_rhs(const Background& bg, const ScalarField& u,
                                        const Evaluation& e, const FSpec& f,
                                        const std::vector<double>& ps, double& a_pointwise) {
  const Constants& k = bg.constants();
  const double n = k.n;
  const std::size_t m = u.size();
  const GridPtr& grid = u.grid_ptr();
  const double vol = e.vol;

  std::vector<double> g(m), fp(m), fpp(m);
  for (std::size_t i = 0; i < m; ++i) {
    g[i] = e.fs[i] - e.a;
    fp[i] = f.fp(e.s[i]);
    fpp[i] = f.fpp(e.s[i]);
  }
  auto sum = [&](auto&& term) {
    detail::CompensatedSum s, a;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = term(i) * e.w[i];
      s.add(v);
      a.add(std::fabs(v));
    }
    return std::pair<double, double>{s.value(), a.value()};
  };
  auto form = [&](auto&& phi) {
    std::vector<double> vals(m);
    for (std::size_t i = 0; i < m; ++i) vals[i] = phi(i);
    return (n - 1.0) * metric_dirichlet_form(u, ScalarField(grid, std::move(vals)), e.fs);
  };

  std::map<std::string, Rhs> out;

  const double b_a = form([&](std::size_t i) { return fp[i]; });
  const auto [r_a, s_a] = sum([&](std::size_t i) { return (0.5 * n * e.fs[i] - e.s[i] * fp[i]) * g[i]; });
  const double a_prime = (b_a + r_a) / vol;
  out["A"] = {a_prime, (std::fabs(b_a) + s_a) / vol};

  {
    const ScalarField grad2 = grad_inner(e.s, e.s);
    const auto [r_p, s_p] = sum([&](std::size_t i) {
      return (n - 1.0) * fp[i] * fpp[i] * std::pow(u[i], 1.0 - k.beta) * grad2[i];
    });
    (void)s_p;
    a_pointwise = (r_p + r_a) / vol;
  }

  const auto [r_s, s_s] = sum([&](std::size_t i) { return e.s[i] * g[i]; });
  const double sigma_prime = 0.5 * (n - 2.0) * r_s / vol;
  out["sigma"] = {sigma_prime, 0.5 * (n - 2.0) * s_s / vol};
  const auto [r_sc, s_sc] = sum([&](std::size_t i) { return (e.s[i] - e.sigma) * g[i]; });
  out["sigma_centered"] = {0.5 * (n - 2.0) * r_sc / vol, 0.5 * (n - 2.0) * s_sc / vol};

  const auto [r_v, s_v] = sum([&](std::size_t i) { return g[i]; });
  out["vol"] = {0.5 * n * r_v, 0.5 * n * s_v};

  for (double p : ps) {
    {
      const double b = form([&](std::size_t i) { return p * signed_pow(e.s[i], p - 1.0); });
      const auto [r, s] = sum([&](std::size_t i) { return std::pow(std::fabs(e.s[i]), p) * g[i]; });
      const double c = 0.5 * n - p;
      out[pname("S", p)] = {b + c * r, std::fabs(b) + std::fabs(c) * s};
    }
    {
      const double b = form([&](std::size_t i) { return p * signed_pow(e.s[i] - e.sigma, p - 1.0); });
      const auto [r1, s1] = sum([&](std::size_t i) { return std::pow(std::fabs(e.s[i] - e.sigma), p) * g[i]; });
      const auto [r2, s2] = sum([&](std::size_t i) {
        return (sigma_prime + e.sigma * g[i]) * signed_pow(e.s[i] - e.sigma, p - 1.0);
      });
      const double c = 0.5 * n - p;
      out[pname("S_minus_sigma", p)] = {b + c * r1 - p * r2,
                                        std::fabs(b) + std::fabs(c) * s1 + p * s2};
    }
    {
      const double b = form([&](std::size_t i) { return p * signed_pow(g[i], p - 1.0) * fp[i]; });
      const auto [r1, s1] = sum([&](std::size_t i) { return std::pow(std::fabs(g[i]), p) * e.s[i] * fp[i]; });
      const auto [r2, s2] = sum([&](std::size_t i) { return signed_pow(g[i], p - 1.0); });
      const auto [r3, s3] = sum([&](std::size_t i) { return std::pow(std::fabs(g[i]), p) * g[i]; });
      out[pname("fS_minus_A", p)] = {
          b - p * r1 - p * a_prime * r2 + 0.5 * n * r3,
          std::fabs(b) + p * s1 + p * std::fabs(a_prime) * s2 + 0.5 * n * s3};
    }
    {
      const double b = form([&](std::size_t i) { return p * signed_pow(e.fs[i], p - 1.0) * fp[i]; });
      const auto [r, s] = sum([&](std::size_t i) {
        return (0.5 * n * std::pow(std::fabs(e.fs[i]), p) - p * e.s[i] * signed_pow(e.fs[i], p - 1.0) * fp[i]) * g[i];
      });
      out[pname("fS", p)] = {b + r, std::fabs(b) + s};
    }
  }
  return out;
}

double three_point(double t0, double t1, double t2, double q0, double q1, double q2) {
  const double h1 = t1 - t0;
  const double h2 = t2 - t1;
  return -h2 / (h1 * (h1 + h2)) * q0 + (h2 - h1) / (h1 * h2) * q1 + h1 / (h2 * (h1 + h2)) * q2;
}

}  // namespace

TheoremReport check_evolution_identities(const Trajectory& traj, const Background& bg,
                                         const FSpec& f, const std::vector<double>& p_list,
                                         double tol) {
  TheoremReport r = start("identities", traj);
  if (!traj.normalized) return inconclusive(r, "identities are stated for the normalized flow");
  for (double p : p_list) {
    if (!(p >= 1.0)) return inconclusive(r, "p values must be >= 1");
  }
  r.tolerances = {{"relative_defect", tol}};

  std::map<std::string, IdentityTracker> trackers;
  IdentityTracker element;
  double a_pointwise_defect = 0.0;
  std::size_t used = 0;
  std::size_t first = 0, last = 0;

  const auto& snaps = traj.snapshots;
  std::vector<Evaluation> evals;
  evals.reserve(snaps.size());
  for (const Snapshot& s : snaps) evals.push_back(evaluate(bg, s.u, f));

  const double gamma = bg.constants().gamma;
  for (std::size_t j = 1; j + 1 < snaps.size(); ++j) {
    if (snaps[j].record != snaps[j - 1].record + 1 || snaps[j + 1].record != snaps[j].record + 1) continue;
    const double t0 = snaps[j - 1].t, t1 = snaps[j].t, t2 = snaps[j + 1].t;
    if (!(t1 > t0 && t2 > t1)) continue;
    const auto q0 = integrals(evals[j - 1], p_list);
    const auto q1 = integrals(evals[j], p_list);
    const auto q2 = integrals(evals[j + 1], p_list);
    double a_pw = 0.0;
    const auto rhs = identity_rhs(bg, snaps[j].u, evals[j], f, p_list, a_pw);
    for (const auto& [name, value] : rhs) {
      const double d = three_point(t0, t1, t2, q0.at(name), q1.at(name), q2.at(name));
      trackers[name].add(d, value.value, value.scale);
    }
    a_pointwise_defect = std::max(a_pointwise_defect, std::fabs(a_pw - rhs.at("A").value));

    const double half_n = 0.5 * bg.n();
    for (std::size_t i = 0; i < snaps[j].u.size(); ++i) {
      const double w0 = std::pow(snaps[j - 1].u[i], gamma);
      const double w1 = std::pow(snaps[j].u[i], gamma);
      const double w2 = std::pow(snaps[j + 1].u[i], gamma);
      const double rv = half_n * (evals[j].fs[i] - evals[j].a) * w1;
      element.add(three_point(t0, t1, t2, w0, w1, w2), rv, std::fabs(rv));
    }
    if (used == 0) first = snaps[j].record;
    last = snaps[j].record;
    ++used;
  }
  if (used == 0) return inconclusive(r, "no three consecutive snapshots to difference");
  r.first_record = first;
  r.last_record = last;
  r.t_begin = traj.records[first].t;
  r.t_end = traj.records[last].t;

  bool ok = true;
  for (const auto& [name, tr] : trackers) {
    const double rel = tr.relative();
    r.measured.push_back({name, rel});
    if (rel > tol) {
      ok = false;
      r.notes.push_back(name + " identity defect " + fmt(rel) + " above tolerance");
    }
  }
  r.measured.push_back({"volume_element", element.relative()});
  if (element.relative() > tol) {
    ok = false;
    r.notes.push_back("volume element identity defect above tolerance");
  }
  r.measured.push_back({"A_pointwise_form_abs_defect", a_pointwise_defect});
  r.measured.push_back({"differenced_states", static_cast<double>(used)});
  r.notes.push_back("A_pointwise_form_abs_defect compares the gradient form of dA/dt with the "
                    "edge form; it carries the O(h^2) spatial error and is informational");
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_Lnhalf_monotone(const Trajectory& traj, const Background& bg) {
  TheoremReport r = start("lnhalf", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  for (const Record& rec : traj.records) {
    if (rec.s_min < -1e-8) return inconclusive(r, "requires S >= 0 along the flow");
  }
  const double half_n = 0.5 * bg.n();
  const double slack = 1e-8;
  r.tolerances = {{"slack", slack}};
  const double bound = traj.records.front().lpn2;
  r.predicted = {{"Ln2_initial", bound}};
  double rise = 0.0, excess1 = -std::numeric_limits<double>::infinity(), excess2 = excess1;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const Record& rec = traj.records[k];
    if (k > 0) rise = std::max(rise, rec.lpn2 - traj.records[k - 1].lpn2);
    excess1 = std::max(excess1, rec.lp1 - bound);
    excess2 = std::max(excess2, rec.lp2 - bound);
  }
  r.measured = {{"Ln2_increase_max", rise}, {"L1_excess_max", excess1}};
  bool ok = rise <= slack && excess1 <= slack;
  if (2.0 <= half_n) {
    r.measured.push_back({"L2_excess_max", excess2});
    ok = ok && excess2 <= slack;
  } else {
    r.notes.push_back("p = 2 exceeds n/2; the L^2 bound is not claimed");
  }
  if (rise > slack) r.notes.push_back("L^{n/2} norm of S increased");
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_positive_S_bounds(const Trajectory& traj, const Background& bg, const FSpec& f) {
  TheoremReport r = start("positive_S", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  const Record& r0 = traj.records.front();
  if (!(r0.s_min > 0.0)) return inconclusive(r, "requires positive initial curvature");
  const double f0 = f(0.0);
  if (!std::isfinite(f0)) return inconclusive(r, "f(0) is not finite");
  const double slack = 1e-8;
  r.tolerances = {{"slack", slack}};

  double a_run = std::numeric_limits<double>::infinity();
  double lower_deficit = -std::numeric_limits<double>::infinity();
  for (const Record& rec : traj.records) {
    a_run = std::min(a_run, rec.a - f0);
    lower_deficit = std::max(lower_deficit, r0.s_min * std::exp(a_run * rec.t) - rec.s_min);
  }
  r.measured = {{"a_observed", a_run}, {"lower_bound_deficit_max", lower_deficit}};
  bool ok = lower_deficit <= slack;
  if (lower_deficit > slack) r.notes.push_back("S_min fell below S_min(0) exp(a t)");

  if (f.growth) {
    const FSpec shifted = shift(f, -f0);
    const GrowthBound& g = *shifted.growth;
    const double a_pred = -(g.mu * std::pow(r0.lpn2, g.kappa) + g.nu);
    r.predicted.push_back({"a_from_growth", a_pred});
    if (g.kappa <= 0.5 * bg.n()) {
      if (a_run < a_pred - slack) {
        ok = false;
        r.notes.push_back("observed min of A - f(0) is below the growth-certificate bound");
      }
    } else {
      r.notes.push_back("growth exponent exceeds n/2; the certificate bound is not claimed");
    }
  }

  if (f.bounded_below) {
    const double inf_f = *f.bounded_below;
    double c_run = -std::numeric_limits<double>::infinity();
    double upper_excess = -std::numeric_limits<double>::infinity();
    for (const Record& rec : traj.records) {
      c_run = std::max(c_run, rec.a - inf_f);
      upper_excess = std::max(upper_excess, rec.s_max - r0.s_max * std::exp(c_run * rec.t));
    }
    r.measured.push_back({"C_used", c_run});
    r.measured.push_back({"upper_bound_excess_max", upper_excess});
    r.notes.push_back("C is the observed sup of A - inf f; the constant is not pinned by theory");
    if (upper_excess > slack) {
      ok = false;
      r.notes.push_back("S_max exceeded S_max(0) exp(C t)");
    }
  }
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_flat_identity(const Trajectory& traj, const Background& bg) {
  TheoremReport r = start("flat_identity", traj);
  if (traj.records.empty()) return inconclusive(r, "empty trajectory");
  if (bg.case_tag() != CurvatureCase::flat) return inconclusive(r, "requires a flat background");
  const double s0min = traj.records.front().s_min;
  r.tolerances = {{"integral", 1e-9}, {"s_min_slack", 1e-6}, {"s_min_sign", 1e-9}};
  r.predicted = {{"S_min_initial", s0min}};
  double integral = 0.0, deficit = -std::numeric_limits<double>::infinity(), top = deficit;
  for (const Record& rec : traj.records) {
    integral = std::max(integral, std::fabs(rec.flat_integral));
    deficit = std::max(deficit, s0min - rec.s_min);
    top = std::max(top, rec.s_min);
  }
  r.measured = {{"integral_abs_max", integral}, {"s_min_deficit_max", deficit}, {"s_min_max", top}};
  bool ok = integral <= 1e-9 && deficit <= 1e-6 && top <= 1e-9;
  if (integral > 1e-9) r.notes.push_back("integral of u^beta S is not zero");
  if (deficit > 1e-6) r.notes.push_back("S_min dropped below its initial value");
  if (top > 1e-9) r.notes.push_back("S_min became positive");
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

TheoremReport check_rescale_equivalence(const RunConfig& config, double tau_final, double tol) {
  TheoremReport r;
  r.id = "rescale";
  r.tolerances = {{"sup_norm", tol}};
  r.predicted = {{"tau_final", tau_final}};
  const FSpec& f = config.f;
  if (!f.alpha_homogeneous) return inconclusive(r, "f declares no homogeneity degree");
  const double alpha = *f.alpha_homogeneous;
  if (homogeneity_check(f, alpha, default_homogeneity_samples(f)) > 1e-9) {
    return inconclusive(r, "f is not homogeneous of the declared degree");
  }

  RunConfig direct = config;
  direct.normalized = true;
  direct.t_final = tau_final;
  direct.log_cadence = 1;
  direct.snapshot_cadence = 1;
  direct.stop_when = nullptr;
  const Trajectory a = run(direct);

  RunConfig raw = config;
  raw.normalized = false;
  raw.t_final = std::numeric_limits<double>::max();
  raw.log_cadence = 1;
  raw.snapshot_cadence = 1;
  raw.stop_when = rescaled_time_stop(config.background, alpha, tau_final);
  const Trajectory b = run(raw);
  const Trajectory rescaled = hamilton_rescale(config.background, b, f);

  r.first_record = 0;
  r.last_record = a.records.empty() ? 0 : a.records.size() - 1;
  r.t_begin = 0.0;
  r.t_end = a.records.empty() ? 0.0 : a.records.back().t;
  r.measured = {{"direct_steps", static_cast<double>(a.steps)},
                {"rescaled_steps", static_cast<double>(b.steps)},
                {"rescaled_tau_end", rescaled.records.back().t}};
  if (a.termination != Termination::time_reached && a.termination != Termination::stationary) {
    r.verdict = Verdict::fail;
    r.notes.push_back(std::string("normalized run ended with ") + to_string(a.termination));
    return r;
  }
  if (b.termination != Termination::time_reached) {
    r.verdict = Verdict::fail;
    r.notes.push_back(std::string("non-normalized run ended with ") + to_string(b.termination));
    return r;
  }
  const double tau_end = rescaled.records.back().t;
  double worst = 0.0;
  std::size_t compared = 0;
  for (const Snapshot& s : a.snapshots) {
    if (s.t > tau_end) break;
    const ScalarField v = interpolate_u(rescaled, s.t);
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::fabs(v[i] - s.u[i]));
    ++compared;
  }
  r.measured.push_back({"sup_norm_discrepancy", worst});
  r.measured.push_back({"compared_times", static_cast<double>(compared)});
  r.verdict = compared > 0 && worst <= tol ? Verdict::pass : Verdict::fail;
  if (compared == 0) r.notes.push_back("no overlapping times to compare");
  return r;
}

TheoremReport check_stationary_limit(const Trajectory& traj, const Background& bg, const FSpec& f) {
  TheoremReport r = start("stationary", traj);
  if (traj.termination != Termination::stationary) {
    return inconclusive(r, "run did not terminate by stationarity");
  }
  if (traj.snapshots.empty() || traj.snapshots.back().record + 1 != traj.records.size()) {
    return inconclusive(r, "terminal state snapshot missing");
  }
  const ScalarField& u = traj.snapshots.back().u;
  const Evaluation e = evaluate(bg, u, f);
  const double smin = field_min(e.s), smax = field_max(e.s);
  double target = smin;
  if (smin != smax) {
    // f is decreasing, so A lies in [f(smax), f(smin)] up to rounding
    if (e.a <= f(smax)) target = smax;
    else if (e.a >= f(smin)) target = smin;
    else target = invert(f, e.a, smin, smax, 1e-12);
  }
  double dev = 0.0;
  for (double s : e.s.values()) dev = std::max(dev, std::fabs(s - target));
  const double spread_tol = 1e-6;
  r.first_record = r.last_record;
  r.t_begin = r.t_end;
  r.tolerances = {{"spread", spread_tol}, {"inverse_match", 1e-6}};
  r.predicted = {{"S_limit", target}};
  r.measured = {{"spread", smax - smin}, {"inverse_deviation", dev}, {"S_max", smax}};
  bool ok = smax - smin <= spread_tol && dev <= 1e-6;
  if (traj.records.front().s_max < 0.0) {
    if (!(smax < 0.0)) {
      ok = false;
      r.notes.push_back("limit curvature is not negative");
    }
  }
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

}  // namespace conflow
