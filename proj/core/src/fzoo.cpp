#include "conflow/fzoo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "conflow/error.hpp"

namespace conflow {

bool Interval::contains(double x) const noexcept {
  if (std::isnan(x)) return false;
  const bool lo_ok = lo_open ? x > lo : x >= lo;
  const bool hi_ok = hi_open ? x < hi : x <= hi;
  return lo_ok && hi_ok;
}

bool Interval::contains(const Interval& other) const noexcept {
  const bool lo_ok = other.lo > lo || (other.lo == lo && (!lo_open || other.lo_open));
  const bool hi_ok = other.hi < hi || (other.hi == hi && (!hi_open || other.hi_open));
  return lo_ok && hi_ok;
}

FSpec FSpec::custom(std::string name, Fn f, Fn fp, Fn fpp, Interval domain) {
  FSpec out;
  out.name = std::move(name);
  out.eval_f = std::move(f);
  out.eval_fp = std::move(fp);
  out.eval_fpp = std::move(fpp);
  out.domain = domain;
  return out;
}

Interval sampling_window(const Interval& d, double half_width) {
  const auto nudge = [](double v) { return 1e-9 * std::max(1.0, std::fabs(v)); };
  double a = 0.0, b = 0.0;
  if (std::isfinite(d.lo)) {
    a = d.lo_open ? d.lo + nudge(d.lo) : d.lo;
  } else {
    a = std::isfinite(d.hi) ? std::min(-half_width, d.hi - half_width) : -half_width;
  }
  if (std::isfinite(d.hi)) {
    b = d.hi_open ? d.hi - nudge(d.hi) : d.hi;
  } else {
    b = std::max(half_width, a + half_width);
  }
  return Interval::closed(a, b);
}

namespace {

std::vector<double> equispaced(const Interval& window, int samples) {
  std::vector<double> xs;
  if (samples <= 1) {
    xs.push_back(0.5 * (window.lo + window.hi));
    return xs;
  }
  xs.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / (samples - 1);
    xs.push_back(window.lo + s * (window.hi - window.lo));
  }
  xs.back() = window.hi;
  return xs;
}

[[noreturn]] void reject(const FSpec& f, const std::string& why) {
  throw Error(ErrorKind::config, "f '" + f.name + "' rejected: " + why);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void certify(const FSpec& f, const CertifyOptions& options) {
  if (!f.eval_f || !f.eval_fp || !f.eval_fpp) reject(f, "missing f, f' or f''");
  const Interval window = sampling_window(f.domain);
  std::vector<double> xs = equispaced(window, std::max(options.samples, 2));
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(window.lo, window.hi);
  for (int i = 0; i < std::max(options.samples / 10, 1); ++i) xs.push_back(jitter(rng));

  for (double x : xs) {
    const double v = f(x);
    const double d = f.fp(x);
    if (!std::isfinite(v) || !std::isfinite(d) || !std::isfinite(f.fpp(x))) {
      reject(f, "non-finite value at x = " + num(x));
    }
    if (!(d < 0.0)) reject(f, "f'(" + num(x) + ") = " + num(d) + " is not negative");
  }

  if (f.growth) {
    const GrowthBound& g = *f.growth;
    if (g.mu < 0.0 || g.nu < 0.0 || g.kappa < 1.0) reject(f, "growth constants out of range");
    for (double x : xs) {
      if (x < 0.0) continue;
      const double lhs = -f(x);
      const double rhs = g.mu * std::pow(x, g.kappa) + g.nu;
      if (lhs > rhs + 1e-12 * (1.0 + std::fabs(lhs))) {
        reject(f, "growth certificate fails at x = " + num(x));
      }
    }
  }

  if (f.alpha_homogeneous) {
    const auto triples = default_homogeneity_samples(f, 64, options.seed + 1);
    const double defect = homogeneity_check(f, *f.alpha_homogeneous, triples);
    if (defect > 1e-9) reject(f, "declared homogeneity degree is inconsistent (defect " + num(defect) + ")");
  }
}

namespace fzoo {

FSpec classical() {
  FSpec f = FSpec::custom(
      "classical", [](double x) { return -x; }, [](double) { return -1.0; },
      [](double) { return 0.0; }, Interval::real_line());
  f.alpha_homogeneous = 1.0;
  f.growth = GrowthBound{1.0, 0.0, 1.0};
  return f;
}

FSpec linear(double slope) {
  FSpec f = FSpec::custom(
      "linear:" + num(slope), [slope](double x) { return slope * x; },
      [slope](double) { return slope; }, [](double) { return 0.0; }, Interval::real_line());
  f.alpha_homogeneous = 1.0;
  f.growth = GrowthBound{std::max(0.0, -slope), 0.0, 1.0};
  return f;
}

FSpec power(double kappa) {
  if (!(kappa >= 1.0)) throw Error(ErrorKind::config, "power:kappa requires kappa >= 1");
  const Interval dom = kappa == 1.0 ? Interval::at_least(0.0) : Interval::greater_than(0.0);
  FSpec f = FSpec::custom(
      "power:" + num(kappa), [kappa](double x) { return -std::pow(x, kappa); },
      [kappa](double x) { return -kappa * std::pow(x, kappa - 1.0); },
      [kappa](double x) {
        return kappa == 1.0 ? 0.0 : -kappa * (kappa - 1.0) * std::pow(x, kappa - 2.0);
      },
      dom);
  f.alpha_homogeneous = kappa;
  f.growth = GrowthBound{1.0, 0.0, kappa};
  certify(f);
  return f;
}

FSpec reciprocal(double shift_by, double exponent) {
  if (!(exponent > 0.0)) throw Error(ErrorKind::config, "reciprocal requires a positive exponent");
  const double a = shift_by;
  const double b = exponent;
  FSpec f = FSpec::custom(
      "reciprocal:" + num(a) + "," + num(b), [a, b](double x) { return std::pow(x + a, -b); },
      [a, b](double x) { return -b * std::pow(x + a, -b - 1.0); },
      [a, b](double x) { return b * (b + 1.0) * std::pow(x + a, -b - 2.0); },
      Interval::greater_than(-a));
  if (a == 0.0) f.alpha_homogeneous = -b;
  f.growth = GrowthBound{0.0, 0.0, 1.0};
  f.bounded_below = 0.0;
  certify(f);
  return f;
}

FSpec expdecay(double rate) {
  if (!(rate > 0.0)) throw Error(ErrorKind::config, "expdecay requires a positive rate");
  FSpec f = FSpec::custom(
      "expdecay:" + num(rate), [rate](double x) { return std::exp(-rate * x); },
      [rate](double x) { return -rate * std::exp(-rate * x); },
      [rate](double x) { return rate * rate * std::exp(-rate * x); }, Interval::real_line());
  f.growth = GrowthBound{0.0, 0.0, 1.0};
  f.bounded_below = 0.0;
  certify(f);
  return f;
}

namespace {

struct Pchip {
  std::vector<double> x, y, d;

  std::size_t locate(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(k, x.size() - 2);
  }

  // order 0, 1, 2 -> value, first, second derivative
  double eval(double t, int order) const {
    const std::size_t k = locate(t);
    const double h = x[k + 1] - x[k];
    const double s = (t - x[k]) / h;
    const double y0 = y[k], y1 = y[k + 1], d0 = d[k] * h, d1 = d[k + 1] * h;
    switch (order) {
      case 0:
        return (2 * s * s * s - 3 * s * s + 1) * y0 + (s * s * s - 2 * s * s + s) * d0 +
               (-2 * s * s * s + 3 * s * s) * y1 + (s * s * s - s * s) * d1;
      case 1:
        return ((6 * s * s - 6 * s) * y0 + (3 * s * s - 4 * s + 1) * d0 +
                (-6 * s * s + 6 * s) * y1 + (3 * s * s - 2 * s) * d1) / h;
      default:
        return ((12 * s - 6) * y0 + (6 * s - 4) * d0 + (-12 * s + 6) * y1 + (6 * s - 2) * d1) /
               (h * h);
    }
  }
};

}  // namespace

FSpec from_table(std::vector<double> xs, std::vector<double> fs) {
  if (xs.size() != fs.size() || xs.size() < 2) {
    throw Error(ErrorKind::config, "table f needs at least two (x, f) pairs of equal length");
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(xs[i + 1] > xs[i])) throw Error(ErrorKind::config, "table x values must be increasing");
    if (!(fs[i + 1] < fs[i])) {
      throw Error(ErrorKind::config, "table f values must be strictly decreasing");
    }
  }
  auto p = std::make_shared<Pchip>();
  const std::size_t n = xs.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = xs[k + 1] - xs[k];
    delta[k] = (fs[k + 1] - fs[k]) / h[k];
  }
  p->d.assign(n, 0.0);
  p->d[0] = delta[0];
  p->d[n - 1] = delta[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    p->d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  const double last = fs.back();
  p->x = std::move(xs);
  p->y = std::move(fs);

  FSpec f = FSpec::custom(
      "table", [p](double t) { return p->eval(t, 0); }, [p](double t) { return p->eval(t, 1); },
      [p](double t) { return p->eval(t, 2); }, Interval::closed(p->x.front(), p->x.back()));
  f.bounded_below = last;
  f.growth = GrowthBound{0.0, std::max(0.0, -last), 1.0};
  certify(f);
  return f;
}

FSpec by_name(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        args.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(ErrorKind::config, "malformed f parameter '" + item + "'");
      }
    }
  }
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw Error(ErrorKind::config, "wrong number of parameters for f '" + spec + "'");
    }
  };
  if (kind == "classical") {
    need(0, 0);
    return classical();
  }
  if (kind == "linear") {
    need(1, 1);
    FSpec f = linear(args[0]);
    certify(f);
    return f;
  }
  if (kind == "power") {
    need(1, 1);
    return power(args[0]);
  }
  if (kind == "reciprocal") {
    need(1, 2);
    return reciprocal(args[0], args.size() == 2 ? args[1] : 1.0);
  }
  if (kind == "expdecay") {
    need(1, 1);
    return expdecay(args[0]);
  }
  throw Error(ErrorKind::config, "unknown f '" + spec + "'");
}

}  // namespace fzoo

double check_decreasing(const FSpec& f, const Interval& interval, int samples) {
  if (!f.domain.contains(interval)) {
    throw Error(ErrorKind::invalid_argument, "interval exits the domain of f '" + f.name + "'");
  }
  const Interval window = sampling_window(interval);
  double margin = std::numeric_limits<double>::infinity();
  for (double x : equispaced(window, samples)) margin = std::min(margin, -f.fp(x));
  return margin;
}

std::vector<HomogeneityTriple> default_homogeneity_samples(const FSpec& f, int count,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_lambda(std::log(0.25), std::log(4.0));
  const Interval window = sampling_window(f.domain, 4.0);
  const double lo = std::max(window.lo, f.domain.lo >= 0.0 ? 0.05 : window.lo);
  const double hi = std::min(window.hi, 4.0);
  std::uniform_real_distribution<double> coord(lo, hi);
  std::vector<HomogeneityTriple> out;
  for (int tries = 0; static_cast<int>(out.size()) < count && tries < 100 * count; ++tries) {
    HomogeneityTriple t{std::exp(log_lambda(rng)), coord(rng), coord(rng)};
    if (f.domain.contains(t.x) && f.domain.contains(t.y) && f.domain.contains(t.lambda * t.x) &&
        f.domain.contains(t.lambda * t.y)) {
      out.push_back(t);
    }
  }
  return out;
}

double homogeneity_check(const FSpec& f, double alpha, std::span<const HomogeneityTriple> triples) {
  double defect = 0.0;
  for (const auto& t : triples) {
    if (!(t.lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "homogeneity needs lambda > 0");
    if (!f.domain.contains(t.x) || !f.domain.contains(t.y) || !f.domain.contains(t.lambda * t.x) ||
        !f.domain.contains(t.lambda * t.y)) {
      continue;
    }
    const double lhs = f(t.lambda * t.x) - f(t.lambda * t.y);
    const double rhs = std::pow(t.lambda, alpha) * (f(t.x) - f(t.y));
    defect = std::max(defect, std::fabs(lhs - rhs));
  }
  return defect;
}

FSpec shift(const FSpec& f, double c) {
  FSpec out = f;
  out.name = f.name + (c >= 0 ? "+" : "") + num(c);
  out.eval_f = [g = f.eval_f, c](double x) { return g(x) + c; };
  if (out.growth) out.growth->nu = std::max(0.0, out.growth->nu - c);
  if (out.bounded_below) *out.bounded_below += c;
  return out;
}

FSpec normalize_at_zero(const FSpec& f) {
  if (!f.domain.contains(0.0)) {
    throw Error(ErrorKind::invalid_argument, "normalize_at_zero requires 0 in the domain of f");
  }
  return shift(f, -f(0.0));
}

double invert(const FSpec& f, double y, double lo, double hi, double tol) {
  if (lo > hi) std::swap(lo, hi);
  if (!f.domain.contains(lo) || !f.domain.contains(hi)) {
    throw Error(ErrorKind::invalid_argument, "inversion bracket exits the domain of f");
  }
  const double flo = f(lo), fhi = f(hi);
  if (y > flo || y < fhi) {
    throw Error(ErrorKind::invalid_argument, "value " + num(y) + " is not attained on the bracket");
  }
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace conflow
