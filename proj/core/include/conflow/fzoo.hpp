#pragma once

// Strictly decreasing speed functions f for the flow dg/dt = (f(S) - A) g.
//
// An FSpec carries f, f', f'' together with the metadata the diagnostics
// need: the domain, an optional homogeneity degree, a growth certificate
// -f(x) <= mu x^kappa + nu on x >= 0, and an optional lower bound inf f.
// Built-ins are certified on construction; FSpec::custom() is unchecked so
// that candidates (including bad ones) can be probed with check_decreasing.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conflow {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  static Interval real_line() { return {}; }
  static Interval closed(double a, double b) { return {a, b, false, false}; }
  static Interval open(double a, double b) { return {a, b, true, true}; }
  static Interval at_least(double a) { return {a, std::numeric_limits<double>::infinity(), false, true}; }
  static Interval greater_than(double a) { return {a, std::numeric_limits<double>::infinity(), true, true}; }

  bool contains(double x) const noexcept;
  bool contains(const Interval& other) const noexcept;
};

struct GrowthBound {
  double mu = 0.0;
  double nu = 0.0;
  double kappa = 1.0;
};

struct FSpec {
  using Fn = std::function<double(double)>;

  std::string name;
  Fn eval_f;
  Fn eval_fp;
  Fn eval_fpp;
  Interval domain;
  std::optional<double> alpha_homogeneous;
  std::optional<GrowthBound> growth;
  std::optional<double> bounded_below;  // inf of f over [0, inf) ∩ domain

  double operator()(double x) const { return eval_f(x); }
  double fp(double x) const { return eval_fp(x); }
  double fpp(double x) const { return eval_fpp(x); }

  static FSpec custom(std::string name, Fn f, Fn fp, Fn fpp, Interval domain);
};

struct CertifyOptions {
  int samples = 10000;
  std::uint64_t seed = 0;  // extra jittered samples are drawn from this seed
};

/// Rejects f unless f' < 0 at every sample of its domain (a window of
/// [-32, 32] is used for unbounded ends), the growth certificate holds on
/// sampled x >= 0, and a declared homogeneity degree is consistent.
/// Throws Error(config).
void certify(const FSpec& f, const CertifyOptions& options = {});

namespace fzoo {

FSpec classical();                                    // -x, alpha = 1
FSpec linear(double slope);                           // slope * x (certified only if slope < 0)
FSpec power(double kappa);                            // -x^kappa on x >= 0, kappa >= 1
FSpec reciprocal(double shift, double exponent = 1);  // (x + shift)^(-exponent)
FSpec expdecay(double rate);                          // exp(-rate x)

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of (x, f) pairs.
/// Throws Error(config) unless xs is increasing and fs strictly decreasing.
FSpec from_table(std::vector<double> xs, std::vector<double> fs);

/// Parses "classical", "linear:<s>", "power:<k>", "reciprocal:<a>[,<b>]", "expdecay:<a>".
FSpec by_name(const std::string& spec);

}  // namespace fzoo

/// min over `samples` equispaced points of -f'(x). Positive means f' <= -margin.
/// Throws invalid_argument if the interval is not contained in f's domain.
double check_decreasing(const FSpec& f, const Interval& interval, int samples);

struct HomogeneityTriple {
  double lambda, x, y;
};

std::vector<HomogeneityTriple> default_homogeneity_samples(const FSpec& f, int count = 64,
                                                           std::uint64_t seed = 1);

/// max |f(lx) - f(ly) - l^alpha (f(x) - f(y))| over the triples.
double homogeneity_check(const FSpec& f, double alpha, std::span<const HomogeneityTriple> triples);

FSpec shift(const FSpec& f, double c);

/// f - f(0). Requires 0 in the domain.
FSpec normalize_at_zero(const FSpec& f);

/// Solves f(x) = y for x in `bracket` by bisection to width `tol`.
double invert(const FSpec& f, double y, double lo, double hi, double tol = 1e-12);

/// Finite window used for sampling an interval that may be unbounded.
Interval sampling_window(const Interval& domain, double half_width = 32.0);

}  // namespace conflow
