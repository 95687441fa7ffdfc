#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "conflow/error.hpp"
#include "conflow/grid.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace conflow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField of(const GridPtr& g, double (*fn)(double)) {
  return ScalarField::sample(g, [fn](std::span<const double> x) { return fn(x[0]); });
}

std::vector<double> values(const ScalarField& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST(Grid, RejectsInvalidSpecs) {
  EXPECT_THROW(make_grid({2, {16}, {kTwoPi}}), Error);
  EXPECT_THROW(make_grid({4, {4}, {kTwoPi}}), Error);
  EXPECT_THROW(make_grid({4, {16}, {-1.0}}), Error);
  EXPECT_THROW(make_grid({3, {16, 16, 16, 16}, {1, 1, 1, 1}}), Error);
  EXPECT_THROW(make_grid({4, {16}, {1.0, 2.0}}), Error);
  EXPECT_NO_THROW(make_grid({4, {16, 8}, {kTwoPi, 1.0}}));
}

TEST(Grid, WeightsSumToOne) {
  auto g = make_grid({5, {12, 9}, {kTwoPi, 3.0}});
  EXPECT_EQ(g->size(), 108u);
  EXPECT_DOUBLE_EQ(integrate0(ScalarField(g, 1.0)), 1.0);
}

TEST(Laplacian, ConstantGivesZero) {
  auto g = make_grid_1d(4, 32, kTwoPi);
  const ScalarField lap = laplacian0(ScalarField(g, 3.7));
  for (double v : lap.values()) EXPECT_EQ(v, 0.0);
}

TEST(Laplacian, CosineMatchesAnalyticAndDenseOracle) {
  auto g = make_grid_1d(4, 256, kTwoPi);
  const ScalarField u = of(g, [](double x) { return std::cos(x); });
  const ScalarField lap = laplacian0(u);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::fabs(lap[i] + u[i]));
  EXPECT_LT(err, 1e-3);
  // The 3-point symbol gives the error in closed form.
  EXPECT_NEAR(err, oracle::cos_laplacian_error(256, kTwoPi), 1e-12);

  const auto dense = oracle::apply_laplacian(values(u), g->spacing(0));
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(lap[i], dense[i], 1e-10);
}

TEST(Laplacian, SecondOrderUnderRefinement) {
  double prev = 0.0;
  for (int n : {32, 64, 128, 256}) {
    auto g = make_grid_1d(4, n, kTwoPi);
    const ScalarField u = of(g, [](double x) { return std::cos(x); });
    const ScalarField lap = laplacian0(u);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::fabs(lap[i] + u[i]));
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.2) << "N=" << n;
    prev = err;
  }
}

TEST(Laplacian, TwoAxesAddUp) {
  auto g = make_grid({4, {32, 24}, {kTwoPi, kTwoPi}});
  const ScalarField u = ScalarField::sample(g, [](std::span<const double> x) {
    return std::cos(x[0]) * std::sin(2 * x[1]);
  });
  const ScalarField lap = laplacian0(u);
  const double h0 = g->spacing(0), h1 = g->spacing(1);
  const double m0 = (2 - 2 * std::cos(h0)) / (h0 * h0);
  const double m1 = (2 - 2 * std::cos(2 * h1)) / (h1 * h1);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(lap[i], -(m0 + m1) * u[i], 1e-11);
}

TEST(GradInner, ConstantGivesZeroAndSymmetry) {
  auto g = make_grid_1d(4, 64, kTwoPi);
  gen::Source src(3);
  const ScalarField a = src.rough(g, -1, 1);
  const ScalarField b = src.rough(g, -1, 1);
  {
    const ScalarField r = grad_inner(ScalarField(g, 2.0), a);
    for (double v : r.values()) EXPECT_EQ(v, 0.0);
  }
  const ScalarField ab = grad_inner(a, b), ba = grad_inner(b, a);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(ab[i], ba[i]);
}

TEST(GradInner, SineSquaredDerivative) {
  auto g = make_grid_1d(4, 256, kTwoPi);
  const ScalarField s = of(g, [](double x) { return std::sin(x); });
  const ScalarField gi = grad_inner(s, s);
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = std::cos(g->coordinate(0, i));
    err = std::max(err, std::fabs(gi[i] - c * c));
  }
  EXPECT_LT(err, 1e-3);
}

TEST(GradInner, MismatchedGridsThrow) {
  auto g1 = make_grid_1d(4, 16, kTwoPi);
  auto g2 = make_grid_1d(4, 32, kTwoPi);
  try {
    grad_inner(ScalarField(g1, 1.0), ScalarField(g2, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::grid_mismatch);
  }
}

TEST(Integrate, AnalyticValues) {
  auto g = make_grid_1d(4, 64, kTwoPi);
  EXPECT_DOUBLE_EQ(integrate0(ScalarField(g, 1.0)), 1.0);
  EXPECT_NEAR(integrate0(of(g, [](double x) { return std::sin(x); })), 0.0, 1e-12);
  EXPECT_NEAR(integrate0(of(g, [](double x) { return std::sin(x) * std::sin(x); })), 0.5, 1e-10);
}

TEST(Integrate, VolumeWeight) {
  auto g = make_grid_1d(4, 32, kTwoPi);
  EXPECT_DOUBLE_EQ(volume_exponent(4), 4.0);
  EXPECT_DOUBLE_EQ(volume_exponent(3), 6.0);
  EXPECT_DOUBLE_EQ(integrate_g(ScalarField(g, 1.0), ScalarField(g, 1.0)), 1.0);
  EXPECT_NEAR(integrate_g(ScalarField(g, 1.0), ScalarField(g, 1.3)), std::pow(1.3, 4), 1e-14);
  ScalarField u(g, 1.0);
  u[3] = 0.0;
  try {
    integrate_g(ScalarField(g, 1.0), u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::positivity_lost);
    EXPECT_NE(std::string(e.what()).find("positive cone"), std::string::npos);
  }
}

TEST(Norms, LpAndExtrema) {
  auto g = make_grid_1d(4, 64, kTwoPi);
  const ScalarField one(g, 1.0);
  for (double p : {1.0, 2.0, 3.5}) EXPECT_NEAR(lp_norm_g(ScalarField(g, -2.5), p, one), 2.5, 1e-14);
  EXPECT_NEAR(lp_norm_g(of(g, [](double x) { return std::sin(x); }), 2.0, one), std::sqrt(0.5), 1e-10);
  EXPECT_THROW(lp_norm_g(one, 0.5, one), Error);
  const ScalarField f = of(g, [](double x) { return -std::fabs(std::sin(x)); });
  EXPECT_EQ(field_max(f), -0.0);
  EXPECT_EQ(f[0], field_max(f));
  EXPECT_NEAR(field_min(f), -1.0, 1e-15);
  EXPECT_NEAR(sup_norm(f), 1.0, 1e-15);
}

TEST(MakeField, Specs) {
  auto g = make_grid_1d(4, 16, kTwoPi);
  EXPECT_EQ(make_field(g, "constant:2.5")[7], 2.5);
  const ScalarField s = make_field(g, "sinusoidal:1,0.5,0");
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], 1 + 0.5 * std::sin(g->coordinate(0, i)), 1e-15);
  const ScalarField c = make_field(g, "sinusoidal:1,0.3,0,1.5707963267948966");
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 1 + 0.3 * std::cos(g->coordinate(0, i)), 1e-15);
  EXPECT_THROW(make_field(g, "constant"), Error);
  EXPECT_THROW(make_field(g, "wavy:1"), Error);
  EXPECT_THROW(make_field(g, "sinusoidal:1,0.5,3"), Error);
}

TEST(Property, LaplacianSelfAdjoint) {
  gen::Source src(11);
  for (int k = 0; k < 50; ++k) {
    auto g = src.grid_1d();
    const ScalarField a = src.rough(g, -1, 1), b = src.rough(g, -1, 1);
    const double lhs = integrate0(laplacian0(a) * b), rhs = integrate0(a * laplacian0(b));
    const double scale = std::sqrt(integrate0(a * a) * integrate0(b * b)) / (g->spacing(0) * g->spacing(0));
    EXPECT_LE(std::fabs(lhs - rhs), 1e-12 * scale) << "case " << k;
  }
}

TEST(Property, SummationByParts) {
  gen::Source src(12);
  for (int k = 0; k < 50; ++k) {
    auto g = src.grid_1d();
    const ScalarField a = src.smooth(g, 0.0, 1.0), b = src.smooth(g, 0.0, 1.0);
    EXPECT_LE(std::fabs(integrate0(a * laplacian0(b)) + integrate0(grad_inner(a, b))), 1e-10) << "case " << k;
  }
}

TEST(Property, LaplacianNonPositiveAtMaximum) {
  gen::Source src(13);
  for (int k = 0; k < 200; ++k) {
    auto g = src.integer(0, 1) ? src.grid_1d() : make_grid({4, {src.integer(8, 20), src.integer(8, 20)}, {1.0, 2.0}});
    const ScalarField a = src.rough(g, -5, 5);
    const ScalarField lap = laplacian0(a);
    const double mx = field_max(a), mn = field_min(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == mx) EXPECT_LE(lap[i], 0.0);
      if (a[i] == mn) EXPECT_GE(lap[i], 0.0);
    }
  }
}

TEST(Property, LaplacianSumsToZero) {
  gen::Source src(14);
  for (int k = 0; k < 50; ++k) {
    auto g = src.grid_1d();
    const ScalarField a = src.rough(g, -1, 1);
    EXPECT_NEAR(integrate0(laplacian0(a)) * g->spacing(0) * g->spacing(0), 0.0, 1e-14) << "case " << k;
  }
}
