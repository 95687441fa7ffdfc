#include "conflow/conformal.hpp"

#include <cmath>

#include "conflow/error.hpp"
#include "summation.hpp"

namespace conflow {

Constants Constants::of(int n) {
  if (n < 3) throw Error(ErrorKind::invalid_argument, "ambient dimension must be >= 3");
  Constants k;
  k.n = n;
  k.beta = (n + 2.0) / (n - 2.0);
  k.c_n = 4.0 * (n - 1.0) / (n - 2.0);
  k.gamma = 2.0 * n / (n - 2.0);
  k.rate = (n - 2.0) / 4.0;
  return k;
}

const char* to_string(CurvatureCase c) noexcept {
  switch (c) {
    case CurvatureCase::negative: return "negative";
    case CurvatureCase::flat: return "flat";
    case CurvatureCase::positive: return "positive";
    case CurvatureCase::mixed: return "mixed";
  }
  return "mixed";
}

Background::Background(ScalarField s0) : s0_(std::move(s0)) {
  if (!s0_.grid_ptr()) throw Error(ErrorKind::invalid_argument, "background requires a grid");
  k_ = Constants::of(s0_.grid().ambient_n());
  s0_min_ = field_min(s0_);
  s0_max_ = field_max(s0_);
  if (s0_max_ < 0.0) {
    case_ = CurvatureCase::negative;
  } else if (s0_min_ == 0.0 && s0_max_ == 0.0) {
    case_ = CurvatureCase::flat;
  } else if (s0_min_ > 0.0) {
    case_ = CurvatureCase::positive;
  } else {
    case_ = CurvatureCase::mixed;
  }
}

Background Background::from_spec(const GridPtr& grid, std::string_view spec) {
  return Background(make_field(grid, spec));
}

ScalarField conformal_laplacian(const Background& bg, const ScalarField& u) {
  require_same_grid(bg.s0(), u);
  ScalarField out = laplacian0(u);
  const double c_n = bg.constants().c_n;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = bg.s0()[i] * u[i] - c_n * out[i];
  return out;
}

ScalarField scalar_curvature(const Background& bg, const ScalarField& u) {
  require_positive(u);
  ScalarField out = conformal_laplacian(bg, u);
  const double beta = bg.constants().beta;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] *= std::pow(u[i], -beta);
  return out;
}

ScalarField metric_laplacian(const Background& bg, const ScalarField& u, const ScalarField& xi) {
  require_same_grid(bg.s0(), u);
  require_positive(u);
  ScalarField lap = laplacian0(xi);
  const ScalarField g = grad_inner(u, xi);
  const double e = bg.constants().beta - 1.0;  // 4/(n-2)
  for (std::size_t i = 0; i < u.size(); ++i) {
    lap[i] = std::pow(u[i], -e) * (lap[i] + 2.0 * g[i] / u[i]);
  }
  return lap;
}

ScalarField metric_laplacian_conservative(const Background& bg, const ScalarField& u,
                                          const ScalarField& xi) {
  require_same_grid(bg.s0(), u);
  require_positive(u);
  ScalarField out = laplacian0(xi * u);
  const ScalarField lap_u = laplacian0(u);
  const double beta = bg.constants().beta;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::pow(u[i], -beta) * (out[i] - xi[i] * lap_u[i]);
  }
  return out;
}

double metric_dirichlet_form(const ScalarField& u, const ScalarField& a, const ScalarField& b) {
  require_same_grid(u, a);
  require_same_grid(u, b);
  const Grid& g = u.grid();
  detail::CompensatedSum sum;
  for (int ax = 0; ax < g.active_dims(); ++ax) {
    const std::size_t stride = g.stride(ax);
    const std::size_t n = static_cast<std::size_t>(g.points(ax));
    const double inv_h2 = 1.0 / (g.spacing(ax) * g.spacing(ax));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t c = (i / stride) % n;
      const std::size_t j = c + 1 < n ? i + stride : i - (n - 1) * stride;
      sum.add(u[i] * u[j] * (a[j] - a[i]) * (b[j] - b[i]) * inv_h2);
    }
  }
  return sum.value() * g.weight();
}

double volume(const ScalarField& u) { return integrate_g(ScalarField(u.grid_ptr(), 1.0), u); }

void require_in_domain(const FSpec& f, const ScalarField& s) {
  for (double v : s.values()) {
    if (!f.domain.contains(v)) {
      throw Error(ErrorKind::f_domain_violation,
                  "f-domain violation: S = " + std::to_string(v) + " outside the domain of " + f.name);
    }
  }
}

double average_f(const Background& bg, const ScalarField& u, const FSpec& f) {
  const ScalarField s = scalar_curvature(bg, u);
  require_in_domain(f, s);
  return integrate_g(s.map([&](double x) { return f(x); }), u) / volume(u);
}

double sigma(const Background& bg, const ScalarField& u) {
  return integrate_g(scalar_curvature(bg, u), u) / volume(u);
}

double einstein_hilbert(const Background& bg, const ScalarField& u) {
  const int n = bg.n();
  return std::pow(volume(u), (2.0 - n) / n) * integrate_g(scalar_curvature(bg, u), u);
}

}  // namespace conflow
