#pragma once

// Independent reference implementations. Nothing here calls the library's
// operators; inputs and outputs are plain vectors.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;

/// Dense periodic 3-point Laplacian on one axis of N points and spacing h.
inline Eigen::MatrixXd laplacian_matrix(int n_points, double h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_points, n_points);
  const double s = 1.0 / (h * h);
  for (int i = 0; i < n_points; ++i) {
    m(i, i) = -2.0 * s;
    m(i, (i + 1) % n_points) += s;
    m(i, (i + n_points - 1) % n_points) += s;
  }
  return m;
}

inline Eigen::VectorXd to_eigen(const Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

inline Vec from_eigen(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

inline Vec apply_laplacian(const Vec& u, double h) {
  return from_eigen(laplacian_matrix(static_cast<int>(u.size()), h) * to_eigen(u));
}

/// Mean over nodes in long double.
inline double mean(const Vec& v) {
  long double acc = 0.0L;
  for (double x : v) acc += x;
  return static_cast<double>(acc / v.size());
}

struct Exponents {
  double beta, c_n, gamma, rate;
};

inline Exponents exponents(int n) {
  const double nd = n;
  return {(nd + 2) / (nd - 2), 4 * (nd - 1) / (nd - 2), 2 * nd / (nd - 2), (nd - 2) / 4};
}

/// S = u^{-beta} (S0 u - c_n lap u) with the dense Laplacian.
inline Vec scalar_curvature(const Vec& s0, const Vec& u, int n, double h) {
  const Exponents e = exponents(n);
  const Vec lap = apply_laplacian(u, h);
  Vec s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    s[i] = std::pow(u[i], -e.beta) * (s0[i] * u[i] - e.c_n * lap[i]);
  }
  return s;
}

inline double volume(const Vec& u, int n) {
  const double g = exponents(n).gamma;
  Vec w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = std::pow(u[i], g);
  return mean(w);
}

/// Volume-weighted mean of values.
inline double weighted_mean(const Vec& values, const Vec& u, int n) {
  const double g = exponents(n).gamma;
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const long double w = std::pow(static_cast<long double>(u[i]), static_cast<long double>(g));
    num += w * values[i];
    den += w;
  }
  return static_cast<double>(num / den);
}

template <class F>
Vec rhs_normalized(const Vec& s0, const Vec& u, int n, double h, F&& f) {
  const Vec s = scalar_curvature(s0, u, n, h);
  Vec fs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) fs[i] = f(s[i]);
  const double a = weighted_mean(fs, u, n);
  const double rate = exponents(n).rate;
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = rate * (fs[i] - a) * u[i];
  return out;
}

/// Max-norm error of the 3-point second difference applied to cos(k x):
/// the stencil multiplies cos(k x) by -(2 - 2 cos(k h)) / h^2.
inline double cos_laplacian_error(int n_points, double period, int k = 1) {
  const double h = period / n_points;
  const double w = 2.0 * M_PI * k / period;
  const long double half = std::sin(static_cast<long double>(w) * h / 2) / h;
  return static_cast<double>(std::fabs(static_cast<long double>(w) * w - 4 * half * half));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const Vec& x, const Vec& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace oracle

namespace oracle {

/// Mean of forward and backward difference products on a periodic 1-D grid.
inline Vec grad_inner(const Vec& a, const Vec& b, double h) {
  const std::size_t m = a.size();
  Vec out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ip = (i + 1) % m, im = (i + m - 1) % m;
    out[i] = ((a[ip] - a[i]) * (b[ip] - b[i]) + (a[i] - a[im]) * (b[i] - b[im])) / (2 * h * h);
  }
  return out;
}

}  // namespace oracle
