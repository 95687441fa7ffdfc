#pragma once

// Conformal geometry on the lattice. A state is a positive conformal factor u
// over a background with prescribed curvature S0; the evolving metric is
// u^{4/(n-2)} g0 and its scalar curvature is u^{-beta} (S0 u - c_n lap0 u).

#include <string>
#include <string_view>

#include "conflow/fzoo.hpp"
#include "conflow/grid.hpp"

namespace conflow {

struct Constants {
  int n = 3;
  double beta = 5.0;    // (n+2)/(n-2)
  double c_n = 8.0;     // 4(n-1)/(n-2)
  double gamma = 6.0;   // 2n/(n-2), volume exponent
  double rate = 0.25;   // (n-2)/4, du/dt = rate (f(S) - A) u

  static Constants of(int n);
};

enum class CurvatureCase { negative, flat, positive, mixed };

const char* to_string(CurvatureCase c) noexcept;

class Background {
 public:
  Background() = default;
  explicit Background(ScalarField s0);

  /// Builds S0 from a field spec (constant:, sinusoidal:, file:).
  static Background from_spec(const GridPtr& grid, std::string_view spec);

  const ScalarField& s0() const noexcept { return s0_; }
  const GridPtr& grid_ptr() const noexcept { return s0_.grid_ptr(); }
  const Grid& grid() const { return s0_.grid(); }
  const Constants& constants() const noexcept { return k_; }
  int n() const noexcept { return k_.n; }
  CurvatureCase case_tag() const noexcept { return case_; }
  double s0_min() const noexcept { return s0_min_; }
  double s0_max() const noexcept { return s0_max_; }

 private:
  ScalarField s0_;
  Constants k_;
  CurvatureCase case_ = CurvatureCase::flat;
  double s0_min_ = 0.0;
  double s0_max_ = 0.0;
};

struct ConformalState {
  ScalarField u;
  double t = 0.0;
};

/// S0 u - c_n lap0 u.
ScalarField conformal_laplacian(const Background& bg, const ScalarField& u);

/// u^{-beta} L(u). Throws positivity_lost for u <= 0.
ScalarField scalar_curvature(const Background& bg, const ScalarField& u);

/// u^{-4/(n-2)} (lap0 xi + 2/u <grad u, grad xi>), the pointwise form.
ScalarField metric_laplacian(const Background& bg, const ScalarField& u, const ScalarField& xi);

/// u^{-beta} (lap0(xi u) - xi lap0 u). Same continuum operator as
/// metric_laplacian, but self-adjoint for the discrete g-volume weights.
ScalarField metric_laplacian_conservative(const Background& bg, const ScalarField& u,
                                          const ScalarField& xi);

/// Edge form sum u_i u_j (a_j - a_i)(b_j - b_i) / h^2 over lattice edges,
/// normalized like integrate0. Satisfies
///   integrate_g(a * metric_laplacian_conservative(b), u) == -metric_dirichlet_form(u, a, b).
double metric_dirichlet_form(const ScalarField& u, const ScalarField& a, const ScalarField& b);

double volume(const ScalarField& u);

/// Throws f_domain_violation if any value of S lies outside the domain of f.
void require_in_domain(const FSpec& f, const ScalarField& s);

/// Volume-weighted mean of f(S).
double average_f(const Background& bg, const ScalarField& u, const FSpec& f);

/// Volume-weighted mean of S.
double sigma(const Background& bg, const ScalarField& u);

/// Vol^{(2-n)/n} * integral of S dVol_g.
double einstein_hilbert(const Background& bg, const ScalarField& u);

}  // namespace conflow
