#pragma once

// Periodic uniform lattice, nodal scalar fields, and the discrete operators
// used everywhere else: the 3-point Laplacian per active axis, the matching
// gradient inner product, and normalized quadrature.
//
// Only `active_dims` axes are resolved. The ambient dimension n enters through
// exponents alone; fields are taken to be constant along the suppressed axes,
// which contribute a factor of one to the (normalized) volume weight.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace conflow {

struct GridSpec {
  int ambient_n = 3;
  std::vector<int> points;      // one entry per active axis
  std::vector<double> periods;  // one entry per active axis

  int active_dims() const noexcept { return static_cast<int>(points.size()); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class Grid {
 public:
  static constexpr int kMinPointsPerAxis = 8;

  /// Validates the spec: n >= 3, 1 <= active_dims <= min(3, n),
  /// at least 8 points and a positive period on every active axis.
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int ambient_n() const noexcept { return spec_.ambient_n; }
  int active_dims() const noexcept { return spec_.active_dims(); }
  std::size_t size() const noexcept { return size_; }

  int points(int axis) const { return spec_.points.at(axis); }
  double period(int axis) const { return spec_.periods.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  double min_spacing() const noexcept;
  std::size_t stride(int axis) const { return strides_.at(axis); }

  /// Position of `node` along `axis`, in [0, period).
  double coordinate(int axis, std::size_t node) const;

  /// Quadrature weight per node; weights sum to one.
  double weight() const noexcept { return weight_; }

 private:
  GridSpec spec_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;  // row-major, last axis fastest
  std::size_t size_ = 0;
  double weight_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(GridSpec spec);

/// Convenience for the common case of a single active axis with period 2*pi.
GridPtr make_grid_1d(int ambient_n, int points, double period);

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, double value);
  /// Throws if the length does not match the grid or any value is non-finite.
  ScalarField(GridPtr grid, std::vector<double> values);

  /// Samples fn(x_0, ..., x_{d-1}) at every node.
  static ScalarField sample(GridPtr grid,
                            const std::function<double(std::span<const double>)>& fn);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const noexcept;

  template <class Fn>
  ScalarField map(Fn&& fn) const {
    ScalarField out(*this);
    for (double& v : out.values_) v = fn(v);
    return out;
  }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Throws ErrorKind::grid_mismatch unless both fields live on equal grids.
void require_same_grid(const ScalarField& a, const ScalarField& b);

/// Second-order centered Laplacian, summed over active axes.
ScalarField laplacian0(const ScalarField& field);

/// Average of the forward-forward and backward-backward difference products.
/// Pairs with laplacian0 so that sum(a * lap(b)) == -sum(grad_inner(a, b))
/// holds to rounding.
ScalarField grad_inner(const ScalarField& a, const ScalarField& b);

/// Background quadrature, normalized so integrate0(1) == 1.
double integrate0(const ScalarField& field);

/// Exponent 2n/(n-2) relating dVol_g to dVol_{g0}.
double volume_exponent(int ambient_n) noexcept;

/// Integral against u^{2n/(n-2)} dVol_{g0}. Throws positivity_lost if u <= 0.
double integrate_g(const ScalarField& field, const ScalarField& u);

/// (integral |field|^p dVol_g)^{1/p}. Throws invalid_argument for p < 1.
double lp_norm_g(const ScalarField& field, double p, const ScalarField& u);

double field_min(const ScalarField& field);
double field_max(const ScalarField& field);
double sup_norm(const ScalarField& field);

/// Throws positivity_lost ("state outside positive cone") unless min(u) > floor.
void require_positive(const ScalarField& u, double floor = 0.0);

/// Field constructors used by config files:
///   constant:<value>
///   sinusoidal:<mean>,<amplitude>,<axis>[,<phase>]   mean + amp*sin(2*pi*x/L + phase)
///   file:<path>                                     snapshot in field format
ScalarField make_field(const GridPtr& grid, std::string_view spec);

}  // namespace conflow
