#include "conflow/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "conflow/error.hpp"
#include "conflow/field_io.hpp"
#include "summation.hpp"

namespace conflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::grid_mismatch: return "grid_mismatch";
    case ErrorKind::positivity_lost: return "positivity_lost";
    case ErrorKind::f_domain_violation: return "f_domain_violation";
    case ErrorKind::parabolicity_lost: return "parabolicity_lost";
    case ErrorKind::not_homogeneous: return "not_homogeneous";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
  if (spec_.ambient_n < 3) {
    throw Error(ErrorKind::invalid_argument, "ambient dimension must be >= 3");
  }
  const int d = spec_.active_dims();
  if (d < 1 || d > 3 || d > spec_.ambient_n) {
    throw Error(ErrorKind::invalid_argument,
                "active_dims must be in {1,2,3} and not exceed the ambient dimension");
  }
  if (spec_.periods.size() != spec_.points.size()) {
    throw Error(ErrorKind::invalid_argument, "one period per active axis is required");
  }
  size_ = 1;
  for (int a = 0; a < d; ++a) {
    if (spec_.points[a] < kMinPointsPerAxis) {
      throw Error(ErrorKind::invalid_argument, "at least 8 points per active axis");
    }
    if (!(spec_.periods[a] > 0.0) || !std::isfinite(spec_.periods[a])) {
      throw Error(ErrorKind::invalid_argument, "periods must be positive and finite");
    }
    size_ *= static_cast<std::size_t>(spec_.points[a]);
    spacing_.push_back(spec_.periods[a] / spec_.points[a]);
  }
  strides_.assign(d, 1);
  for (int a = d - 2; a >= 0; --a) {
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(spec_.points[a + 1]);
  }
  weight_ = 1.0 / static_cast<double>(size_);
}

double Grid::min_spacing() const noexcept {
  return *std::min_element(spacing_.begin(), spacing_.end());
}

double Grid::coordinate(int axis, std::size_t node) const {
  const std::size_t idx = (node / strides_.at(axis)) % static_cast<std::size_t>(points(axis));
  return spacing_[axis] * static_cast<double>(idx);
}

GridPtr make_grid(GridSpec spec) { return std::make_shared<const Grid>(std::move(spec)); }

GridPtr make_grid_1d(int ambient_n, int points, double period) {
  return make_grid(GridSpec{ambient_n, {points}, {period}});
}

ScalarField::ScalarField(GridPtr grid, double value) : grid_(std::move(grid)) {
  if (!grid_) throw Error(ErrorKind::invalid_argument, "field requires a grid");
  if (!std::isfinite(value)) throw Error(ErrorKind::invalid_argument, "non-finite field value");
  values_.assign(grid_->size(), value);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorKind::invalid_argument, "field requires a grid");
  if (values_.size() != grid_->size()) {
    throw Error(ErrorKind::invalid_argument, "field length does not match node count");
  }
  if (!all_finite()) throw Error(ErrorKind::invalid_argument, "non-finite field value");
}

ScalarField ScalarField::sample(GridPtr grid,
                                const std::function<double(std::span<const double>)>& fn) {
  std::vector<double> values(grid->size());
  std::vector<double> x(grid->active_dims());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (int a = 0; a < grid->active_dims(); ++a) x[a] = grid->coordinate(a, i);
    values[i] = fn(x);
  }
  return ScalarField(std::move(grid), std::move(values));
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (a.grid_ptr() == b.grid_ptr()) return;
  if (!a.grid_ptr() || !b.grid_ptr() || !(a.grid().spec() == b.grid().spec())) {
    throw Error(ErrorKind::grid_mismatch, "fields live on different grids");
  }
}

namespace {

// Periodic neighbour of node i along an axis with n points and the given stride.
inline std::size_t next_node(std::size_t i, std::size_t stride, std::size_t n) {
  const std::size_t c = (i / stride) % n;
  return c + 1 < n ? i + stride : i - (n - 1) * stride;
}

inline std::size_t prev_node(std::size_t i, std::size_t stride, std::size_t n) {
  const std::size_t c = (i / stride) % n;
  return c > 0 ? i - stride : i + (n - 1) * stride;
}

}  // namespace

ScalarField laplacian0(const ScalarField& field) {
  const Grid& g = field.grid();
  ScalarField out(field.grid_ptr(), 0.0);
  auto in = field.values();
  auto res = out.values();
  for (int a = 0; a < g.active_dims(); ++a) {
    const std::size_t stride = g.stride(a);
    const std::size_t n = static_cast<std::size_t>(g.points(a));
    const double inv_h2 = 1.0 / (g.spacing(a) * g.spacing(a));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double up = in[next_node(i, stride, n)];
      const double dn = in[prev_node(i, stride, n)];
      res[i] += (up - 2.0 * in[i] + dn) * inv_h2;
    }
  }
  return out;
}

ScalarField grad_inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  const Grid& g = a.grid();
  ScalarField out(a.grid_ptr(), 0.0);
  auto av = a.values();
  auto bv = b.values();
  auto res = out.values();
  for (int ax = 0; ax < g.active_dims(); ++ax) {
    const std::size_t stride = g.stride(ax);
    const std::size_t n = static_cast<std::size_t>(g.points(ax));
    const double inv_h2 = 1.0 / (g.spacing(ax) * g.spacing(ax));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t ip = next_node(i, stride, n);
      const std::size_t im = prev_node(i, stride, n);
      const double fwd = (av[ip] - av[i]) * (bv[ip] - bv[i]);
      const double bwd = (av[i] - av[im]) * (bv[i] - bv[im]);
      res[i] += 0.5 * (fwd + bwd) * inv_h2;
    }
  }
  return out;
}

double integrate0(const ScalarField& field) {
  detail::CompensatedSum sum;
  for (double v : field.values()) sum.add(v);
  return sum.value() * field.grid().weight();
}

double volume_exponent(int ambient_n) noexcept {
  return 2.0 * ambient_n / (ambient_n - 2.0);
}

void require_positive(const ScalarField& u, double floor) {
  for (double v : u.values()) {
    if (!(v > floor)) throw Error(ErrorKind::positivity_lost, "state outside positive cone");
  }
}

double integrate_g(const ScalarField& field, const ScalarField& u) {
  require_same_grid(field, u);
  require_positive(u);
  const double gamma = volume_exponent(u.grid().ambient_n());
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < u.size(); ++i) sum.add(field[i] * std::pow(u[i], gamma));
  return sum.value() * u.grid().weight();
}

double lp_norm_g(const ScalarField& field, double p, const ScalarField& u) {
  if (!(p >= 1.0)) throw Error(ErrorKind::invalid_argument, "L^p norm requires p >= 1");
  require_same_grid(field, u);
  require_positive(u);
  const double gamma = volume_exponent(u.grid().ambient_n());
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum.add(std::pow(std::fabs(field[i]), p) * std::pow(u[i], gamma));
  }
  return std::pow(sum.value() * u.grid().weight(), 1.0 / p);
}

double field_min(const ScalarField& field) {
  return *std::min_element(field.values().begin(), field.values().end());
}

double field_max(const ScalarField& field) {
  return *std::max_element(field.values().begin(), field.values().end());
}

double sup_norm(const ScalarField& field) {
  double m = 0.0;
  for (double v : field.values()) m = std::max(m, std::fabs(v));
  return m;
}

namespace {

std::vector<double> parse_numbers(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string buf(text);
  std::stringstream ss(buf);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "malformed number in " + std::string(what) + ": '" + item + "'");
    }
  }
  return out;
}

}  // namespace

ScalarField make_field(const GridPtr& grid, std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::config, "field spec must look like kind:args, got '" + std::string(spec) + "'");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view args = spec.substr(colon + 1);

  if (kind == "constant") {
    const auto v = parse_numbers(args, "constant");
    if (v.size() != 1) throw Error(ErrorKind::config, "constant:<value> takes one number");
    return ScalarField(grid, v[0]);
  }
  if (kind == "sinusoidal") {
    const auto v = parse_numbers(args, "sinusoidal");
    if (v.size() != 3 && v.size() != 4) {
      throw Error(ErrorKind::config, "sinusoidal:<mean>,<amplitude>,<axis>[,<phase>]");
    }
    const double mean = v[0];
    const double amp = v[1];
    const int axis = static_cast<int>(v[2]);
    const double phase = v.size() == 4 ? v[3] : 0.0;
    if (axis < 0 || axis >= grid->active_dims() || static_cast<double>(axis) != v[2]) {
      throw Error(ErrorKind::config, "sinusoidal axis out of range");
    }
    const double k = 2.0 * std::numbers::pi / grid->period(axis);
    return ScalarField::sample(grid, [&](std::span<const double> x) {
      return mean + amp * std::sin(k * x[axis] + phase);
    });
  }
  if (kind == "file") {
    ScalarField loaded = read_field(std::string(args));
    if (!(loaded.grid().spec() == grid->spec())) {
      throw Error(ErrorKind::grid_mismatch, "field file grid does not match the configured grid");
    }
    return ScalarField(grid, std::vector<double>(loaded.values().begin(), loaded.values().end()));
  }
  throw Error(ErrorKind::config, "unknown field kind '" + std::string(kind) + "'");
}

}  // namespace conflow
