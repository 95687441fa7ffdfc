#pragma once

// Method-of-lines integration of du/dt = rate (f(S) - A) u and of the
// non-normalized variant du/dt = rate f(S) u, plus the linearizations and the
// time reparametrization that maps one onto the other for homogeneous f.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "conflow/conformal.hpp"
#include "conflow/fzoo.hpp"
#include "conflow/grid.hpp"

namespace conflow {

enum class Scheme { euler, rk4 };

enum class Termination { time_reached, stationary, blowup, f_domain_violation, positivity_lost };

const char* to_string(Scheme s) noexcept;
const char* to_string(Termination t) noexcept;
Scheme parse_scheme(std::string_view name);

/// Everything derived from one state that the integrator and the logs need.
struct Evaluation {
  ScalarField s;   // scalar curvature
  ScalarField fs;  // f(S)
  ScalarField w;   // g-volume weight per node, u^gamma * weight()
  double vol = 0.0;
  double a = 0.0;
  double sigma = 0.0;
};

/// Throws positivity_lost or f_domain_violation.
Evaluation evaluate(const Background& bg, const ScalarField& u, const FSpec& f);

ScalarField rhs_normalized(const Background& bg, const ScalarField& u, const FSpec& f);
ScalarField rhs_nonnormalized(const Background& bg, const ScalarField& u, const FSpec& f);

struct ParabolicMargins {
  double u_margin = 0.0;   // min u
  double fp_margin = 0.0;  // min over the S range of -f'(S)
};

ParabolicMargins check_parabolic_validity(const Background& bg, const ScalarField& u, const FSpec& f);

/// safety * h_min^2 / (2 d max kappa) with kappa = (n-1) |f'(S)| u^{1-beta}.
/// Throws parabolicity_lost if f' >= 0 anywhere on the current S range.
double stable_dt(const Background& bg, const ScalarField& u, const FSpec& f, double safety);

/// One explicit step. A is recomputed at every stage.
ConformalState step(const Background& bg, const ConformalState& state, const FSpec& f, double dt,
                    Scheme scheme, bool normalized = true);

/// Rescales u so that its g-volume is one.
ConformalState renormalize_volume(const ConformalState& state);

struct DtPolicy {
  enum class Kind { fixed, adaptive, replay };
  Kind kind = Kind::adaptive;
  double dt = 0.0;
  double safety = 0.8;
  std::vector<double> sequence;

  static DtPolicy fixed(double dt) { return {Kind::fixed, dt, 0.8, {}}; }
  static DtPolicy adaptive(double safety = 0.8) { return {Kind::adaptive, 0.0, safety, {}}; }
  static DtPolicy replay(std::vector<double> seq) { return {Kind::replay, 0.0, 0.8, std::move(seq)}; }
};

struct Record {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;  // size of the step that produced this state
  double s_min = 0.0, s_max = 0.0;
  double a = 0.0, sigma = 0.0, vol = 0.0;
  double fsa_sup = 0.0;  // sup |f(S) - A|
  double lp1 = 0.0, lp2 = 0.0, lpn2 = 0.0;  // L^1, L^2, L^{n/2} norms of S in g
  double u_min = 0.0, u_max = 0.0;
  double dudt_sup = 0.0;
  double vol_drift = 0.0;      // accumulated pre-correction volume change
  double flat_integral = 0.0;  // integrate0(u^beta S)
  double step3 = 0.0;          // running time integral of (int |S|^{n^2/(2(n-2))} dVol)^{(n-2)/n}
  double u_margin = 0.0, fp_margin = 0.0;
};

/// Builds a record (without step, t, dt, vol_drift, step3) from a state.
Record measure(const Background& bg, const ScalarField& u, const FSpec& f, bool normalized = true);

struct Snapshot {
  std::size_t record = 0;
  double t = 0.0;
  ScalarField u;
};

struct Trajectory {
  bool normalized = true;
  std::vector<Record> records;
  std::vector<Snapshot> snapshots;
  std::vector<double> dts;  // every step taken, in order
  Termination termination = Termination::time_reached;
  std::string message;
  std::size_t steps = 0;

  /// Snapshot logged with the given record index, or nullptr.
  const Snapshot* snapshot_for(std::size_t record) const;
  bool has_all_snapshots() const { return snapshots.size() == records.size(); }
};

struct RunConfig {
  Background background;
  FSpec f;
  ScalarField u0;
  double t_final = 1.0;
  DtPolicy dt;
  Scheme scheme = Scheme::rk4;
  double stop_tol = 1e-8;
  bool renormalize_volume = true;
  bool normalized = true;
  int log_cadence = 1;       // steps between records
  int snapshot_cadence = 0;  // records between snapshots; 0 keeps only first and last
  double blowup_threshold = 1e8;
  double positivity_floor = 1e-10;
  std::size_t max_steps = 100'000'000;
  /// Called after each record is appended; returning true ends the run as time_reached.
  std::function<bool(const Record&)> stop_when;
};

/// Throws Error(config) on invalid settings.
void validate(const RunConfig& config);

Trajectory run(const RunConfig& config);

/// Maps a non-normalized trajectory (snapshots at every record) to the
/// normalized flow: u = exp(-rate eta) v with eta the integral of A, and new
/// time tau the integral of exp(-alpha eta). Throws not_homogeneous.
Trajectory hamilton_rescale(const Background& bg, const Trajectory& traj, const FSpec& f);

/// Stop predicate for a non-normalized run: true once the rescaled time
/// reaches tau_final.
std::function<bool(const Record&)> rescaled_time_stop(const Background& bg, double alpha, double tau_final);

/// DF(u)h for F(u) = f(S) u.
ScalarField frechet_apply(const Background& bg, const ScalarField& u, const ScalarField& h,
                          const FSpec& f);

/// D[(f(S) - A) u] h.
ScalarField frechet_normalized_apply(const Background& bg, const ScalarField& u,
                                     const ScalarField& h, const FSpec& f);

/// Linear interpolation of u between snapshots at time t; t is clamped to the covered range.
ScalarField interpolate_u(const Trajectory& traj, double t);

}  // namespace conflow
