#pragma once

// Measurable checks over trajectories. Each checker returns a report with
// the measured and predicted quantities, the tolerances it applied and the
// record range it looked at. Checkers never throw on a violated bound; they
// return fail. A check whose hypotheses do not hold on the given data is
// reported as inconclusive.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "conflow/conformal.hpp"
#include "conflow/flow.hpp"
#include "conflow/fzoo.hpp"

namespace conflow {

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict v) noexcept;

struct TheoremReport {
  using Entries = std::vector<std::pair<std::string, double>>;

  std::string id;
  Verdict verdict = Verdict::inconclusive;
  Entries measured;
  Entries predicted;
  Entries tolerances;
  std::vector<std::string> notes;
  std::size_t first_record = 0;
  std::size_t last_record = 0;
  double t_begin = 0.0;
  double t_end = 0.0;

  bool passed() const noexcept { return verdict == Verdict::pass; }
  bool failed() const noexcept { return verdict == Verdict::fail; }
  /// Value of a measured entry; NaN if absent.
  double value(const std::string& key) const;
};

struct DecayFit {
  double c_fit = 0.0;
  double b_fit = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double residual = 0.0;  // RMS of the log-residuals
  std::size_t samples = 0;
};

/// Least squares of log sup|f(S) - A| against t, skipping the first
/// `skip_fraction` of the run.
DecayFit fit_decay(const Trajectory& traj, double skip_fraction = 0.1);

struct DecayPrediction {
  double b = 0.0;      // -c * S_max(0) with -c the max of f' on the initial S range
  double c = 0.0;      // max |f'| on the initial S range times its width
  double width = 0.0;  // S_max(0) - S_min(0)
  double fp_max = 0.0;
  double fp_min_abs = 0.0;
};

DecayPrediction predict_decay(double s_min0, double s_max0, const FSpec& f);

TheoremReport compare_decay(const DecayFit& fit, const Trajectory& traj, const Background& bg,
                            const FSpec& f);

/// eta is the additive slack for every inequality.
TheoremReport check_minmax_principle(const Trajectory& traj, const Background& bg, const FSpec& f,
                                     double eta = 1e-6);

TheoremReport check_u_bounds(const Trajectory& traj, const Background& bg, const FSpec& f);

/// Needs snapshots at consecutive records. Relative defect per quantity is
/// max |D - R| / max scale over all interior snapshots, where D is the
/// three-point time derivative and scale the sum of |terms| of R.
TheoremReport check_evolution_identities(const Trajectory& traj, const Background& bg,
                                         const FSpec& f, const std::vector<double>& p_list,
                                         double tol = 1e-3);

TheoremReport check_Lnhalf_monotone(const Trajectory& traj, const Background& bg);

TheoremReport check_positive_S_bounds(const Trajectory& traj, const Background& bg, const FSpec& f);

TheoremReport check_flat_identity(const Trajectory& traj, const Background& bg);

/// Runs the normalized flow to tau_final and the non-normalized flow until its
/// rescaled time passes tau_final, then compares u on the normalized times.
TheoremReport check_rescale_equivalence(const RunConfig& config, double tau_final,
                                        double tol = 1e-4);

TheoremReport check_stationary_limit(const Trajectory& traj, const Background& bg, const FSpec& f);

}  // namespace conflow
