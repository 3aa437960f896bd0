#pragma once

#include <string>
#include <vector>

#include "parablow/semigroup.hpp"

namespace parablow {

struct ConstructionConfig {
  StepperConfig stepper;
  double h = 1.0 / 256.0;
  std::vector<double> output_times{0.01, 0.1, 0.2, 0.5, 1.0};
  double probe_fraction = 0.25;

  // k -> infinity by repeated multiplication
  double k_initial = 0.0;  // 0: 4 phi_q(tau0)
  double k_factor = 2.0;
  double k_max = 1e15;
  double k_tolerance = 1e-4;

  // Exhaustion / truncation plan; empty parameters select the defaults
  // {8h, 4h, 2h, h} (interior) or {R_inf/8, R_inf/4, R_inf/2, R_inf} (truncation).
  ExhaustionPlan exhaustion;
  ExhaustionPlan truncation{ExhaustionMode::truncation, {}};

  // Lateral data: schedule A start times (empty: 0.02 halved until converged),
  // schedule B start time, and the comparison window.
  double start_initial = 0.02;
  double start_tolerance = 1e-3;
  std::size_t start_max_members = 24;
  double direct_start_time = 0.0;
  double window_lo = 0.1;
  double window_hi = 1.0;
  double schedules_tolerance = 0.02;
  bool throw_on_disagreement = true;

  // Keller-Osserman ladder
  double elliptic_k_initial = 0.0;  // 0: automatic from h and q
  double elliptic_tolerance = 1e-5;
  double elliptic_k_max = 1e30;

  void validate() const;
};

struct ConvergenceRow {
  std::string stage;  // "k", "m", "n", "start"
  std::size_t member = 0;
  double parameter = 0.0;
  double sup_change = 0.0;  // relative, NaN for the first entry of a ladder
  double wall_time = 0.0;
};

struct RunSummary {
  std::string label;
  double k = 0.0;
  double start_time = 0.0;
  std::size_t steps = 0;
  int newton_iterations = 0;
  bool zero_lateral = true;
  bool energy_tracked = true;
  double energy_increase = 0.0;
  double phi_margin = 0.0;
  double majorant_margin = 0.0;
  double derivative_ratio = 0.0;
  double wall_time = 0.0;
};

/// Energy, bound and derivative diagnostics of one trajectory. The majorant margin is
/// the largest over all steps.
RunSummary summarize_trajectory(const Trajectory& tr, std::string label, double k, double wall_time);

struct ConstructionResult {
  std::string path;  // minimal-exhaustion | maximal-truncation | lateral-data
  GridPtr grid;
  std::vector<double> times;
  std::vector<Field> fields;
  std::vector<std::size_t> probes;  // node ids of `grid`
  std::vector<ConvergenceRow> table;
  std::vector<RunSummary> runs;
  double tolerance = 0.0;
  double k_final = 0.0;
  double start_final = 0.0;
  double discrepancy = 0.0;  // lateral schedules A/B; NaN on other paths

  const Field& at(double t) const;
};

/// Interior nodes of `grid` at distance >= fraction * scale from the boundary of
/// `region`, where scale is the diameter (the hole radius for exterior domains).
std::vector<std::size_t> probe_nodes(const Grid& grid, const DomainSpec& region, double fraction);

/// max over probes of |a - b| / |a| (a is the newer iterate).
double relative_sup_change(const Field& a, const Field& b, const std::vector<std::size_t>& probes);

/// max over interior nodes of (lower - upper) / max(||upper||_inf, tiny); both fields
/// on the same grid.
double ordering_violation(const Field& lower, const Field& upper);

ConstructionResult construct_minimal(const ProblemSpec& problem, const ExhaustionPlan& plan,
                                     const ConstructionConfig& cfg);
ConstructionResult construct_maximal(const ProblemSpec& problem, const ConstructionConfig& cfg);
ConstructionResult construct_lateral(const ProblemSpec& problem, const ConstructionConfig& cfg);

/// Largest relative excess of the lateral solution over U + V, where U is the
/// zero-data solution from the same start time and k and V starts from 0 with data f.
double lateral_barrier_margin(const ProblemSpec& problem, const ConstructionConfig& cfg,
                              const ConstructionResult& lateral);

/// Relative sup-deviation on probes between a k-ladder result and the run started
/// at t0 from the constant phi_q(t0).
double phi_start_deviation(const ProblemSpec& problem, const ConstructionConfig& cfg,
                           const ConstructionResult& reference, double t0);

/// max over probes and window times of |a - b| / b.
double coincidence(const ConstructionResult& a, const ConstructionResult& b, double t_lo, double t_hi);

struct EllipticResult {
  Field W;  // interior: W = v^{-2/(q-1)}; Dirichlet nodes: the last boundary value k
  double k_final = 0.0;
  std::vector<ConvergenceRow> table;
  double v_residual = 0.0;  // max |v Delta_h v - (alpha+1)|grad_h v|^2 + 1/alpha|
  int newton_iterations = 0;
};

/// Keller-Osserman maximal solution of -Delta W + W^q = 0 in B_R, W = infinity on the
/// boundary, as the limit of boundary data k -> infinity. The grid must discretize ball(R).
EllipticResult solve_elliptic_maximal(double R, double q, const GridPtr& grid,
                                      const ConstructionConfig& cfg);

/// C_q with C_q^{q-1} = 2(q+1)/(q-1)^2.
double keller_osserman_constant(double q);

struct AsymptoteFit {
  double exponent = 0.0;
  double constant = 0.0;
  std::vector<double> depths;
  std::vector<double> values;
};

/// Least-squares fit of log W against log(R - |x|) on dyadic depths 8h 2^j <= R/4
/// along the positive x axis.
AsymptoteFit fit_boundary_asymptote(const Field& W, double R, double q);

struct InitialAsymptote {
  double deviation = 0.0;  // at the smallest time
  double time = 0.0;
  std::vector<double> times;
  std::vector<double> deviations;
};

/// |t^{1/(q-1)} u(x,t) - c_q| / c_q over probes at each output time.
InitialAsymptote fit_initial_asymptote(const ConstructionResult& result, double q,
                                       const std::vector<std::size_t>& probes, double tau0);

}  // namespace parablow
