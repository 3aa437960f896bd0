#pragma once

#include <functional>
#include <span>
#include <vector>

#include "parablow/operators.hpp"
#include "parablow/problem.hpp"

namespace parablow {

struct StepRecord {
  std::size_t index = 0;
  double t = 0.0;
  double tau = 0.0;
  double energy = 0.0;           // NaN when the boundary data move in time
  double l2 = 0.0;
  double max = 0.0;
  double dtnorm = 0.0;           // ||(u^{n+1} - u^n) / tau||_{L2}
  double bound_margin = 0.0;     // (max u - phi_q(t)) / phi_q(t)
  double majorant = 0.0;         // scalar implicit Euler iterate psi^n (NaN if f != 0)
  double majorant_margin = 0.0;  // (max u - psi^n) / psi^n
  int newton_iterations = 0;
};

struct Snapshot {
  double t = 0.0;
  Field u;
  double majorant = 0.0;
};

struct Trajectory {
  double q = 2.0;
  double start_time = 0.0;
  double u0_l2 = 0.0;
  double u0_max = 0.0;
  double initial_energy = 0.0;
  bool energy_tracked = true;
  bool zero_lateral = true;
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;

  /// Largest relative increase (J_{n+1} - J_n) / max(|J_n|, tiny) over all steps, or
  /// -infinity when there is nothing to compare.
  double max_energy_increase() const;
  /// Snapshot at output time t (exact match within 1e-12 relative).
  const Snapshot& at(double t) const;
  int newton_iterations() const;
};

/// Discrete energy: sum over stencil edges of (1/2) h^{d-2} (u_i - u_j)^2 plus the
/// trapezoidal sum of h^d |u|^{q+1}/(q+1) (weight 1/2 on Dirichlet nodes).
double energy(const Field& u, double q);

using StepObserver = std::function<void(const StepRecord&, const Field&)>;

/// Implicit Euler chain from u0 at start_time. Steps are clipped so that every
/// requested output time is hit exactly.
Trajectory evolve(const Field& u0, const ProblemSpec& problem, const StepperConfig& cfg,
                  std::span<const double> output_times, double start_time = 0.0,
                  const StepObserver& observer = {});

struct BoundReport {
  double phi_margin = -1.0;       // max over snapshots of (max u - phi_q(t)) / phi_q(t)
  double phi_margin_time = 0.0;
  double majorant_margin = -1.0;  // max over snapshots of (max u - psi) / psi
  bool majorant_available = true;
};

BoundReport check_universal_bound(const Trajectory& traj, double q);

/// max over steps of ||(u^{n+1}-u^n)/tau|| (t_{n+1} - t_0) sqrt(2) / ||u0||; 0 for u0 = 0.
double check_derivative_bound(const Trajectory& traj, double u0_norm);

/// The same ratio evaluated on v(t) = ((q-1)t + k^{1-q})^{-1/(q-1)}: v(t)^q t sqrt(2) / k.
double derivative_ratio_oracle(double q, double k, double t);

struct ConstructionConfig;

/// Solves on the domain with spacing h1 and on its image under x -> x / lambda with
/// spacing h2, and returns the largest relative deviation between
/// lambda^{2/(q-1)} u(lambda x, lambda^2 t) and the second solution over the probe set.
/// Throws grid-incommensurate unless lambda * h2 == h1. With scale_steps the second
/// run uses the steps tau / lambda^2 and the two runs are discrete images of each
/// other; otherwise both runs share cfg's time-step schedule.
double check_scaling_invariance(const ProblemSpec& problem, double lambda, double h1, double h2,
                                const ConstructionConfig& cfg, bool scale_steps = false);

}  // namespace parablow
