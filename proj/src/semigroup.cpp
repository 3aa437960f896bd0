#include "parablow/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace parablow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double potential(double u, double q) {
  return std::abs(u) * std::abs(power_nonlinearity(u, q)) / (q + 1.0);
}

std::string time_tag(double t) {
  std::ostringstream os;
  os.precision(10);
  os << " at t=" << t;
  return os.str();
}

}  // namespace

double Trajectory::max_energy_increase() const {
  double worst = -std::numeric_limits<double>::infinity();
  if (!energy_tracked) return worst;
  double prev = initial_energy;
  for (const auto& s : steps) {
    const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
    worst = std::max(worst, (s.energy - prev) / scale);
    prev = s.energy;
  }
  return worst;
}

const Snapshot& Trajectory::at(double t) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
  }
  throw Error(ErrorCode::invalid_argument, "no snapshot" + time_tag(t));
}

int Trajectory::newton_iterations() const {
  int n = 0;
  for (const auto& s : steps) n += s.newton_iterations;
  return n;
}

double energy(const Field& u, double q) {
  const Grid& g = u.grid();
  const double h = g.h();
  const double vol = g.cell_volume();
  const double edge = g.dim() == 1 ? 1.0 / h : 1.0;  // h^{d-2}
  double grad = 0.0, pot = 0.0;
  const auto nodes = g.interior();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t node = nodes[k];
    pot += potential(u[node], q);
    for (std::size_t nb : g.neighbors(k)) {
      // Interior pairs are visited from both ends; keep the one from the smaller id.
      if (g.kind(nb) == NodeKind::interior && nb < node) continue;
      const double d = u[node] - u[nb];
      grad += d * d;
    }
  }
  for (std::size_t node : g.dirichlet()) pot += 0.5 * potential(u[node], q);
  return 0.5 * edge * grad + vol * pot;
}

Trajectory evolve(const Field& u0, const ProblemSpec& problem, const StepperConfig& cfg,
                  std::span<const double> output_times, double start_time,
                  const StepObserver& observer) {
  problem.validate();
  cfg.validate();
  const GridPtr grid = u0.grid_ptr();
  if (!(grid->domain() == problem.domain))
    throw Error(ErrorCode::grid_mismatch, "initial field does not live on the problem domain");
  if (output_times.empty()) throw Error(ErrorCode::invalid_argument, "no output times");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!(output_times[i] > (i == 0 ? start_time : output_times[i - 1])))
      throw Error(ErrorCode::invalid_argument, "output times must increase and exceed the start time");
  }
  const double q = problem.q;
  const auto& f = problem.lateral;
  const bool steady = f.time_independent();

  Trajectory traj;
  traj.q = q;
  traj.start_time = start_time;
  traj.energy_tracked = steady;
  traj.zero_lateral = f.is_zero();

  StencilOperator op(grid, lateral_field(grid, f, start_time));
  Field u = assemble_field(op, interior_values(u0));
  for (std::size_t node : grid->interior()) {
    if (!(u[node] >= 0.0) || !std::isfinite(u[node]))
      throw Error(ErrorCode::negative_input, "initial data must be finite and nonnegative");
  }
  traj.u0_l2 = l2_norm(u);
  traj.u0_max = max_norm(u);
  traj.initial_energy = steady ? energy(u, q) : kNaN;

  double psi = traj.zero_lateral ? traj.u0_max : kNaN;
  double t = start_time;
  std::size_t next = 0;
  std::size_t j = 0;
  while (next < output_times.size()) {
    const double target = output_times[next];
    double tau = cfg.tau(j);
    if (t + tau >= target || target - (t + tau) < 0.1 * tau) tau = target - t;
    const bool hits = t + tau == target;
    const double t_new = hits ? target : t + tau;

    if (!steady) op = StencilOperator(grid, lateral_field(grid, f, t_new));
    NewtonStats ns;
    Field next_u;
    try {
      next_u = implicit_step(u, tau, q, op, cfg, &ns);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + time_tag(t_new));
    }

    StepRecord rec;
    rec.index = j;
    rec.t = t_new;
    rec.tau = tau;
    rec.energy = steady ? energy(next_u, q) : kNaN;
    rec.l2 = l2_norm(next_u);
    rec.max = max_norm(next_u);
    double d2 = 0.0;
    for (std::size_t node : grid->interior()) {
      const double d = (next_u[node] - u[node]) / tau;
      d2 += d * d;
    }
    rec.dtnorm = std::sqrt(d2 * grid->cell_volume());
    const double phi = phi_q(q, t_new);
    rec.bound_margin = (rec.max - phi) / phi;
    if (traj.zero_lateral) psi = scalar_resolvent(psi, tau, q);
    rec.majorant = psi;
    rec.majorant_margin = psi > 0.0 ? (rec.max - psi) / psi : (rec.max > 0.0 ? 1.0 : -1.0);
    rec.newton_iterations = ns.iterations;
    traj.steps.push_back(rec);

    u = std::move(next_u);
    t = t_new;
    ++j;
    if (observer) observer(rec, u);
    if (hits) {
      traj.snapshots.push_back({t, u, psi});
      ++next;
    }
  }
  return traj;
}

BoundReport check_universal_bound(const Trajectory& traj, double q) {
  BoundReport r;
  r.majorant_available = traj.zero_lateral;
  bool first = true;
  for (const auto& s : traj.snapshots) {
    const double m = max_norm(s.u);
    const double phi = phi_q(q, s.t);
    const double margin = (m - phi) / phi;
    if (first || margin > r.phi_margin) {
      r.phi_margin = margin;
      r.phi_margin_time = s.t;
    }
    if (r.majorant_available) {
      const double mm = s.majorant > 0.0 ? (m - s.majorant) / s.majorant : (m > 0.0 ? 1.0 : -1.0);
      r.majorant_margin = first ? mm : std::max(r.majorant_margin, mm);
    }
    first = false;
  }
  return r;
}

double check_derivative_bound(const Trajectory& traj, double u0_norm) {
  if (u0_norm == 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& s : traj.steps) {
    worst = std::max(worst, s.dtnorm * (s.t - traj.start_time) * std::sqrt(2.0) / u0_norm);
  }
  return worst;
}

double derivative_ratio_oracle(double q, double k, double t) {
  if (k == 0.0) return 0.0;
  const double v = ode_solution(q, k, t);
  return power_nonlinearity(v, q) * t * std::sqrt(2.0) / k;
}

}  // namespace parablow
