#include "parablow/constructions.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace parablow {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOrderSlack = 1e-10;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double initial_k(double q, const ConstructionConfig& cfg) {
  return cfg.k_initial > 0.0 ? cfg.k_initial : 4.0 * phi_q(q, cfg.stepper.tau0);
}

std::vector<std::size_t> map_nodes(const Grid& from, const std::vector<std::size_t>& nodes, const Grid& to) {
  std::vector<std::size_t> out;
  for (std::size_t node : nodes) {
    const std::int64_t t = to.node_at(from.lattice_index(node));
    if (t >= 0 && to.kind(static_cast<std::size_t>(t)) == NodeKind::interior)
      out.push_back(static_cast<std::size_t>(t));
  }
  return out;
}

struct Ladder {
  std::vector<Field> fields;
  double k_final = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<RunSummary> runs;
};

// Runs evolve from constant data k, k*factor, ... until the relative sup-change over
// the probes and output times drops below the tolerance. Larger k must dominate.
Ladder k_ladder(const ProblemSpec& problem, const GridPtr& grid, const ConstructionConfig& cfg,
                double k_start, double start_time, const std::vector<std::size_t>& probes,
                std::size_t member, const std::string& label) {
  const auto& seq = problem.initial.k_sequence;
  Ladder out;
  for (std::size_t j = 0;; ++j) {
    double k;
    if (!seq.empty()) {
      if (j >= seq.size())
        throw Error(ErrorCode::budget_exceeded, label + ": k sequence exhausted before convergence");
      k = seq[j];
    } else {
      k = k_start * std::pow(cfg.k_factor, static_cast<double>(j));
      if (k > cfg.k_max)
        throw Error(ErrorCode::budget_exceeded, label + ": k exceeded " + num(cfg.k_max));
    }
    const auto t0 = Clock::now();
    const Trajectory tr =
        evolve(Field::constant_interior(grid, k), problem, cfg.stepper, cfg.output_times, start_time);
    std::vector<Field> fields;
    fields.reserve(tr.snapshots.size());
    for (const auto& s : tr.snapshots) fields.push_back(s.u);
    const double wall = seconds_since(t0);

    double change = kNaN;
    if (!out.fields.empty()) {
      change = 0.0;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (ordering_violation(out.fields[i], fields[i]) > kOrderSlack)
          throw Error(ErrorCode::non_monotone_sequence,
                      label + ": k=" + num(k) + " does not dominate its predecessor");
        change = std::max(change, relative_sup_change(fields[i], out.fields[i], probes));
      }
    }
    out.rows.push_back({"k", member, k, change, wall});
    out.runs.push_back(summarize_trajectory(tr, label + " k=" + num(k), k, wall));
    out.fields = std::move(fields);
    out.k_final = k;
    if (!std::isnan(change) && change < cfg.k_tolerance) break;
  }
  return out;
}

ProblemSpec with_domain(const ProblemSpec& p, const DomainSpec& d) {
  ProblemSpec out = p;
  out.domain = d;
  return out;
}

// Shared driver for exhaustion (interior mode) and truncation (n-continuation).
ConstructionResult exhaust(const ProblemSpec& problem, const ExhaustionPlan& plan,
                           const ConstructionConfig& cfg, const std::string& path,
                           const std::string& stage) {
  ConstructionResult res;
  res.path = path;
  res.tolerance = cfg.k_tolerance;
  res.times = cfg.output_times;
  res.discrepancy = kNaN;
  res.grid = build_grid(problem.domain, cfg.h);
  const DomainSpec probe_region =
      plan.mode == ExhaustionMode::truncation ? exhaustion(problem.domain, plan, 0) : problem.domain;
  res.probes = probe_nodes(*res.grid, probe_region, cfg.probe_fraction);

  double k = initial_k(problem.q, cfg);
  std::vector<Field> prev;
  for (std::size_t m = 0; m < plan.count(); ++m) {
    const DomainSpec member = exhaustion(problem.domain, plan, m);
    const GridPtr grid = build_grid(member, cfg.h);
    const auto local_probes = map_nodes(*res.grid, res.probes, *grid);
    const auto t0 = Clock::now();
    const std::string label = stage + "[" + std::to_string(m) + "]=" + num(plan.parameters[m]);
    Ladder ladder = k_ladder(with_domain(problem, member), grid, cfg, k, 0.0, local_probes, m, label);
    k = ladder.k_final;

    std::vector<Field> ext;
    for (const Field& f : ladder.fields) ext.push_back(extend_by_zero(f, res.grid));
    double change = kNaN;
    if (!prev.empty()) {
      change = 0.0;
      for (std::size_t i = 0; i < ext.size(); ++i) {
        if (ordering_violation(prev[i], ext[i]) > kOrderSlack)
          throw Error(ErrorCode::non_monotone_sequence, label + " lies below its predecessor");
        change = std::max(change, relative_sup_change(ext[i], prev[i], res.probes));
      }
    }
    res.table.insert(res.table.end(), ladder.rows.begin(), ladder.rows.end());
    res.table.push_back({stage, m, plan.parameters[m], change, seconds_since(t0)});
    res.runs.insert(res.runs.end(), ladder.runs.begin(), ladder.runs.end());
    prev = std::move(ext);
  }
  res.fields = std::move(prev);
  res.k_final = k;
  return res;
}

}  // namespace

void ConstructionConfig::validate() const {
  stepper.validate();
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "h must be > 0");
  if (output_times.empty()) throw Error(ErrorCode::invalid_argument, "no output times");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!(output_times[i] > 0.0) || (i > 0 && !(output_times[i] > output_times[i - 1])))
      throw Error(ErrorCode::invalid_argument, "output times must be positive and increasing");
  }
  if (!(probe_fraction >= 0.0 && probe_fraction < 0.5))
    throw Error(ErrorCode::invalid_argument, "probe fraction must lie in [0, 0.5)");
  if (!(k_factor > 1.0) || !(k_tolerance > 0.0) || !(k_initial >= 0.0))
    throw Error(ErrorCode::invalid_argument, "k ladder needs factor > 1 and tolerance > 0");
  if (!(start_initial > 0.0) || !(start_tolerance > 0.0) || !(direct_start_time >= 0.0))
    throw Error(ErrorCode::invalid_argument, "invalid start-time schedule");
  if (!(elliptic_tolerance > 0.0)) throw Error(ErrorCode::invalid_argument, "elliptic tolerance must be > 0");
}

RunSummary summarize_trajectory(const Trajectory& tr, std::string label, double k, double wall_time) {
  RunSummary s;
  s.label = std::move(label);
  s.k = k;
  s.start_time = tr.start_time;
  s.steps = tr.steps.size();
  s.newton_iterations = tr.newton_iterations();
  s.zero_lateral = tr.zero_lateral;
  s.energy_tracked = tr.energy_tracked;
  s.energy_increase = tr.max_energy_increase();
  const auto b = check_universal_bound(tr, tr.q);
  s.phi_margin = b.phi_margin;
  s.majorant_margin = kNaN;
  if (b.majorant_available) {
    // every step, not only the snapshots
    s.majorant_margin = b.majorant_margin;
    for (const auto& st : tr.steps) s.majorant_margin = std::max(s.majorant_margin, st.majorant_margin);
  }
  s.derivative_ratio = check_derivative_bound(tr, tr.u0_l2);
  s.wall_time = wall_time;
  return s;
}

const Field& ConstructionResult::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, t)) return fields[i];
  }
  throw Error(ErrorCode::invalid_argument, "no field at t=" + num(t));
}

std::vector<std::size_t> probe_nodes(const Grid& grid, const DomainSpec& region, double fraction) {
  double inradius = 0.0;
  for (std::size_t node : grid.interior())
    inradius = std::max(inradius, region.signed_distance(grid.coordinate(node)));
  const double threshold = fraction * 2.0 * inradius - 1e-9 * grid.h();
  std::vector<std::size_t> out;
  for (std::size_t node : grid.interior()) {
    const double d = region.signed_distance(grid.coordinate(node));
    if (d > 0.0 && d >= threshold) out.push_back(node);
  }
  return out;
}

double relative_sup_change(const Field& a, const Field& b, const std::vector<std::size_t>& probes) {
  double worst = 0.0;
  for (std::size_t node : probes) {
    const double scale = std::abs(a[node]);
    const double d = std::abs(a[node] - b[node]);
    if (d == 0.0) continue;
    worst = std::max(worst, scale > 0.0 ? d / scale : std::numeric_limits<double>::infinity());
  }
  return worst;
}

double ordering_violation(const Field& lower, const Field& upper) {
  if (!same_grid(lower.grid(), upper.grid())) throw Error(ErrorCode::grid_mismatch, "ordering_violation");
  const double scale = std::max(max_norm(upper), std::numeric_limits<double>::min());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t node : upper.grid().interior())
    worst = std::max(worst, (lower[node] - upper[node]) / scale);
  return worst;
}

ConstructionResult construct_minimal(const ProblemSpec& problem, const ExhaustionPlan& plan,
                                     const ConstructionConfig& cfg) {
  problem.validate();
  cfg.validate();
  if (!problem.lateral.is_zero())
    throw Error(ErrorCode::invalid_argument, "the minimal construction needs zero lateral data");
  ExhaustionPlan p = plan;
  if (p.parameters.empty()) p = {ExhaustionMode::interior, {8 * cfg.h, 4 * cfg.h, 2 * cfg.h, cfg.h}};
  if (p.mode != ExhaustionMode::interior)
    throw Error(ErrorCode::invalid_argument, "the minimal construction needs an interior exhaustion plan");
  p.validate();
  return exhaust(problem, p, cfg, "minimal-exhaustion", "m");
}

ConstructionResult construct_maximal(const ProblemSpec& problem, const ConstructionConfig& cfg) {
  problem.validate();
  cfg.validate();
  if (!problem.lateral.is_zero())
    throw Error(ErrorCode::invalid_argument, "the maximal construction needs zero lateral data");
  if (problem.domain.bounded_original()) {
    ConstructionResult res;
    res.path = "maximal-truncation";
    res.tolerance = cfg.k_tolerance;
    res.times = cfg.output_times;
    res.discrepancy = kNaN;
    res.grid = build_grid(problem.domain, cfg.h);
    res.probes = probe_nodes(*res.grid, problem.domain, cfg.probe_fraction);
    Ladder ladder = k_ladder(problem, res.grid, cfg, initial_k(problem.q, cfg), 0.0, res.probes, 0, "maximal");
    res.fields = std::move(ladder.fields);
    res.table = std::move(ladder.rows);
    res.runs = std::move(ladder.runs);
    res.k_final = ladder.k_final;
    return res;
  }
  ExhaustionPlan p = cfg.truncation;
  p.mode = ExhaustionMode::truncation;
  if (p.parameters.empty()) {
    const double r = problem.domain.outer;
    for (double n : {r / 8, r / 4, r / 2, r}) {
      if (n > problem.domain.inner) p.parameters.push_back(n);
    }
  }
  p.validate();
  if (p.parameters.back() > problem.domain.outer)
    throw Error(ErrorCode::invalid_argument, "truncation radius beyond the computational radius");
  return exhaust(problem, p, cfg, "maximal-truncation", "n");
}

ConstructionResult construct_lateral(const ProblemSpec& problem, const ConstructionConfig& cfg) {
  problem.validate();
  cfg.validate();
  ConstructionResult res;
  res.path = "lateral-data";
  res.tolerance = cfg.k_tolerance;
  res.times = cfg.output_times;
  res.grid = build_grid(problem.domain, cfg.h);
  res.probes = probe_nodes(*res.grid, problem.domain, cfg.probe_fraction);

  std::vector<double> starts = problem.initial.start_times;
  const bool automatic = starts.empty();
  if (automatic) starts.push_back(std::min(cfg.start_initial, cfg.output_times.front() / 2));
  if (!(starts.front() < cfg.output_times.front()))
    throw Error(ErrorCode::invalid_argument, "start times must precede the first output time");

  // Schedule A: for each start time s, k -> infinity; then s -> 0.
  double k = initial_k(problem.q, cfg);
  std::vector<Field> prev;
  for (std::size_t j = 0;; ++j) {
    if (j >= starts.size()) {
      if (!automatic || starts.size() >= cfg.start_max_members)
        throw Error(ErrorCode::budget_exceeded, "start-time schedule exhausted before convergence");
      starts.push_back(starts.back() / 2);
    }
    const double s = starts[j];
    const auto t0 = Clock::now();
    Ladder ladder = k_ladder(problem, res.grid, cfg, k, s, res.probes, j, "start=" + num(s));
    k = ladder.k_final;
    double change = kNaN;
    if (!prev.empty()) {
      change = 0.0;
      for (std::size_t i = 0; i < prev.size(); ++i)
        change = std::max(change, relative_sup_change(ladder.fields[i], prev[i], res.probes));
    }
    res.table.insert(res.table.end(), ladder.rows.begin(), ladder.rows.end());
    res.table.push_back({"start", j, s, change, seconds_since(t0)});
    res.runs.insert(res.runs.end(), ladder.runs.begin(), ladder.runs.end());
    prev = std::move(ladder.fields);
    res.start_final = s;
    if (!std::isnan(change) && change < cfg.start_tolerance) break;
  }
  res.fields = std::move(prev);
  res.k_final = k;

  // Schedule B: one k ladder from a small start time.
  Ladder direct = k_ladder(problem, res.grid, cfg, k, cfg.direct_start_time, res.probes, 0,
                           "direct start=" + num(cfg.direct_start_time));
  res.runs.insert(res.runs.end(), direct.runs.begin(), direct.runs.end());
  res.discrepancy = 0.0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    if (res.times[i] < cfg.window_lo - 1e-12 || res.times[i] > cfg.window_hi + 1e-12) continue;
    res.discrepancy = std::max(res.discrepancy, relative_sup_change(res.fields[i], direct.fields[i], res.probes));
  }
  if (cfg.throw_on_disagreement && res.discrepancy > cfg.schedules_tolerance)
    throw Error(ErrorCode::schedules_disagree,
                "schedules differ by " + num(res.discrepancy) + " > " + num(cfg.schedules_tolerance));
  return res;
}

double lateral_barrier_margin(const ProblemSpec& problem, const ConstructionConfig& cfg,
                              const ConstructionResult& lateral) {
  ProblemSpec zero = problem;
  zero.lateral = LateralData::zero();
  const double s = lateral.start_final;
  const Trajectory U = evolve(Field::constant_interior(lateral.grid, lateral.k_final), zero, cfg.stepper,
                              lateral.times, s);
  const Trajectory V = evolve(Field(lateral.grid, 0.0), problem, cfg.stepper, lateral.times, s);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lateral.times.size(); ++i) {
    Field sum = U.snapshots[i].u;
    for (std::size_t node : lateral.grid->interior()) sum[node] += V.snapshots[i].u[node];
    worst = std::max(worst, ordering_violation(lateral.fields[i], sum));
  }
  return worst;
}

double phi_start_deviation(const ProblemSpec& problem, const ConstructionConfig& cfg,
                           const ConstructionResult& reference, double t0) {
  std::vector<double> times;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < reference.times.size(); ++i) {
    if (reference.times[i] > t0) {
      times.push_back(reference.times[i]);
      index.push_back(i);
    }
  }
  if (times.empty()) throw Error(ErrorCode::invalid_argument, "no output time after the start time");
  const Trajectory tr = evolve(Field::constant_interior(reference.grid, phi_q(problem.q, t0)),
                               with_domain(problem, reference.grid->domain()), cfg.stepper, times, t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    worst = std::max(worst, relative_sup_change(reference.fields[index[i]], tr.snapshots[i].u, reference.probes));
  return worst;
}

double coincidence(const ConstructionResult& a, const ConstructionResult& b, double t_lo, double t_hi) {
  if (!same_grid(*a.grid, *b.grid)) throw Error(ErrorCode::grid_mismatch, "coincidence");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (a.times[i] < t_lo - 1e-12 || a.times[i] > t_hi + 1e-12) continue;
    const Field& fb = b.at(a.times[i]);
    for (std::size_t node : a.probes) {
      const double d = std::abs(a.fields[i][node] - fb[node]);
      if (d > 0.0) worst = std::max(worst, d / std::abs(fb[node]));
    }
  }
  return worst;
}

double keller_osserman_constant(double q) {
  return std::pow(2.0 * (q + 1.0) / ((q - 1.0) * (q - 1.0)), 1.0 / (q - 1.0));
}

EllipticResult solve_elliptic_maximal(double R, double q, const GridPtr& grid, const ConstructionConfig& cfg) {
  if (!grid || grid->domain().kind != DomainKind::ball || std::abs(grid->domain().outer - R) > 1e-12 * R)
    throw Error(ErrorCode::invalid_argument, "grid must discretize the ball of radius R");
  if (!(q > 1.0)) throw Error(ErrorCode::invalid_argument, "q must be > 1");
  const Grid& g = *grid;
  const int dim = g.dim();
  const double h = g.h();
  const double alpha = 2.0 / (q - 1.0);
  const double slope = 1.0 / std::sqrt(alpha * (alpha + 1.0));
  const std::size_t n = g.interior_count();
  const std::size_t width = g.stencil_width();
  const auto nodes = g.interior();

  // W = v^{-alpha} turns -Delta W + W^q = 0 into v Delta v - (alpha+1)|grad v|^2 + 1/alpha = 0,
  // with v = k^{-1/alpha} on the boundary. Dirichlet nodes outside the ball carry the
  // linear extension v_b - slope * (|x| - R) of the boundary profile.
  auto radius = [&](std::size_t node) {
    const Point p = g.coordinate(node);
    return std::hypot(p[0], p[1]);
  };
  std::vector<double> ghost(g.node_count(), 0.0);
  for (std::size_t node : g.dirichlet()) ghost[node] = -slope * (radius(node) - R);

  std::vector<std::int64_t> nb(n * width);
  for (std::size_t k = 0; k < n; ++k) {
    const auto ns = g.neighbors(k);
    for (std::size_t s = 0; s < width; ++s) nb[k * width + s] = g.compact_index(ns[s]);
  }
  std::vector<std::size_t> core;
  for (std::size_t k = 0; k < n; ++k) {
    if (R - radius(nodes[k]) >= 4.0 * h - 1e-9 * h) core.push_back(k);
  }
  if (core.empty()) throw Error(ErrorCode::infeasible_resolution, "no node at depth >= 4h");

  auto value = [&](const std::vector<double>& v, double vb, std::size_t k, std::size_t s) {
    const std::int64_t c = nb[k * width + s];
    return c >= 0 ? v[static_cast<std::size_t>(c)] : vb + ghost[g.neighbors(k)[s]];
  };
  const double ih2 = 1.0 / (h * h);
  auto residual = [&](const std::vector<double>& v, double vb, std::vector<double>& F) {
    double s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double lap = 0.0, grad2 = 0.0;
      for (int ax = 0; ax < dim; ++ax) {
        const double lo = value(v, vb, k, 2 * ax), hi = value(v, vb, k, 2 * ax + 1);
        lap += (lo - 2.0 * v[k] + hi) * ih2;
        const double gr = (hi - lo) / (2.0 * h);
        grad2 += gr * gr;
      }
      F[k] = v[k] * lap - (alpha + 1.0) * grad2 + 1.0 / alpha;
      s2 += F[k] * F[k];
    }
    return std::sqrt(s2);
  };

  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> trip;
  auto assemble = [&](const std::vector<double>& v, double vb) {
    trip.clear();
    for (std::size_t k = 0; k < n; ++k) {
      double lap = 0.0;
      const auto row = static_cast<Eigen::Index>(k);
      for (int ax = 0; ax < dim; ++ax) {
        const double lo = value(v, vb, k, 2 * ax), hi = value(v, vb, k, 2 * ax + 1);
        lap += (lo - 2.0 * v[k] + hi) * ih2;
        const double gr = (hi - lo) / (2.0 * h);
        for (int side = 0; side < 2; ++side) {
          const std::int64_t c = nb[k * width + 2 * ax + side];
          if (c < 0) continue;
          const double sign = side == 0 ? -1.0 : 1.0;
          trip.emplace_back(row, static_cast<Eigen::Index>(c), v[k] * ih2 - (alpha + 1.0) * gr * sign / h);
        }
      }
      trip.emplace_back(row, row, lap - 2.0 * dim * v[k] * ih2);
    }
    J.setFromTriplets(trip.begin(), trip.end());
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  EllipticResult out;
  std::vector<double> F(n), trial(n), Ft(n);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));

  auto newton = [&](std::vector<double>& v, double vb) {
    double fnorm = residual(v, vb, F);
    for (int it = 0; it < 100; ++it) {
      double fmax = 0.0, vmax = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        fmax = std::max(fmax, std::abs(F[k]));
        vmax = std::max(vmax, v[k]);
      }
      const double tol = cfg.stepper.newton_atol + cfg.stepper.newton_rtol * vmax * 2.0 * dim * ih2;
      if (fmax <= tol) return fmax;
      assemble(v, vb);
      if (!analyzed) {
        lu.analyzePattern(J);
        analyzed = true;
      }
      lu.factorize(J);
      if (lu.info() != Eigen::Success) throw Error(ErrorCode::newton_divergence, "singular elliptic Jacobian");
      for (std::size_t k = 0; k < n; ++k) rhs[static_cast<Eigen::Index>(k)] = F[k];
      const Eigen::VectorXd d = lu.solve(rhs);
      ++out.newton_iterations;
      double lambda = 1.0;
      bool ok = false;
      for (int ls = 0; ls < 60 && !ok; ++ls, lambda *= 0.5) {
        bool positive = true;
        for (std::size_t k = 0; k < n; ++k) {
          trial[k] = v[k] - lambda * d[static_cast<Eigen::Index>(k)];
          positive = positive && trial[k] > 0.0;
        }
        if (!positive) continue;
        const double tn = residual(trial, vb, Ft);
        if (tn < fnorm) {
          v.swap(trial);
          F.swap(Ft);
          fnorm = tn;
          ok = true;
        }
      }
      if (!ok) {
        if (fmax <= 1e3 * tol) return fmax;
        throw Error(ErrorCode::newton_divergence, "elliptic line search stalled at residual " + num(fmax));
      }
    }
    throw Error(ErrorCode::newton_divergence, "elliptic Newton did not converge");
  };

  double k = cfg.elliptic_k_initial > 0.0 ? cfg.elliptic_k_initial
                                          : std::pow(0.01 * slope * 4.0 * h, -alpha);
  std::vector<double> v(n);
  double vb = std::pow(k, -1.0 / alpha);
  for (std::size_t i = 0; i < n; ++i) v[i] = vb + slope * (R - radius(nodes[i]));
  std::vector<double> prev_core;
  for (std::size_t j = 0;; ++j) {
    if (k > cfg.elliptic_k_max)
      throw Error(ErrorCode::no_convergence_in_k, "core values still move at k=" + num(k));
    const auto t0 = Clock::now();
    const double vb_new = std::pow(k, -1.0 / alpha);
    for (double& x : v) x += vb_new - vb;
    vb = vb_new;
    out.v_residual = newton(v, vb);
    std::vector<double> core_w;
    for (std::size_t c : core) core_w.push_back(std::pow(v[c], -alpha));
    double change = kNaN;
    if (!prev_core.empty()) {
      change = 0.0;
      for (std::size_t i = 0; i < core_w.size(); ++i)
        change = std::max(change, std::abs(core_w[i] - prev_core[i]) / core_w[i]);
    }
    out.table.push_back({"k", 0, k, change, seconds_since(t0)});
    prev_core = std::move(core_w);
    out.k_final = k;
    if (!std::isnan(change) && change < cfg.elliptic_tolerance) break;
    k *= 2.0;
  }

  out.W = Field(grid, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.W[nodes[i]] = std::pow(v[i], -alpha);
  for (std::size_t node : g.dirichlet()) out.W[node] = k;
  return out;
}

AsymptoteFit fit_boundary_asymptote(const Field& W, double R, double q) {
  if (!(q > 1.0)) throw Error(ErrorCode::invalid_argument, "q must be > 1");
  const Grid& g = W.grid();
  const double h = g.h();
  AsymptoteFit fit;
  for (double d = 8.0 * h; d <= R / 4.0 + 1e-12 * R; d *= 2.0) {
    const auto i = static_cast<std::int64_t>(std::llround((R - d) / h));
    const std::int64_t node = g.node_at({i, 0});
    if (node < 0 || g.kind(static_cast<std::size_t>(node)) != NodeKind::interior) continue;
    const double depth = R - static_cast<double>(i) * h;
    const double w = W[static_cast<std::size_t>(node)];
    if (!(depth > 0.0) || !(w > 0.0)) continue;
    fit.depths.push_back(depth);
    fit.values.push_back(w);
  }
  if (fit.depths.size() < 4)
    throw Error(ErrorCode::insufficient_samples,
                std::to_string(fit.depths.size()) + " dyadic samples in [8h, R/4], need 4");
  double mx = 0.0, my = 0.0;
  const double m = static_cast<double>(fit.depths.size());
  for (std::size_t i = 0; i < fit.depths.size(); ++i) {
    mx += std::log(fit.depths[i]) / m;
    my += std::log(fit.values[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < fit.depths.size(); ++i) {
    const double dx = std::log(fit.depths[i]) - mx;
    sxy += dx * (std::log(fit.values[i]) - my);
    sxx += dx * dx;
  }
  fit.exponent = sxy / sxx;
  fit.constant = std::exp(my - fit.exponent * mx);
  return fit;
}

InitialAsymptote fit_initial_asymptote(const ConstructionResult& result, double q,
                                       const std::vector<std::size_t>& probes, double tau0) {
  if (result.times.empty()) throw Error(ErrorCode::invalid_argument, "empty result");
  if (result.times.front() < 10.0 * tau0)
    throw Error(ErrorCode::unresolved_layer,
                "smallest time " + num(result.times.front()) + " below 10 tau0 = " + num(10 * tau0));
  if (probes.empty()) throw Error(ErrorCode::invalid_argument, "empty probe set");
  const double c = c_q(q);
  InitialAsymptote out;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const double t = result.times[i];
    const double scale = std::pow(t, 1.0 / (q - 1.0));
    double worst = 0.0;
    for (std::size_t node : probes)
      worst = std::max(worst, std::abs(scale * result.fields[i][node] - c) / c);
    out.times.push_back(t);
    out.deviations.push_back(worst);
  }
  out.time = out.times.front();
  out.deviation = out.deviations.front();
  return out;
}

double check_scaling_invariance(const ProblemSpec& problem, double lambda, double h1, double h2,
                                const ConstructionConfig& cfg, bool scale_steps) {
  problem.validate();
  cfg.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::invalid_argument, "lambda must be > 0");
  if (std::abs(lambda * h2 - h1) > 1e-12 * h1)
    throw Error(ErrorCode::grid_incommensurate, "lambda * h2 must equal h1");
  if (!problem.lateral.is_zero()) throw Error(ErrorCode::invalid_argument, "scaling needs zero lateral data");
  const DomainSpec& d = problem.domain;
  DomainSpec small;
  switch (d.kind) {
    case DomainKind::interval: small = DomainSpec::interval(d.a / lambda, d.b / lambda); break;
    case DomainKind::ball: small = DomainSpec::ball(d.outer / lambda, d.dim); break;
    default: throw Error(ErrorCode::unsupported_domain, "scaling needs an interval or a centred ball");
  }
  const double alpha = 2.0 / (problem.q - 1.0);
  const double amp = std::pow(lambda, alpha);
  const double l2 = lambda * lambda;

  ConstructionConfig big_cfg = cfg;
  big_cfg.h = h1;
  ConstructionConfig small_cfg = cfg;
  small_cfg.h = h2;
  if (scale_steps) {
    small_cfg.stepper.tau0 /= l2;
    small_cfg.stepper.tau_max /= l2;
  }
  for (double& t : small_cfg.output_times) t /= l2;
  if (small_cfg.k_initial > 0.0 && scale_steps) small_cfg.k_initial *= amp;

  ProblemSpec small_problem = with_domain(problem, small);
  for (double& k : small_problem.initial.k_sequence) k *= amp;

  std::vector<Field> big, little;
  std::vector<std::size_t> probes;
  if (problem.initial.mode == InitialData::Mode::constant) {
    const GridPtr g1 = build_grid(d, h1), g2 = build_grid(small, h2);
    const Trajectory a = evolve(Field::constant_interior(g1, problem.initial.k), problem, big_cfg.stepper,
                                big_cfg.output_times);
    const Trajectory b = evolve(Field::constant_interior(g2, amp * problem.initial.k), small_problem,
                                small_cfg.stepper, small_cfg.output_times);
    for (const auto& s : a.snapshots) big.push_back(s.u);
    for (const auto& s : b.snapshots) little.push_back(s.u);
    probes = probe_nodes(*g1, d, cfg.probe_fraction);
  } else {
    const ConstructionResult a = construct_maximal(problem, big_cfg);
    const ConstructionResult b = construct_maximal(small_problem, small_cfg);
    big = a.fields;
    little = b.fields;
    probes = a.probes;
  }
  const Grid& g1 = big.front().grid();
  const Grid& g2 = little.front().grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    for (std::size_t node : probes) {
      const std::int64_t m = g2.node_at(g1.lattice_index(node));
      if (m < 0 || g2.kind(static_cast<std::size_t>(m)) != NodeKind::interior)
        throw Error(ErrorCode::grid_incommensurate, "probe has no image on the scaled grid");
      const double expected = amp * big[i][node];
      const double got = little[i][static_cast<std::size_t>(m)];
      if (expected != got) worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
  }
  return worst;
}

}  // namespace parablow
