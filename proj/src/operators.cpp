#include "parablow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace parablow {

void StepperConfig::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(tau0) || !pos(tau_max)) throw Error(ErrorCode::invalid_argument, "time steps must be > 0");
  if (schedule == ScheduleKind::geometric && !(pos(rho) && rho >= 1.0))
    throw Error(ErrorCode::invalid_argument, "geometric ratio must be >= 1");
  if (!pos(newton_atol) || !pos(newton_rtol) || !pos(linear_tol))
    throw Error(ErrorCode::invalid_argument, "tolerances must be > 0");
  if (!(damping > 0.0 && damping <= 1.0))
    throw Error(ErrorCode::invalid_argument, "damping must lie in (0, 1]");
  if (newton_max_iter < 1 || linear_max_iter < 1)
    throw Error(ErrorCode::invalid_argument, "iteration caps must be >= 1");
}

double StepperConfig::tau(std::size_t j) const {
  if (schedule == ScheduleKind::fixed) return tau0;
  return std::min(tau_max, tau0 * std::pow(rho, static_cast<double>(j)));
}

StepperConfig StepperConfig::refined() const {
  StepperConfig r = *this;
  r.tau0 = tau0 / 2.0;
  r.tau_max = tau_max / 2.0;
  if (schedule == ScheduleKind::geometric) r.rho = std::sqrt(rho);
  return r;
}

StencilOperator::StencilOperator(GridPtr grid) : StencilOperator(grid, Field(grid, 0.0)) {}

StencilOperator::StencilOperator(GridPtr grid, const Field& boundary)
    : grid_(std::move(grid)), boundary_(grid_, 0.0) {
  if (!same_grid(*grid_, boundary.grid()))
    throw Error(ErrorCode::grid_mismatch, "boundary field lives on another grid");
  for (std::size_t node : grid_->dirichlet()) boundary_[node] = boundary[node];
  build();
}

void StencilOperator::build() {
  const double h = grid_->h();
  off_ = 1.0 / (h * h);
  width_ = grid_->stencil_width();
  center_ = static_cast<double>(width_) * off_;
  const std::size_t n = grid_->interior_count();
  nbr_.assign(n * width_, -1);
  load_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto nb = grid_->neighbors(k);
    for (std::size_t s = 0; s < width_; ++s) {
      const std::int64_t c = grid_->compact_index(nb[s]);
      nbr_[k * width_ + s] = c;
      if (c < 0) load_[k] += off_ * boundary_[nb[s]];
    }
  }
}

void StencilOperator::apply_negative_laplacian(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    const std::int64_t* nb = nbr_.data() + k * width_;
    for (std::size_t j = 0; j < width_; ++j) {
      if (nb[j] >= 0) s += x[static_cast<std::size_t>(nb[j])];
    }
    y[k] = center_ * x[k] - off_ * s;
  }
}

std::vector<double> interior_values(const Field& u) {
  std::vector<double> x;
  x.reserve(u.grid().interior_count());
  for (std::size_t node : u.grid().interior()) x.push_back(u[node]);
  return x;
}

Field assemble_field(const StencilOperator& op, std::span<const double> interior) {
  Field u = op.boundary();
  const auto nodes = op.grid().interior();
  for (std::size_t k = 0; k < nodes.size(); ++k) u[nodes[k]] = interior[k];
  return u;
}

Field apply_laplacian(const StencilOperator& op, const Field& u) {
  if (!same_grid(op.grid(), u.grid())) throw Error(ErrorCode::grid_mismatch, "apply_laplacian");
  const auto x = interior_values(u);
  std::vector<double> y(x.size());
  op.apply_negative_laplacian(x, y);
  const auto load = op.boundary_load();
  Field out(op.grid_ptr(), 0.0);
  const auto nodes = op.grid().interior();
  for (std::size_t k = 0; k < nodes.size(); ++k) out[nodes[k]] = load[k] - y[k];
  return out;
}

double power_nonlinearity(double u, double q) {
  const double a = std::abs(u);
  if (q == 2.0) return u * a;
  if (q == 3.0) return u * u * u;
  return a == 0.0 ? 0.0 : std::copysign(std::exp(q * std::log(a)), u);
}

double power_derivative(double u, double q) {
  const double a = std::abs(u);
  if (q == 2.0) return 2.0 * a;
  if (q == 3.0) return 3.0 * u * u;
  return a == 0.0 ? 0.0 : q * std::exp((q - 1.0) * std::log(a));
}

double scalar_resolvent(double b, double tau, double q) {
  if (b == 0.0) return 0.0;
  if (b < 0.0) return -scalar_resolvent(-b, tau, q);
  if (tau == 0.0) return b;
  // Newton from above on a convex increasing function decreases monotonically to the root.
  double y = std::min(b, std::pow(b / tau, 1.0 / q));
  for (int it = 0; it < 200; ++it) {
    const double f = y + tau * power_nonlinearity(y, q) - b;
    const double next = y - f / (1.0 + tau * power_derivative(y, q));
    if (!(next < y) || next <= 0.0) {
      if (next <= 0.0) y = std::max(0.0, next);
      break;
    }
    y = next;
  }
  return y;
}

std::vector<double> solve_linear(const MatrixAction& action, std::span<const double> rhs,
                                 std::span<const double> diagonal, double tol, int max_iter,
                                 LinearStats* stats) {
  const std::size_t n = rhs.size();
  std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), z(n), p(n), ap(n);
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  auto precondition = [&]() {
    if (diagonal.empty()) {
      z = r;
    } else {
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diagonal[i];
    }
  };
  const double bnorm = std::sqrt(dot(r, r));
  if (stats) *stats = LinearStats{};
  if (bnorm == 0.0) return x;
  precondition();
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    action(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw Error(ErrorCode::no_convergence, "operator is not positive definite");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rel = std::sqrt(dot(r, r)) / bnorm;
    if (stats) {
      stats->iterations = it;
      stats->relative_residual = rel;
    }
    if (rel <= tol) return x;
    precondition();
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(ErrorCode::no_convergence,
              "conjugate gradients did not reach " + std::to_string(tol) + " in " +
                  std::to_string(max_iter) + " iterations");
}

Field solve_linear(const MatrixAction& action, const Field& rhs, const StepperConfig& cfg,
                   LinearStats* stats) {
  const auto b = interior_values(rhs);
  const auto x = solve_linear(action, b, {}, cfg.linear_tol, cfg.linear_max_iter, stats);
  Field out(rhs.grid_ptr(), 0.0);
  const auto nodes = rhs.grid().interior();
  for (std::size_t k = 0; k < nodes.size(); ++k) out[nodes[k]] = x[k];
  return out;
}

MatrixAction newton_matrix(const StencilOperator& op, double tau, double q, const Field& u) {
  std::vector<double> gp;
  gp.reserve(op.size());
  for (std::size_t node : u.grid().interior()) gp.push_back(power_derivative(u[node], q));
  return [&op, tau, gp = std::move(gp)](std::span<const double> x, std::span<double> y) {
    op.apply_negative_laplacian(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + tau * (y[i] + gp[i] * x[i]);
  };
}

namespace {

// Solves mass*x + tau*(A x - load + g(x)) = mass*xprev by damped Newton with a
// residual-decreasing backtracking line search.
std::vector<double> newton_solve(const StencilOperator& op, double q, double mass, double tau,
                                 std::span<const double> xprev, std::vector<double> x,
                                 const StepperConfig& cfg, NewtonStats* stats) {
  const std::size_t n = op.size();
  const auto load = op.boundary_load();
  const bool tridiagonal = cfg.backend == LinearBackend::automatic && op.grid().dim() == 1 &&
                           !op.grid().periodic();
  std::vector<double> ax(n), f(n), d(n), gp(n), trial(n), ftrial(n);

  auto residual = [&](const std::vector<double>& y, std::vector<double>& out) {
    op.apply_negative_laplacian(y, ax);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = mass * (y[i] - xprev[i]) + tau * (ax[i] - load[i] + power_nonlinearity(y[i], q));
      s += out[i] * out[i];
    }
    return std::sqrt(s);
  };

  NewtonStats local;
  double fnorm = residual(x, f);
  local.residual_history.push_back(fnorm);

  // Tridiagonal couplings between consecutive compact indices.
  std::vector<double> lower(n, 0.0), diag(n), cprime(n), dprime(n);
  if (tridiagonal) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (op.neighbor(k, 1) == static_cast<std::int64_t>(k + 1)) lower[k + 1] = -tau * op.off();
    }
  }

  for (int it = 0;; ++it) {
    double scaled = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gp[i] = power_derivative(x[i], q);
      diag[i] = mass + tau * (op.center() + gp[i]);
      scaled = std::max(scaled, std::abs(f[i]) / diag[i]);
      xmax = std::max(xmax, std::abs(x[i]));
    }
    const double tol = cfg.newton_atol + cfg.newton_rtol * xmax;
    if (scaled <= tol) {
      local.residual = scaled;
      break;
    }
    if (it >= cfg.newton_max_iter)
      throw Error(ErrorCode::newton_divergence,
                  "no convergence in " + std::to_string(cfg.newton_max_iter) +
                      " iterations (scaled residual " + std::to_string(scaled) + ")");

    if (tridiagonal) {
      // Thomas elimination; the matrix is symmetric and diagonally dominant.
      cprime[0] = n > 1 ? lower[1] / diag[0] : 0.0;
      dprime[0] = f[0] / diag[0];
      for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - lower[i] * cprime[i - 1];
        cprime[i] = i + 1 < n ? lower[i + 1] / m : 0.0;
        dprime[i] = (f[i] - lower[i] * dprime[i - 1]) / m;
      }
      d[n - 1] = dprime[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) d[i] = dprime[i] - cprime[i] * d[i + 1];
    } else {
      MatrixAction jac = [&](std::span<const double> v, std::span<double> y) {
        op.apply_negative_laplacian(v, y);
        for (std::size_t i = 0; i < n; ++i) y[i] = mass * v[i] + tau * (y[i] + gp[i] * v[i]);
      };
      LinearStats ls;
      d = solve_linear(jac, f, diag, cfg.linear_tol, cfg.linear_max_iter, &ls);
      local.linear_iterations += ls.iterations;
    }

    double lambda = cfg.damping;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - lambda * d[i];
      const double tnorm = residual(trial, ftrial);
      if (tnorm < fnorm) {
        x.swap(trial);
        f.swap(ftrial);
        fnorm = tnorm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // Residual is at round-off level; accept when it is within reach of the tolerance.
      if (scaled <= 1e3 * tol) {
        local.residual = scaled;
        break;
      }
      throw Error(ErrorCode::newton_divergence,
                  "line search failed to decrease the residual (scaled " + std::to_string(scaled) + ")");
    }
    local.iterations = it + 1;
    local.residual_history.push_back(fnorm);
  }

  double xmax = 0.0;
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  const double floor = -10.0 * (cfg.newton_atol + cfg.newton_rtol * xmax);
  for (double& v : x) {
    if (v < floor) throw Error(ErrorCode::newton_divergence, "negative iterate " + std::to_string(v));
    if (v < 0.0) v = 0.0;
  }
  if (stats) *stats = std::move(local);
  return x;
}

}  // namespace

Field implicit_step(const Field& u_prev, double tau, double q, const StencilOperator& op,
                    const StepperConfig& cfg, NewtonStats* stats) {
  if (!same_grid(op.grid(), u_prev.grid())) throw Error(ErrorCode::grid_mismatch, "implicit_step");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::invalid_argument, "tau must be > 0");
  if (!(q > 1.0)) throw Error(ErrorCode::invalid_argument, "q must be > 1");
  const auto xprev = interior_values(u_prev);
  std::vector<double> guess(xprev.size());
  for (std::size_t i = 0; i < xprev.size(); ++i) {
    if (!(xprev[i] >= 0.0) || !std::isfinite(xprev[i]))
      throw Error(ErrorCode::negative_input, "previous field must be finite and nonnegative");
    guess[i] = scalar_resolvent(xprev[i], tau, q);
  }
  for (std::size_t node : op.grid().dirichlet()) {
    if (op.boundary()[node] < 0.0) throw Error(ErrorCode::negative_input, "boundary data must be >= 0");
  }
  const auto x = newton_solve(op, q, 1.0, tau, xprev, std::move(guess), cfg, stats);
  return assemble_field(op, x);
}

Field solve_stationary(const StencilOperator& op, double q, const StepperConfig& cfg,
                       const Field* initial, NewtonStats* stats) {
  if (!(q > 1.0)) throw Error(ErrorCode::invalid_argument, "q must be > 1");
  std::vector<double> guess;
  if (initial) {
    if (!same_grid(op.grid(), initial->grid())) throw Error(ErrorCode::grid_mismatch, "solve_stationary");
    guess = interior_values(*initial);
  } else {
    double top = 0.0;
    for (std::size_t node : op.grid().dirichlet()) top = std::max(top, op.boundary()[node]);
    guess.assign(op.size(), top);
  }
  const std::vector<double> zeros(op.size(), 0.0);
  const auto x = newton_solve(op, q, 0.0, 1.0, zeros, std::move(guess), cfg, stats);
  return assemble_field(op, x);
}

}  // namespace parablow
