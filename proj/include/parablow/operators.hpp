#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "parablow/geometry.hpp"

namespace parablow {

enum class ScheduleKind { fixed, geometric };

enum class LinearBackend {
  automatic,  // tridiagonal elimination on 1D lattices, Jacobi-PCG otherwise
  krylov,     // always Jacobi-PCG
};

struct StepperConfig {
  ScheduleKind schedule = ScheduleKind::geometric;
  double tau0 = 1e-5;
  double rho = 1.005;
  double tau_max = 1e-3;

  double newton_atol = 1e-12;
  double newton_rtol = 1e-12;
  int newton_max_iter = 200;
  double damping = 1.0;

  double linear_tol = 1e-12;
  int linear_max_iter = 20000;
  LinearBackend backend = LinearBackend::automatic;

  void validate() const;
  /// Length of the j-th step (0-based) before any clipping to output times.
  double tau(std::size_t j) const;
  /// tau0/2, tau_max/2 and rho -> sqrt(rho).
  StepperConfig refined() const;
};

/// 2*dim+1 point Laplacian on the interior nodes of a grid, together with the
/// Dirichlet values it reads at boundary neighbours.
class StencilOperator {
 public:
  explicit StencilOperator(GridPtr grid);
  StencilOperator(GridPtr grid, const Field& boundary);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  /// Field holding the Dirichlet values (0 on interior and exterior nodes).
  const Field& boundary() const { return boundary_; }

  double center() const { return center_; }
  double off() const { return off_; }
  std::size_t size() const { return grid_->interior_count(); }

  /// y = (-Delta_h) x on compact interior vectors, homogeneous boundary values.
  void apply_negative_laplacian(std::span<const double> x, std::span<double> y) const;
  /// Dirichlet contribution: (-Delta_h u) = A x - load.
  std::span<const double> boundary_load() const { return load_; }
  /// Compact index of the stencil neighbour s of interior node k, or -1 for a Dirichlet node.
  std::int64_t neighbor(std::size_t k, std::size_t s) const { return nbr_[k * width_ + s]; }
  std::size_t stencil_width() const { return width_; }

 private:
  void build();

  GridPtr grid_;
  Field boundary_;
  double center_ = 0.0;
  double off_ = 0.0;
  std::size_t width_ = 0;
  std::vector<std::int64_t> nbr_;
  std::vector<double> load_;
};

/// Interior values of a field in compact order.
std::vector<double> interior_values(const Field& u);
/// Field with the given interior values, the operator's Dirichlet values and 0 outside.
Field assemble_field(const StencilOperator& op, std::span<const double> interior);

/// Delta_h u at interior nodes (Dirichlet neighbours read from op.boundary()), 0 elsewhere.
Field apply_laplacian(const StencilOperator& op, const Field& u);

/// g(u) = |u|^{q-1} u and g'(u) = q |u|^{q-1}.
double power_nonlinearity(double u, double q);
double power_derivative(double u, double q);

/// Smallest-residual root of y + tau * y^q = b for b >= 0.
double scalar_resolvent(double b, double tau, double q);

struct LinearStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

using MatrixAction = std::function<void(std::span<const double>, std::span<double>)>;

/// Jacobi-preconditioned conjugate gradients. `diagonal` may be empty (no preconditioning).
std::vector<double> solve_linear(const MatrixAction& action, std::span<const double> rhs,
                                 std::span<const double> diagonal, double tol, int max_iter,
                                 LinearStats* stats = nullptr);

/// Field wrapper: the action maps compact interior vectors of rhs's grid.
Field solve_linear(const MatrixAction& action, const Field& rhs, const StepperConfig& cfg,
                   LinearStats* stats = nullptr);

/// Action of I + tau(-Delta_h) + tau q diag|u|^{q-1} on compact interior vectors.
MatrixAction newton_matrix(const StencilOperator& op, double tau, double q, const Field& u);

struct NewtonStats {
  int iterations = 0;
  int linear_iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;  // l2 norms of the residual, one per accepted iterate
};

/// One implicit Euler step: solves u + tau(-Delta_h u + |u|^{q-1}u) = u_prev with
/// the Dirichlet values of op.
Field implicit_step(const Field& u_prev, double tau, double q, const StencilOperator& op,
                    const StepperConfig& cfg, NewtonStats* stats = nullptr);

/// Stationary problem -Delta_h w + |w|^{q-1}w = 0 with the Dirichlet values of op.
Field solve_stationary(const StencilOperator& op, double q, const StepperConfig& cfg,
                       const Field* initial = nullptr, NewtonStats* stats = nullptr);

}  // namespace parablow
