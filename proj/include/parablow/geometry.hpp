#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "parablow/errors.hpp"

namespace parablow {

using Point = std::array<double, 2>;

enum class DomainKind {
  interval,
  ball,
  annulus,
  exterior_ball,
  rectangle_with_hole,
  // No boundary at all: the whole-space constant solution lives here.
  periodic_interval,
};

std::string_view to_string(DomainKind kind);

/// Symbolic description of a domain with compact boundary.
///
/// In one dimension a ball is the interval (-R, R), an annulus is
/// (-R, -r) U (r, R) and the exterior of a ball is R0 < |x| < R_inf.
/// Exterior domains are always carried with their truncation radius R_inf,
/// where a homogeneous Dirichlet condition is imposed.
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  int dim = 1;

  double a = -1.0, b = 1.0;          // interval, periodic_interval
  double inner = 0.0, outer = 1.0;   // ball (outer = R), annulus, exterior (inner = R0, outer = R_inf)
  std::array<double, 4> rect{};      // x0, x1, y0, y1
  Point hole_center{};
  double hole_radius = 0.0;

  static DomainSpec interval(double a, double b);
  static DomainSpec periodic(double a, double b);
  static DomainSpec ball(double radius, int dim);
  static DomainSpec annulus(double r, double R, int dim);
  static DomainSpec exterior_ball(double r0, double r_inf, int dim);
  static DomainSpec rectangle_with_hole(double x0, double x1, double y0, double y1, Point center,
                                        double radius);

  /// Throws unsupported-domain / invalid-argument on malformed parameters.
  void validate() const;

  /// Signed distance to the boundary, positive inside. Meaningless for periodic domains.
  double signed_distance(const Point& p) const;

  /// Nearest point of the boundary; `artificial` is set when that point lies
  /// on the truncation sphere of an exterior domain.
  Point nearest_boundary_point(const Point& p, bool* artificial = nullptr) const;

  /// Distance from p to the physical part of the boundary (ignores the truncation sphere).
  double physical_boundary_distance(const Point& p) const;

  bool bounded_original() const { return kind != DomainKind::exterior_ball; }

  /// Axis-aligned bounding box {lo_x, hi_x, lo_y, hi_y}.
  std::array<double, 4> bounding_box() const;

  /// Characteristic length used to scale probe distances.
  double diameter() const;

  std::string describe() const;
};

bool operator==(const DomainSpec& lhs, const DomainSpec& rhs);

enum class ExhaustionMode { interior, truncation };

/// Increasing family of subdomains: inward offsets by margins (interior mode)
/// or intersections with balls B_n (truncation mode).
struct ExhaustionPlan {
  ExhaustionMode mode = ExhaustionMode::interior;
  std::vector<double> parameters;  // margins (strictly decreasing, > 0) or radii (strictly increasing)

  std::size_t count() const { return parameters.size(); }
  void validate() const;
};

DomainSpec exhaustion(const DomainSpec& domain, const ExhaustionPlan& plan, std::size_t m);

enum class NodeKind : std::uint8_t { interior, dirichlet, exterior };

/// Uniform tensor grid with an interior / Dirichlet / exterior mask.
///
/// Non-periodic grids live on the lattice h * Z^dim anchored at the origin, so
/// grids of equal spacing over different domains share nodes exactly.
class Grid {
 public:
  struct BoundaryTrace {
    Point point{};
    bool artificial = false;
  };

  const DomainSpec& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  double h() const { return h_; }
  bool periodic() const { return periodic_; }
  double cell_volume() const { return dim() == 1 ? h_ : h_ * h_; }

  std::size_t node_count() const { return mask_.size(); }
  std::array<int, 2> extent() const { return extent_; }
  NodeKind kind(std::size_t node) const { return mask_[node]; }
  std::span<const NodeKind> mask() const { return mask_; }

  Point coordinate(std::size_t node) const;
  std::array<std::int64_t, 2> lattice_index(std::size_t node) const;
  /// Node id of a lattice index, or -1 when it falls outside the grid box.
  std::int64_t node_at(std::array<std::int64_t, 2> lattice) const;

  /// Interior nodes in compact order.
  std::span<const std::size_t> interior() const { return interior_; }
  std::size_t interior_count() const { return interior_.size(); }
  /// Compact interior index of a node, -1 if not interior.
  std::int64_t compact_index(std::size_t node) const { return compact_[node]; }
  /// Stencil neighbours (node ids) of the k-th interior node: 2*dim entries,
  /// ordered (-x, +x, -y, +y).
  std::span<const std::size_t> neighbors(std::size_t k) const {
    return {neighbors_.data() + k * stencil_width(), stencil_width()};
  }
  std::size_t stencil_width() const { return 2 * static_cast<std::size_t>(dim()); }

  std::span<const std::size_t> dirichlet() const { return dirichlet_; }
  const BoundaryTrace& trace(std::size_t node) const { return traces_[node]; }

  friend std::shared_ptr<const Grid> build_grid(const DomainSpec& domain, double h);

 private:
  Grid() = default;

  DomainSpec domain_;
  double h_ = 0.0;
  bool periodic_ = false;
  std::array<double, 2> x0_{};                // coordinate of node (0, 0)
  std::array<std::int64_t, 2> origin_{};      // lattice index of node (0, 0)
  std::array<int, 2> extent_{1, 1};
  std::vector<NodeKind> mask_;
  std::vector<std::size_t> interior_;
  std::vector<std::int64_t> compact_;
  std::vector<std::size_t> neighbors_;
  std::vector<std::size_t> dirichlet_;
  std::vector<BoundaryTrace> traces_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Discretizes a domain on the lattice of spacing h.
GridPtr build_grid(const DomainSpec& domain, double h);

/// One real value per grid node. Exterior nodes hold 0; Dirichlet nodes hold
/// the boundary value in force for that field.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0);

  /// `value` on interior nodes, 0 elsewhere.
  static Field constant_interior(GridPtr grid, double value);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t node) { return values_[node]; }
  double operator[](std::size_t node) const { return values_[node]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// sqrt(h^dim * sum over interior nodes of u^2).
double l2_norm(const Field& u);
/// max over interior nodes of |u|.
double max_norm(const Field& u);
/// L2 norm of u - v over interior nodes; grids must be identical.
double l2_distance(const Field& u, const Field& v);

/// Copies an interior field of a subdomain grid onto a larger grid, zero elsewhere.
Field extend_by_zero(const Field& u, const GridPtr& target);

bool same_grid(const Grid& a, const Grid& b);

}  // namespace parablow
