#include "parablow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace parablow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radius(const Point& p, int dim) {
  return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

Point radial_point(const Point& p, int dim, double r) {
  if (dim == 1) return {p[0] < 0.0 ? -r : r, 0.0};
  const double n = std::hypot(p[0], p[1]);
  if (n == 0.0) return {r, 0.0};
  return {r * p[0] / n, r * p[1] / n};
}

double dist(const Point& p, const Point& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::ball: return "ball";
    case DomainKind::annulus: return "annulus";
    case DomainKind::exterior_ball: return "exterior-ball";
    case DomainKind::rectangle_with_hole: return "rectangle-with-hole";
    case DomainKind::periodic_interval: return "periodic-interval";
  }
  return "unknown";
}

DomainSpec DomainSpec::interval(double a, double b) {
  DomainSpec d;
  d.kind = DomainKind::interval;
  d.dim = 1;
  d.a = a;
  d.b = b;
  d.validate();
  return d;
}

DomainSpec DomainSpec::periodic(double a, double b) {
  DomainSpec d = interval(a, b);
  d.kind = DomainKind::periodic_interval;
  return d;
}

DomainSpec DomainSpec::ball(double radius, int dim) {
  DomainSpec d;
  d.kind = DomainKind::ball;
  d.dim = dim;
  d.inner = 0.0;
  d.outer = radius;
  d.validate();
  return d;
}

DomainSpec DomainSpec::annulus(double r, double R, int dim) {
  DomainSpec d;
  d.kind = DomainKind::annulus;
  d.dim = dim;
  d.inner = r;
  d.outer = R;
  d.validate();
  return d;
}

DomainSpec DomainSpec::exterior_ball(double r0, double r_inf, int dim) {
  DomainSpec d = annulus(r0, r_inf, dim);
  d.kind = DomainKind::exterior_ball;
  return d;
}

DomainSpec DomainSpec::rectangle_with_hole(double x0, double x1, double y0, double y1, Point center,
                                           double radius) {
  DomainSpec d;
  d.kind = DomainKind::rectangle_with_hole;
  d.dim = 2;
  d.rect = {x0, x1, y0, y1};
  d.hole_center = center;
  d.hole_radius = radius;
  d.validate();
  return d;
}

void DomainSpec::validate() const {
  require(dim == 1 || dim == 2, ErrorCode::unsupported_domain, "dimension must be 1 or 2");
  auto finite = [](double v) { return std::isfinite(v); };
  switch (kind) {
    case DomainKind::interval:
    case DomainKind::periodic_interval:
      require(dim == 1, ErrorCode::unsupported_domain, "intervals are one-dimensional");
      require(finite(a) && finite(b) && a < b, ErrorCode::invalid_argument, "interval needs a < b");
      break;
    case DomainKind::ball:
      require(finite(outer) && outer > 0.0, ErrorCode::invalid_argument, "ball radius must be > 0");
      break;
    case DomainKind::annulus:
    case DomainKind::exterior_ball:
      require(finite(inner) && finite(outer) && inner > 0.0 && inner < outer,
              ErrorCode::invalid_argument, "radii must satisfy 0 < r < R");
      break;
    case DomainKind::rectangle_with_hole: {
      require(dim == 2, ErrorCode::unsupported_domain, "rectangle-with-hole is two-dimensional");
      const auto [x0, x1, y0, y1] = rect;
      require(x0 < x1 && y0 < y1, ErrorCode::invalid_argument, "degenerate rectangle");
      require(hole_radius > 0.0, ErrorCode::invalid_argument, "hole radius must be > 0");
      require(hole_center[0] - hole_radius > x0 && hole_center[0] + hole_radius < x1 &&
                  hole_center[1] - hole_radius > y0 && hole_center[1] + hole_radius < y1,
              ErrorCode::invalid_argument, "hole must lie strictly inside the rectangle");
      break;
    }
  }
}

double DomainSpec::signed_distance(const Point& p) const {
  switch (kind) {
    case DomainKind::interval: return std::min(p[0] - a, b - p[0]);
    case DomainKind::periodic_interval: return kInf;
    case DomainKind::ball: return outer - radius(p, dim);
    case DomainKind::annulus:
    case DomainKind::exterior_ball: {
      const double r = radius(p, dim);
      return std::min(r - inner, outer - r);
    }
    case DomainKind::rectangle_with_hole: {
      const auto [x0, x1, y0, y1] = rect;
      const double box = std::min({p[0] - x0, x1 - p[0], p[1] - y0, y1 - p[1]});
      return std::min(box, dist(p, hole_center) - hole_radius);
    }
  }
  return kInf;
}

Point DomainSpec::nearest_boundary_point(const Point& p, bool* artificial) const {
  if (artificial) *artificial = false;
  switch (kind) {
    case DomainKind::interval:
      return {std::abs(p[0] - a) <= std::abs(b - p[0]) ? a : b, 0.0};
    case DomainKind::periodic_interval:
      return p;
    case DomainKind::ball:
      return radial_point(p, dim, outer);
    case DomainKind::annulus:
    case DomainKind::exterior_ball: {
      const double r = radius(p, dim);
      if (std::abs(r - inner) <= std::abs(outer - r)) return radial_point(p, dim, inner);
      if (artificial) *artificial = kind == DomainKind::exterior_ball;
      return radial_point(p, dim, outer);
    }
    case DomainKind::rectangle_with_hole: {
      const auto [x0, x1, y0, y1] = rect;
      const double cx = std::clamp(p[0], x0, x1);
      const double cy = std::clamp(p[1], y0, y1);
      std::array<Point, 5> candidates{Point{x0, cy}, Point{x1, cy}, Point{cx, y0}, Point{cx, y1},
                                      Point{}};
      const double n = dist(p, hole_center);
      candidates[4] = n == 0.0 ? Point{hole_center[0] + hole_radius, hole_center[1]}
                               : Point{hole_center[0] + hole_radius * (p[0] - hole_center[0]) / n,
                                       hole_center[1] + hole_radius * (p[1] - hole_center[1]) / n};
      return *std::min_element(candidates.begin(), candidates.end(),
                               [&](const Point& u, const Point& v) { return dist(p, u) < dist(p, v); });
    }
  }
  return p;
}

double DomainSpec::physical_boundary_distance(const Point& p) const {
  if (kind == DomainKind::exterior_ball) return radius(p, dim) - inner;
  return signed_distance(p);
}

std::array<double, 4> DomainSpec::bounding_box() const {
  switch (kind) {
    case DomainKind::interval:
    case DomainKind::periodic_interval:
      return {a, b, 0.0, 0.0};
    case DomainKind::ball:
    case DomainKind::annulus:
    case DomainKind::exterior_ball:
      return dim == 1 ? std::array<double, 4>{-outer, outer, 0.0, 0.0}
                      : std::array<double, 4>{-outer, outer, -outer, outer};
    case DomainKind::rectangle_with_hole:
      return rect;
  }
  return {};
}

double DomainSpec::diameter() const {
  const auto box = bounding_box();
  return std::max(box[1] - box[0], box[3] - box[2]);
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(";
  switch (kind) {
    case DomainKind::interval:
    case DomainKind::periodic_interval: os << a << "," << b; break;
    case DomainKind::ball: os << "R=" << outer << ",dim=" << dim; break;
    case DomainKind::annulus:
    case DomainKind::exterior_ball: os << inner << "," << outer << ",dim=" << dim; break;
    case DomainKind::rectangle_with_hole:
      os << "[" << rect[0] << "," << rect[1] << "]x[" << rect[2] << "," << rect[3] << "] minus B("
         << hole_center[0] << "," << hole_center[1] << ";" << hole_radius << ")";
      break;
  }
  os << ")";
  return os.str();
}

bool operator==(const DomainSpec& l, const DomainSpec& r) {
  return l.kind == r.kind && l.dim == r.dim && l.a == r.a && l.b == r.b && l.inner == r.inner &&
         l.outer == r.outer && l.rect == r.rect && l.hole_center == r.hole_center &&
         l.hole_radius == r.hole_radius;
}

void ExhaustionPlan::validate() const {
  require(!parameters.empty(), ErrorCode::invalid_argument, "exhaustion plan is empty");
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    require(parameters[i] > 0.0 && std::isfinite(parameters[i]), ErrorCode::invalid_argument,
            "exhaustion parameters must be positive");
    if (i == 0) continue;
    if (mode == ExhaustionMode::interior)
      require(parameters[i] < parameters[i - 1], ErrorCode::invalid_argument,
              "interior margins must strictly decrease");
    else
      require(parameters[i] > parameters[i - 1], ErrorCode::invalid_argument,
              "truncation radii must strictly increase");
  }
}

DomainSpec exhaustion(const DomainSpec& domain, const ExhaustionPlan& plan, std::size_t m) {
  if (m >= plan.count())
    throw Error(ErrorCode::index_out_of_range,
                "member " + std::to_string(m) + " of a plan with " + std::to_string(plan.count()));
  plan.validate();
  const double p = plan.parameters[m];
  DomainSpec out = domain;
  if (plan.mode == ExhaustionMode::interior) {
    switch (domain.kind) {
      case DomainKind::interval:
        out = DomainSpec::interval(domain.a + p, domain.b - p);
        break;
      case DomainKind::ball:
        out = DomainSpec::ball(domain.outer - p, domain.dim);
        break;
      case DomainKind::annulus:
        out = DomainSpec::annulus(domain.inner + p, domain.outer - p, domain.dim);
        break;
      case DomainKind::exterior_ball:
        out = DomainSpec::exterior_ball(domain.inner + p, domain.outer - p, domain.dim);
        break;
      case DomainKind::rectangle_with_hole: {
        const auto [x0, x1, y0, y1] = domain.rect;
        out = DomainSpec::rectangle_with_hole(x0 + p, x1 - p, y0 + p, y1 - p, domain.hole_center,
                                              domain.hole_radius + p);
        break;
      }
      case DomainKind::periodic_interval:
        throw Error(ErrorCode::unsupported_domain, "periodic domains have no exhaustion");
    }
    return out;
  }
  switch (domain.kind) {
    case DomainKind::interval:
      out = DomainSpec::interval(std::max(domain.a, -p), std::min(domain.b, p));
      break;
    case DomainKind::ball:
      out = DomainSpec::ball(std::min(domain.outer, p), domain.dim);
      break;
    case DomainKind::annulus:
      out = DomainSpec::annulus(domain.inner, std::min(domain.outer, p), domain.dim);
      break;
    case DomainKind::exterior_ball:
      // Omega ∩ B_n is a bounded annulus whose outer sphere is part of the true boundary.
      out = DomainSpec::annulus(domain.inner, std::min(domain.outer, p), domain.dim);
      break;
    case DomainKind::rectangle_with_hole:
    case DomainKind::periodic_interval:
      throw Error(ErrorCode::unsupported_domain,
                  "truncation is defined for interval and radial domains only");
  }
  return out;
}

Point Grid::coordinate(std::size_t node) const {
  const auto i = static_cast<std::int64_t>(node % static_cast<std::size_t>(extent_[0]));
  const auto j = static_cast<std::int64_t>(node / static_cast<std::size_t>(extent_[0]));
  if (periodic_) return {x0_[0] + static_cast<double>(i) * h_, 0.0};
  return {static_cast<double>(origin_[0] + i) * h_,
          dim() == 1 ? 0.0 : static_cast<double>(origin_[1] + j) * h_};
}

std::array<std::int64_t, 2> Grid::lattice_index(std::size_t node) const {
  const auto i = static_cast<std::int64_t>(node % static_cast<std::size_t>(extent_[0]));
  const auto j = static_cast<std::int64_t>(node / static_cast<std::size_t>(extent_[0]));
  return {origin_[0] + i, dim() == 1 ? 0 : origin_[1] + j};
}

std::int64_t Grid::node_at(std::array<std::int64_t, 2> lattice) const {
  const std::int64_t i = lattice[0] - origin_[0];
  const std::int64_t j = dim() == 1 ? 0 : lattice[1] - origin_[1];
  if (i < 0 || i >= extent_[0] || j < 0 || j >= extent_[1]) return -1;
  return i + j * extent_[0];
}

GridPtr build_grid(const DomainSpec& domain, double h) {
  domain.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::invalid_argument, "spacing must be > 0");

  std::shared_ptr<Grid> g(new Grid());
  g->domain_ = domain;
  g->h_ = h;

  if (domain.kind == DomainKind::periodic_interval) {
    const double len = domain.b - domain.a;
    const auto n = static_cast<std::int64_t>(std::llround(len / h));
    if (n < 1 || std::abs(static_cast<double>(n) * h - len) > 1e-9 * len)
      throw Error(ErrorCode::infeasible_resolution, "periodic length is not a multiple of h");
    g->periodic_ = true;
    g->x0_ = {domain.a, 0.0};
    g->extent_ = {static_cast<int>(n), 1};
    g->mask_.assign(static_cast<std::size_t>(n), NodeKind::interior);
    g->compact_.resize(static_cast<std::size_t>(n));
    g->traces_.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      g->interior_.push_back(static_cast<std::size_t>(i));
      g->compact_[static_cast<std::size_t>(i)] = i;
      g->neighbors_.push_back(static_cast<std::size_t>((i + n - 1) % n));
      g->neighbors_.push_back(static_cast<std::size_t>((i + 1) % n));
    }
    return g;
  }

  const auto box = domain.bounding_box();
  const int dim = domain.dim;
  std::array<std::int64_t, 2> lo{0, 0}, hi{0, 0};
  for (int ax = 0; ax < dim; ++ax) {
    lo[ax] = static_cast<std::int64_t>(std::floor(box[2 * ax] / h + 1e-9)) - 1;
    hi[ax] = static_cast<std::int64_t>(std::ceil(box[2 * ax + 1] / h - 1e-9)) + 1;
  }
  const double total = static_cast<double>(hi[0] - lo[0] + 1) * static_cast<double>(hi[1] - lo[1] + 1);
  if (total > 6.0e7) throw Error(ErrorCode::infeasible_resolution, "grid too large");

  g->origin_ = lo;
  g->extent_ = {static_cast<int>(hi[0] - lo[0] + 1), static_cast<int>(hi[1] - lo[1] + 1)};
  const std::size_t nodes = static_cast<std::size_t>(g->extent_[0]) * static_cast<std::size_t>(g->extent_[1]);
  g->mask_.assign(nodes, NodeKind::exterior);
  g->compact_.assign(nodes, -1);
  g->traces_.resize(nodes);

  const double eps = 1e-9 * h;
  for (std::size_t node = 0; node < nodes; ++node) {
    if (domain.signed_distance(g->coordinate(node)) > eps) g->mask_[node] = NodeKind::interior;
  }

  const int nx = g->extent_[0];
  for (std::size_t node = 0; node < nodes; ++node) {
    if (g->mask_[node] != NodeKind::interior) continue;
    // The padded box guarantees every interior node has all stencil neighbours.
    std::array<std::size_t, 4> nb{};
    nb[0] = node - 1;
    nb[1] = node + 1;
    if (dim == 2) {
      nb[2] = node - static_cast<std::size_t>(nx);
      nb[3] = node + static_cast<std::size_t>(nx);
    }
    g->compact_[node] = static_cast<std::int64_t>(g->interior_.size());
    g->interior_.push_back(node);
    for (int s = 0; s < 2 * dim; ++s) g->neighbors_.push_back(nb[static_cast<std::size_t>(s)]);
  }
  if (g->interior_.empty())
    throw Error(ErrorCode::infeasible_resolution,
                "no interior node of " + domain.describe() + " at h=" + std::to_string(h));

  for (std::size_t nbid : g->neighbors_) {
    if (g->mask_[nbid] == NodeKind::exterior) g->mask_[nbid] = NodeKind::dirichlet;
  }
  for (std::size_t node = 0; node < nodes; ++node) {
    if (g->mask_[node] != NodeKind::dirichlet) continue;
    g->dirichlet_.push_back(node);
    bool artificial = false;
    g->traces_[node].point = domain.nearest_boundary_point(g->coordinate(node), &artificial);
    g->traces_[node].artificial = artificial;
  }
  return g;
}

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw Error(ErrorCode::invalid_argument, "field needs a grid");
  values_.assign(grid_->node_count(), 0.0);
  for (std::size_t node : grid_->interior()) values_[node] = fill;
  for (std::size_t node : grid_->dirichlet()) values_[node] = fill;
}

Field Field::constant_interior(GridPtr grid, double value) {
  Field f(std::move(grid), 0.0);
  for (std::size_t node : f.grid().interior()) f[node] = value;
  return f;
}

double l2_norm(const Field& u) {
  double s = 0.0;
  for (std::size_t node : u.grid().interior()) s += u[node] * u[node];
  return std::sqrt(s * u.grid().cell_volume());
}

double max_norm(const Field& u) {
  double m = 0.0;
  for (std::size_t node : u.grid().interior()) m = std::max(m, std::abs(u[node]));
  return m;
}

bool same_grid(const Grid& a, const Grid& b) {
  return &a == &b || (a.domain() == b.domain() && a.h() == b.h());
}

double l2_distance(const Field& u, const Field& v) {
  if (!same_grid(u.grid(), v.grid())) throw Error(ErrorCode::grid_mismatch, "l2_distance");
  double s = 0.0;
  for (std::size_t node : u.grid().interior()) {
    const double d = u[node] - v[node];
    s += d * d;
  }
  return std::sqrt(s * u.grid().cell_volume());
}

Field extend_by_zero(const Field& u, const GridPtr& target) {
  const Grid& src = u.grid();
  if (!target) throw Error(ErrorCode::invalid_argument, "extend_by_zero needs a target grid");
  if (src.periodic() || target->periodic())
    throw Error(ErrorCode::incompatible_grids, "periodic grids cannot be embedded");
  if (src.dim() != target->dim() || std::abs(src.h() - target->h()) > 1e-12 * target->h())
    throw Error(ErrorCode::incompatible_grids, "spacings or dimensions differ");
  Field out(target, 0.0);
  for (std::size_t node : src.interior()) {
    const std::int64_t t = target->node_at(src.lattice_index(node));
    if (t < 0 || target->kind(static_cast<std::size_t>(t)) != NodeKind::interior)
      throw Error(ErrorCode::incompatible_grids, "subdomain node falls outside the target interior");
    out[static_cast<std::size_t>(t)] = u[node];
  }
  return out;
}

}  // namespace parablow
