#pragma once

#include <functional>
#include <vector>

#include "parablow/geometry.hpp"

namespace parablow {

/// Lateral boundary data f(x, t) >= 0.
struct LateralData {
  enum class Kind { zero, constant, tabulated, function };

  Kind kind = Kind::zero;
  double value = 0.0;
  // tabulated: piecewise linear in t, constant outside the table, uniform on the boundary
  std::vector<double> times;
  std::vector<double> values;
  std::function<double(const Point&, double)> fn;

  static LateralData zero() { return {}; }
  static LateralData constant(double c);
  static LateralData tabulated(std::vector<double> times, std::vector<double> values);
  static LateralData function(std::function<double(const Point&, double)> f, bool time_independent);

  double operator()(const Point& x, double t) const;
  bool is_zero() const;
  bool time_independent() const;
  void validate() const;

  bool steady = true;  // only meaningful for Kind::function
};

struct InitialData {
  enum class Mode {
    constant,   // v(x, 0) = k
    blow_up,    // k -> infinity along k_sequence (or an automatic doubling ladder)
  };

  Mode mode = Mode::blow_up;
  double k = 1.0;
  std::vector<double> k_sequence;   // strictly increasing; empty = doubling ladder
  std::vector<double> start_times;  // strictly decreasing start-time schedule for lateral data

  static InitialData constant(double k);
  static InitialData blow_up();
  void validate() const;
};

struct ProblemSpec {
  double q = 2.0;
  DomainSpec domain = DomainSpec::interval(-1.0, 1.0);
  LateralData lateral;
  InitialData initial;
  double horizon = 1.0;

  void validate() const;
};

/// phi_q(t) = ((q-1) t)^{-1/(q-1)}.
double phi_q(double q, double t);
/// c_q = (1/(q-1))^{1/(q-1)}.
double c_q(double q);
/// Solution of v' = -v^q, v(0) = k.
double ode_solution(double q, double k, double t);

/// Dirichlet values of f(., t) on the grid's boundary nodes; artificial
/// truncation nodes of exterior domains receive 0.
Field lateral_field(const GridPtr& grid, const LateralData& f, double t);

}  // namespace parablow
