#include "parablow/problem.hpp"

#include <algorithm>
#include <cmath>

namespace parablow {

LateralData LateralData::constant(double c) {
  LateralData f;
  f.kind = c == 0.0 ? Kind::zero : Kind::constant;
  f.value = c;
  f.validate();
  return f;
}

LateralData LateralData::tabulated(std::vector<double> times, std::vector<double> values) {
  LateralData f;
  f.kind = Kind::tabulated;
  f.times = std::move(times);
  f.values = std::move(values);
  f.validate();
  return f;
}

LateralData LateralData::function(std::function<double(const Point&, double)> fn, bool time_independent) {
  LateralData f;
  f.kind = Kind::function;
  f.fn = std::move(fn);
  f.steady = time_independent;
  f.validate();
  return f;
}

double LateralData::operator()(const Point& x, double t) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::constant: return value;
    case Kind::function: return fn(x, t);
    case Kind::tabulated: {
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
      return (1.0 - w) * values[j - 1] + w * values[j];
    }
  }
  return 0.0;
}

bool LateralData::is_zero() const {
  if (kind == Kind::zero) return true;
  if (kind == Kind::constant) return value == 0.0;
  if (kind == Kind::tabulated)
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  return false;
}

bool LateralData::time_independent() const {
  switch (kind) {
    case Kind::zero:
    case Kind::constant: return true;
    case Kind::tabulated:
      return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    case Kind::function: return steady;
  }
  return false;
}

void LateralData::validate() const {
  switch (kind) {
    case Kind::zero: break;
    case Kind::constant:
      if (!(value >= 0.0) || !std::isfinite(value))
        throw Error(ErrorCode::invalid_argument, "lateral constant must be finite and >= 0");
      break;
    case Kind::tabulated:
      if (times.empty() || times.size() != values.size())
        throw Error(ErrorCode::invalid_argument, "tabulated data needs matching non-empty columns");
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
          throw Error(ErrorCode::invalid_argument, "tabulated values must be finite and >= 0");
        if (i > 0 && !(times[i] > times[i - 1]))
          throw Error(ErrorCode::invalid_argument, "tabulated times must increase strictly");
      }
      break;
    case Kind::function:
      if (!fn) throw Error(ErrorCode::invalid_argument, "lateral function is empty");
      break;
  }
}

InitialData InitialData::constant(double k) {
  InitialData d;
  d.mode = Mode::constant;
  d.k = k;
  d.validate();
  return d;
}

InitialData InitialData::blow_up() { return {}; }

void InitialData::validate() const {
  if (mode == Mode::constant && (!(k >= 0.0) || !std::isfinite(k)))
    throw Error(ErrorCode::invalid_argument, "initial constant must be finite and >= 0");
  for (std::size_t i = 0; i < k_sequence.size(); ++i) {
    if (!(k_sequence[i] > 0.0) || (i > 0 && !(k_sequence[i] > k_sequence[i - 1])))
      throw Error(ErrorCode::invalid_argument, "k sequence must be positive and strictly increasing");
  }
  for (std::size_t i = 0; i < start_times.size(); ++i) {
    if (!(start_times[i] > 0.0) || (i > 0 && !(start_times[i] < start_times[i - 1])))
      throw Error(ErrorCode::invalid_argument, "start times must be positive and strictly decreasing");
  }
}

void ProblemSpec::validate() const {
  if (!(q > 1.0) || !std::isfinite(q)) throw Error(ErrorCode::invalid_argument, "q must be > 1");
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be > 0");
  domain.validate();
  lateral.validate();
  initial.validate();
}

double phi_q(double q, double t) { return std::pow((q - 1.0) * t, -1.0 / (q - 1.0)); }

double c_q(double q) { return std::pow(1.0 / (q - 1.0), 1.0 / (q - 1.0)); }

double ode_solution(double q, double k, double t) {
  if (k == 0.0) return 0.0;
  return std::pow((q - 1.0) * t + std::pow(k, 1.0 - q), -1.0 / (q - 1.0));
}

Field lateral_field(const GridPtr& grid, const LateralData& f, double t) {
  Field b(grid, 0.0);
  for (std::size_t node : grid->dirichlet()) {
    const auto& tr = grid->trace(node);
    b[node] = tr.artificial ? 0.0 : f(tr.point, t);
  }
  return b;
}

}  // namespace parablow
