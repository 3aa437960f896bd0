#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parablow/constructions.hpp"

using namespace parablow;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::io_error;
}

ProblemSpec periodic_problem(double q) {
  ProblemSpec p;
  p.q = q;
  p.domain = DomainSpec::periodic(0, 1);
  return p;
}

double ode_max_error(double tau) {
  ProblemSpec p = periodic_problem(2.0);
  const GridPtr g = build_grid(p.domain, 0.25);
  StepperConfig s;
  s.schedule = ScheduleKind::fixed;
  s.tau0 = s.tau_max = tau;
  double err = 0.0;
  const std::vector<double> times{1.0};
  evolve(Field::constant_interior(g, 1.0), p, s, times, 0.0, [&](const StepRecord& r, const Field& u) {
    err = std::max(err, std::abs(u[g->interior()[0]] - 1.0 / (1.0 + r.t)));
  });
  return err;
}

}  // namespace

TEST(Energy, Zero) {
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 16);
  EXPECT_EQ(energy(Field(g, 0.0), 2.0), 0.0);
}

TEST(Energy, HatFunction) {
  // v = 1 - |2x - 1| on (0,1): int |v'|^2 / 2 = 2 and int v^3 / 3 = 1/12
  const GridPtr g = build_grid(DomainSpec::interval(0, 1), 1.0 / 256);
  Field v(g, 0.0);
  for (std::size_t n : g->interior()) v[n] = 1.0 - std::abs(2.0 * g->coordinate(n)[0] - 1.0);
  EXPECT_NEAR(energy(v, 2.0), 25.0 / 12.0, 0.02 * 25.0 / 12.0);
}

TEST(Energy, EvenInU) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const GridPtr g = build_grid(DomainSpec::ball(1, 2), 1.0 / 8);
  Field u(g, 0.0), m(g, 0.0);
  for (std::size_t n : g->interior()) {
    u[n] = nd(rng);
    m[n] = -u[n];
  }
  EXPECT_DOUBLE_EQ(energy(u, 2.0), energy(m, 2.0));
}

TEST(Evolve, ZeroStaysZero) {
  ProblemSpec p;
  const GridPtr g = build_grid(p.domain, 1.0 / 32);
  const std::vector<double> times{0.1, 0.5};
  const Trajectory tr = evolve(Field(g, 0.0), p, StepperConfig{}, times);
  ASSERT_EQ(tr.snapshots.size(), 2u);
  for (const auto& s : tr.snapshots) EXPECT_EQ(max_norm(s.u), 0.0);
  EXPECT_EQ(check_universal_bound(tr, p.q).phi_margin, -1.0);
  EXPECT_EQ(check_derivative_bound(tr, 0.0), 0.0);
}

TEST(Evolve, SnapshotsHitOutputTimes) {
  ProblemSpec p;
  const GridPtr g = build_grid(p.domain, 1.0 / 16);
  const std::vector<double> times{0.0123, 0.1, 0.31};
  const Trajectory tr = evolve(Field::constant_interior(g, 1.0), p, StepperConfig{}, times);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_EQ(tr.snapshots[i].t, times[i]);
  for (std::size_t i = 1; i < tr.steps.size(); ++i) EXPECT_GT(tr.steps[i].t, tr.steps[i - 1].t);
}

TEST(Evolve, OdeOracleFirstOrder) {
  const double e1 = ode_max_error(1e-3);
  const double e2 = ode_max_error(5e-4);
  EXPECT_LE(e1, 1e-3);
  EXPECT_GE(e1 / e2, 1.8);
  EXPECT_LE(e1 / e2, 2.2);
}

TEST(Evolve, BelowOdeAndLinearHeatSupersolutions) {
  // discrete supersolutions: the scalar majorant and the implicit Euler linear heat flow
  ProblemSpec p;
  p.q = 2.0;
  const double k = 3.0, h = 1.0 / 64;
  const GridPtr g = build_grid(p.domain, h);
  const StencilOperator op(g);
  StepperConfig s;
  s.schedule = ScheduleKind::fixed;
  s.tau0 = s.tau_max = 1e-3;
  std::vector<double> heat(op.size(), k);
  const double pi = std::numbers::pi;
  const std::vector<double> times{0.1, 0.5};
  evolve(Field::constant_interior(g, k), p, s, times, 0.0, [&](const StepRecord& r, const Field& u) {
    MatrixAction act = [&](std::span<const double> x, std::span<double> y) {
      op.apply_negative_laplacian(x, y);
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + r.tau * y[i];
    };
    heat = solve_linear(act, heat, {}, 1e-14, 10000);
    const auto nodes = g->interior();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double x = g->coordinate(nodes[i])[0];
      EXPECT_LE(u[nodes[i]], std::min(r.majorant, heat[i]) * (1 + 1e-10) + 1e-12);
      if (r.t >= 0.1 && std::abs(x) <= 0.5) {
        // continuous oracles, loose: first-order scheme
        double series = 0.0;
        for (int n = 1; n < 400; n += 2)
          series += 4.0 / (n * pi) * std::sin(n * pi * (x + 1) / 2) * std::exp(-std::pow(n * pi / 2, 2) * r.t);
        EXPECT_LE(u[nodes[i]], std::min(ode_solution(2.0, k, r.t), k * series) * 1.02);
      }
    }
  });
}

TEST(Evolve, ContractionOrderEnergyAlongFlows) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProblemSpec p;
  p.q = 3.0;
  const GridPtr g = build_grid(DomainSpec::ball(1, 2), 1.0 / 12);
  p.domain = g->domain();
  Field u0(g, 0.0), v0(g, 0.0);
  for (std::size_t n : g->interior()) {
    u0[n] = 4.0 * unit(rng);
    v0[n] = u0[n] + unit(rng);
  }
  const std::vector<double> times{0.02};
  std::vector<Field> us;
  const Trajectory a = evolve(u0, p, StepperConfig{}, times, 0.0, [&](const StepRecord&, const Field& u) { us.push_back(u); });
  double prev = l2_distance(u0, v0);
  std::size_t j = 0;
  evolve(v0, p, StepperConfig{}, times, 0.0, [&](const StepRecord&, const Field& v) {
    const double d = l2_distance(us[j], v);
    EXPECT_LE(d, prev * (1 + 1e-10));
    for (std::size_t n : g->interior()) EXPECT_LE(us[j][n], v[n] + 1e-10 * max_norm(v));
    prev = d;
    ++j;
  });
  EXPECT_EQ(j, us.size());
  EXPECT_LE(a.max_energy_increase(), 1e-12);
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_LT(a.steps[i].bound_margin, 0.0);
}

TEST(Evolve, DivergenceCarriesTime) {
  ProblemSpec p;
  p.q = 3.0;
  const GridPtr g = build_grid(p.domain, 1.0 / 16);
  StepperConfig s;
  s.newton_max_iter = 1;
  const std::vector<double> times{0.1};
  try {
    evolve(Field::constant_interior(g, 1e8), p, s, times);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::newton_divergence);
    EXPECT_NE(std::string(e.what()).find("at t="), std::string::npos);
  }
}

TEST(UniversalBound, PhiValues) {
  EXPECT_DOUBLE_EQ(phi_q(2.0, 1.0), 1.0);
  EXPECT_NEAR(phi_q(3.0, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(phi_q(3.0, 1.0), 0.70711, 5e-6);
  EXPECT_DOUBLE_EQ(c_q(2.0), 1.0);
  EXPECT_NEAR(c_q(3.0), std::pow(2.0, -0.5), 1e-15);
}

TEST(DerivativeBound, OracleBelowOne) {
  for (double q : {1.2, 1.5, 2.0, 3.0, 6.0})
    for (double k : {0.1, 1.0, 1e3, 1e8})
      for (int e = -80; e <= 30; ++e) EXPECT_LE(derivative_ratio_oracle(q, k, std::pow(10.0, e / 10.0)), 1.0);
}

TEST(DerivativeBound, DiscreteOdeRatioTracksOracle) {
  ProblemSpec p = periodic_problem(2.0);
  const GridPtr g = build_grid(p.domain, 0.25);
  StepperConfig s;
  s.schedule = ScheduleKind::fixed;
  s.tau0 = s.tau_max = 1e-3;
  const std::vector<double> times{2.0};
  const Trajectory tr = evolve(Field::constant_interior(g, 1.0), p, s, times);
  double oracle = 0.0;
  for (const auto& st : tr.steps) oracle = std::max(oracle, derivative_ratio_oracle(2.0, 1.0, st.t));
  EXPECT_NEAR(check_derivative_bound(tr, tr.u0_l2), oracle, 5e-3);
}

TEST(Scaling, IdentityAndIncommensurate) {
  ProblemSpec p;
  p.q = 3.0;
  p.initial = InitialData::constant(2.0);
  ConstructionConfig c;
  c.output_times = {0.01, 0.05};
  EXPECT_EQ(check_scaling_invariance(p, 1.0, 1.0 / 32, 1.0 / 32, c), 0.0);
  EXPECT_EQ(code_of([&] { check_scaling_invariance(p, 2.0, 1.0 / 32, 1.0 / 32, c); }), ErrorCode::grid_incommensurate);
  // with time steps scaled by 1/lambda^2 the two runs are discrete images of each other
  EXPECT_LE(check_scaling_invariance(p, 2.0, 1.0 / 32, 1.0 / 64, c, true), 1e-10);
}

TEST(Lateral, TimeDependentDataDisableEnergy) {
  ProblemSpec p;
  p.lateral = LateralData::tabulated({0.0, 1.0}, {0.0, 2.0});
  const GridPtr g = build_grid(p.domain, 1.0 / 16);
  const std::vector<double> times{0.5};
  const Trajectory tr = evolve(Field(g, 0.0), p, StepperConfig{}, times);
  EXPECT_FALSE(tr.energy_tracked);
  EXPECT_FALSE(tr.zero_lateral);
  EXPECT_GT(max_norm(tr.snapshots[0].u), 0.0);
  EXPECT_DOUBLE_EQ(p.lateral({1.0, 0.0}, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(p.lateral({1.0, 0.0}, 7.0), 2.0);
}
