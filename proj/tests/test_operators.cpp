#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parablow/operators.hpp"
#include "parablow/semigroup.hpp"

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

// root of y + tau y^q = b by bisection
double bisect(double b, double tau, double q) {
  double lo = 0.0, hi = b;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + tau * std::pow(mid, q) > b ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Gaussian elimination with partial pivoting on a dense copy
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

Field random_field(const GridPtr& g, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Field f(g, 0.0);
  for (std::size_t n : g->interior()) f[n] = u(rng);
  return f;
}

}  // namespace

TEST(Laplacian, ZeroField) {
  const GridPtr g = build_grid(DomainSpec::ball(1, 2), 0.1);
  EXPECT_EQ(max_norm(apply_laplacian(StencilOperator(g), Field(g, 0.0))), 0.0);
}

TEST(Laplacian, ExactOnQuadratics) {
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 16);
  Field b(g, 0.0), u(g, 0.0);
  for (std::size_t n : g->dirichlet()) b[n] = std::pow(g->coordinate(n)[0], 2);
  for (std::size_t n : g->interior()) u[n] = std::pow(g->coordinate(n)[0], 2);
  const Field l = apply_laplacian(StencilOperator(g, b), u);
  for (std::size_t n : g->interior()) EXPECT_NEAR(l[n], 2.0, 1e-10);
}

TEST(Laplacian, SineWithinTaylorBound) {
  const double pi = std::numbers::pi;
  for (double h : {1.0 / 16, 1.0 / 64}) {
    const GridPtr g = build_grid(DomainSpec::interval(-1, 1), h);
    Field u(g, 0.0);
    for (std::size_t n : g->interior()) u[n] = std::sin(pi * g->coordinate(n)[0]);
    const Field l = apply_laplacian(StencilOperator(g), u);
    const double bound = std::pow(pi, 4) / 12.0 * h * h;
    for (std::size_t n : g->interior()) {
      const double x = g->coordinate(n)[0];
      EXPECT_LE(std::abs(l[n] + pi * pi * std::sin(pi * x)), bound);
    }
  }
}

TEST(Laplacian, SymmetricSemidefiniteWithZeroRowSums) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const GridPtr g = build_grid(DomainSpec::annulus(0.3, 1, 2), 1.0 / 16);
  const StencilOperator op(g);
  const std::size_t n = op.size();
  std::vector<double> x(n), y(n), ax(n), ay(n), ones(n, 1.0), a1(n);
  for (auto& v : x) v = nd(rng);
  for (auto& v : y) v = nd(rng);
  op.apply_negative_laplacian(x, ax);
  op.apply_negative_laplacian(y, ay);
  op.apply_negative_laplacian(ones, a1);
  double xay = 0, yax = 0, xax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xay += x[i] * ay[i];
    yax += y[i] * ax[i];
    xax += x[i] * ax[i];
  }
  EXPECT_NEAR(xay, yax, 1e-9 * std::abs(xay));
  EXPECT_GE(xax, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    bool deep = true;
    for (std::size_t s = 0; s < op.stencil_width(); ++s) deep = deep && op.neighbor(k, s) >= 0;
    if (deep) EXPECT_EQ(a1[k], 0.0);
  }
}

TEST(SolveLinear, TrivialCases) {
  const std::vector<double> zero(5, 0.0), rhs{1, 2, 3, 4, 5};
  MatrixAction id = [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
  EXPECT_EQ(solve_linear(id, zero, {}, 1e-12, 10), zero);
  const auto x = solve_linear(id, rhs, {}, 1e-12, 10);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x[i], rhs[i]);
}

TEST(SolveLinear, PoissonMatchesDenseElimination) {
  const double h = 1.0 / 18.0;  // 17 interior nodes on (0, 1)
  const GridPtr g = build_grid(DomainSpec::interval(0, 1), h);
  ASSERT_EQ(g->interior_count(), 17u);
  const StencilOperator op(g);
  const std::size_t n = op.size();
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = std::sin(3.0 * i) + 1.5;
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] = 2.0 / (h * h);
    if (i > 0) A[i][i - 1] = -1.0 / (h * h);
    if (i + 1 < n) A[i][i + 1] = -1.0 / (h * h);
  }
  const auto ref = dense_solve(A, rhs);
  MatrixAction act = [&](std::span<const double> x, std::span<double> y) { op.apply_negative_laplacian(x, y); };
  const std::vector<double> diag(n, op.center());
  LinearStats st;
  const auto x = solve_linear(act, rhs, diag, 1e-14, 1000, &st);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-10);
}

TEST(SolveLinear, ReportsNonConvergence) {
  const GridPtr g = build_grid(DomainSpec::interval(0, 1), 1.0 / 200);
  const StencilOperator op(g);
  std::vector<double> rhs(op.size(), 1.0);
  MatrixAction act = [&](std::span<const double> x, std::span<double> y) { op.apply_negative_laplacian(x, y); };
  EXPECT_EQ(code_of([&] { solve_linear(act, rhs, {}, 1e-14, 2); }), ErrorCode::no_convergence);
}

TEST(ScalarResolvent, MatchesBisection) {
  for (double q : {1.5, 2.0, 2.5, 3.0, 7.0})
    for (double tau : {1e-5, 1e-2, 1.0, 10.0})
      for (double b : {0.0, 1e-3, 1.0, 1e4, 1e12}) {
        const double y = scalar_resolvent(b, tau, q);
        EXPECT_NEAR(y, bisect(b, tau, q), 1e-12 * std::max(1.0, y)) << q << " " << tau << " " << b;
      }
}

TEST(ImplicitStep, ZeroIsFixed) {
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 32);
  const Field u = implicit_step(Field(g, 0.0), 0.1, 2.0, StencilOperator(g), StepperConfig{});
  EXPECT_EQ(max_norm(u), 0.0);
}

TEST(ImplicitStep, PeriodicConstantGoldenRatio) {
  const GridPtr g = build_grid(DomainSpec::periodic(0, 1), 1.0 / 8);
  const Field u = implicit_step(Field::constant_interior(g, 1.0), 1.0, 2.0, StencilOperator(g), StepperConfig{});
  for (std::size_t n : g->interior()) EXPECT_NEAR(u[n], (std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
}

TEST(ImplicitStep, PeriodicConstantMatchesBisection) {
  const GridPtr g = build_grid(DomainSpec::periodic(0, 2), 1.0 / 4);
  for (double q : {1.5, 2.0, 3.0})
    for (double k : {0.5, 3.0, 1e3})
      for (double tau : {1e-3, 0.1}) {
        const Field u = implicit_step(Field::constant_interior(g, k), tau, q, StencilOperator(g), StepperConfig{});
        const double ref = bisect(k, tau, q);
        for (std::size_t n : g->interior()) EXPECT_NEAR(u[n], ref, 1e-10 * ref);
      }
}

TEST(ImplicitStep, BelowScalarRootWithZeroBoundary) {
  const GridPtr g = build_grid(DomainSpec::ball(1, 2), 1.0 / 16);
  for (double k : {1.0, 100.0}) {
    const double tau = 1e-2, q = 2.0;
    const Field u = implicit_step(Field::constant_interior(g, k), tau, q, StencilOperator(g), StepperConfig{});
    const double root = bisect(k, tau, q);
    for (std::size_t n : g->interior()) EXPECT_LE(u[n], root * (1 + 1e-12));
  }
}

TEST(ImplicitStep, BackendsAgree) {
  std::mt19937_64 rng(3);
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 64);
  const Field u0 = random_field(g, rng, 10.0);
  StepperConfig a, b;
  b.backend = LinearBackend::krylov;
  const StencilOperator op(g);
  const Field ua = implicit_step(u0, 1e-2, 2.5, op, a);
  const Field ub = implicit_step(u0, 1e-2, 2.5, op, b);
  EXPECT_LE(l2_distance(ua, ub), 1e-10 * l2_norm(ua));
}

TEST(ImplicitStep, NewtonResidualsDecrease) {
  const GridPtr g = build_grid(DomainSpec::ball(1, 2), 1.0 / 16);
  NewtonStats st;
  implicit_step(Field::constant_interior(g, 50.0), 0.05, 3.0, StencilOperator(g), StepperConfig{}, &st);
  ASSERT_GE(st.residual_history.size(), 2u);
  for (std::size_t i = 1; i < st.residual_history.size(); ++i)
    EXPECT_LT(st.residual_history[i], st.residual_history[i - 1]);
}

class ResolventProperties : public ::testing::TestWithParam<int> {};

TEST_P(ResolventProperties, ContractionOrderEnergy) {
  std::mt19937_64 rng(1000 + GetParam());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double qs[] = {1.5, 2.0, 3.0};
  const double q = qs[GetParam() % 3];
  const DomainSpec d = GetParam() % 2 ? DomainSpec::interval(-1, 1) : DomainSpec::ball(1, 2);
  const GridPtr g = build_grid(d, d.dim == 1 ? 1.0 / 64 : 1.0 / 12);
  const StencilOperator op(g);
  const double tau = std::pow(10.0, -4.0 + 3.0 * unit(rng));
  const Field a = random_field(g, rng, 5.0);
  Field b = a;
  for (std::size_t n : g->interior()) b[n] += 3.0 * unit(rng);
  const Field c = random_field(g, rng, 5.0);
  const StepperConfig cfg;
  const Field sa = implicit_step(a, tau, q, op, cfg);
  const Field sb = implicit_step(b, tau, q, op, cfg);
  const Field sc = implicit_step(c, tau, q, op, cfg);
  EXPECT_LE(l2_distance(sa, sc), l2_distance(a, c) + 1e-10);
  for (std::size_t n : g->interior()) EXPECT_LE(sa[n], sb[n] + 1e-10);
  EXPECT_LE(energy(sa, q), energy(a, q));
}

INSTANTIATE_TEST_SUITE_P(Random, ResolventProperties, ::testing::Range(0, 12));

TEST(ImplicitStep, Errors) {
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 16);
  const GridPtr other = build_grid(DomainSpec::interval(-1, 1), 1.0 / 8);
  Field neg(g, 0.0);
  neg[g->interior()[3]] = -1.0;
  const StencilOperator op(g);
  EXPECT_EQ(code_of([&] { implicit_step(neg, 0.1, 2.0, op, StepperConfig{}); }), ErrorCode::negative_input);
  EXPECT_EQ(code_of([&] { implicit_step(Field(other, 1.0), 0.1, 2.0, op, StepperConfig{}); }),
            ErrorCode::grid_mismatch);
  StepperConfig capped;
  capped.newton_max_iter = 1;
  EXPECT_EQ(code_of([&] { implicit_step(Field::constant_interior(g, 1e6), 1.0, 3.0, op, capped); }),
            ErrorCode::newton_divergence);
  Field bad_b(g, 0.0);
  bad_b[g->dirichlet()[0]] = -1.0;
  EXPECT_EQ(code_of([&] { implicit_step(Field(g, 0.0), 0.1, 2.0, StencilOperator(g, bad_b), StepperConfig{}); }),
            ErrorCode::negative_input);
}

TEST(StepperConfig, ValidationAndRefinement) {
  StepperConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.tau(0), 1e-5);
  EXPECT_DOUBLE_EQ(c.tau(100000), c.tau_max);
  const StepperConfig r = c.refined();
  EXPECT_DOUBLE_EQ(r.tau0, c.tau0 / 2);
  EXPECT_DOUBLE_EQ(r.tau_max, c.tau_max / 2);
  EXPECT_DOUBLE_EQ(r.rho * r.rho, c.rho);
  for (auto mutate : std::vector<void (*)(StepperConfig&)>{
           [](StepperConfig& s) { s.damping = 0.0; }, [](StepperConfig& s) { s.damping = 1.5; },
           [](StepperConfig& s) { s.tau0 = 0.0; }, [](StepperConfig& s) { s.newton_atol = -1.0; },
           [](StepperConfig& s) { s.linear_max_iter = 0; }}) {
    StepperConfig bad;
    mutate(bad);
    EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::invalid_argument);
  }
}

TEST(Nonlinearity, SignedPower) {
  for (double q : {1.5, 2.0, 3.0, 4.25}) {
    for (double u : {0.0, 0.3, 2.0, 17.0}) {
      EXPECT_NEAR(power_nonlinearity(u, q), std::pow(u, q), 1e-12 * std::pow(u, q));
      EXPECT_DOUBLE_EQ(power_nonlinearity(-u, q), -power_nonlinearity(u, q));
      EXPECT_NEAR(power_derivative(u, q), q * std::pow(u, q - 1), 1e-12 * std::max(1.0, q * std::pow(u, q - 1)));
    }
  }
}

TEST(Stationary, ConstantBoundaryIsMonotoneInData) {
  const GridPtr g = build_grid(DomainSpec::interval(-1, 1), 1.0 / 64);
  Field b1(g, 0.0), b2(g, 0.0);
  for (std::size_t n : g->dirichlet()) {
    b1[n] = 1.0;
    b2[n] = 2.0;
  }
  const Field w1 = solve_stationary(StencilOperator(g, b1), 2.0, StepperConfig{});
  const Field w2 = solve_stationary(StencilOperator(g, b2), 2.0, StepperConfig{});
  for (std::size_t n : g->interior()) {
    EXPECT_GT(w1[n], 0.0);
    EXPECT_LT(w1[n], 1.0);
    EXPECT_LE(w1[n], w2[n]);
  }
  // residual of -w'' + w^2 = 0
  const Field lap = apply_laplacian(StencilOperator(g, b1), w1);
  for (std::size_t n : g->interior()) EXPECT_NEAR(-lap[n] + w1[n] * w1[n], 0.0, 1e-8);
}
