#include <doctest.h>

#include <cmath>

#include "pcmor/errors.hpp"
#include "pcmor/models.hpp"
#include "pcmor/timeint.hpp"

using namespace pcmor;

namespace {

ImplicitSystem scalar_decay() {
  ImplicitSystem sys;
  sys.dim = 1;
  Matrix a(1, 1);
  a << -1.0;
  sys.mass = Matrix::Identity(1, 1).sparseView();
  sys.linear = a.sparseView();
  sys.mass_is_identity = true;
  return sys;
}

// x' = -x + sin(3t), smooth forced problem with known solution through
// variation of constants; x(0) = 1
double forced_solution(double t) {
  // particular solution (sin(3t) - 3cos(3t))/10
  const double part = (std::sin(3.0 * t) - 3.0 * std::cos(3.0 * t)) / 10.0;
  const double c = 1.0 - (-3.0 / 10.0);
  return c * std::exp(-t) + part;
}

ImplicitSystem forced_problem() {
  ImplicitSystem sys;
  sys.dim = 1;
  Matrix a(1, 1);
  a << -1.0;
  sys.mass = Matrix::Identity(1, 1).sparseView();
  sys.linear = a.sparseView();
  sys.mass_is_identity = true;
  sys.input_matrix = Matrix::Identity(1, 1);
  sys.input = [](double t) { return Vector::Constant(1, std::sin(3.0 * t)); };
  return sys;
}

double fixed_step_error(Method method, int max_order, double h) {
  IntegratorConfig cfg;
  cfg.method = method;
  cfg.max_order = max_order;
  cfg.fixed_step = h;
  cfg.newton_tol = 1e-7;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-12;
  if (method == Method::bdf && max_order > 1) {
    // seed the multistep history with exact values so the measured rate is
    // the method's, not the startup's
    for (int j = max_order - 1; j >= 1; --j)
      cfg.warm_start.emplace_back(-j * h, Vector::Constant(1, forced_solution(-j * h)));
  }
  const Trajectory traj =
      integrate(forced_problem(), {0.0, 2.0}, Vector::Constant(1, forced_solution(0.0)), cfg);
  return std::abs(traj.states(0, traj.points() - 1) - forced_solution(2.0));
}

} // namespace

TEST_CASE("trapezoidal scalar decay hits e^{-1}") {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  const Trajectory traj = integrate(scalar_decay(), {0.0, 1.0}, Vector::Ones(1), cfg);
  CHECK(std::abs(traj.states(0, traj.points() - 1) - std::exp(-1.0)) < 10.0 * cfg.rel_tol);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fixed-step convergence rates") {
  SUBCASE("trapezoidal halving gains a factor of about four") {
    const double e1 = fixed_step_error(Method::trapezoidal, 0, 0.02);
    const double e2 = fixed_step_error(Method::trapezoidal, 0, 0.01);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  }
  SUBCASE("implicit Euler halving gains a factor of about two") {
    const double e1 = fixed_step_error(Method::bdf, 1, 0.02);
    const double e2 = fixed_step_error(Method::bdf, 1, 0.01);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("second and third order multistep rates") {
    const double e1 = fixed_step_error(Method::bdf, 2, 0.02);
    const double e2 = fixed_step_error(Method::bdf, 2, 0.01);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.3));
    const double f1 = fixed_step_error(Method::bdf, 3, 0.01);
    const double f2 = fixed_step_error(Method::bdf, 3, 0.005);
    CHECK(f1 / f2 == doctest::Approx(8.0).epsilon(0.35));
    const double g1 = fixed_step_error(Method::bdf, 4, 0.04);
    const double g2 = fixed_step_error(Method::bdf, 4, 0.02);
    CHECK(g1 / g2 == doctest::Approx(16.0).epsilon(0.3));
  }
}

TEST_CASE("dense output") {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-10;
  const Trajectory traj = integrate(scalar_decay(), {0.0, 1.0}, Vector::Ones(1), cfg);

  SUBCASE("the integrator's own grid returns stored states") {
    const std::vector<double> grid(traj.times.begin(), traj.times.end());
    const Matrix vals = interpolate(traj, grid);
    for (Index c = 0; c < traj.points(); ++c) CHECK(vals(0, c) == traj.states(0, c));
  }
  SUBCASE("linear solutions are reproduced anywhere") {
    ImplicitSystem sys;
    sys.dim = 1;
    sys.mass = Matrix::Identity(1, 1).sparseView();
    sys.linear = Matrix::Zero(1, 1).sparseView();
    sys.mass_is_identity = true;
    sys.input_matrix = Matrix::Identity(1, 1);
    sys.input = [](double) { return Vector::Constant(1, 2.0); }; // x' = 2
    const Trajectory lin = integrate(sys, {0.0, 1.0}, Vector::Zero(1), cfg);
    for (double t : {0.137, 0.41, 0.77}) {
      CHECK(interpolate_at(lin, t)[0] == doctest::Approx(2.0 * t).epsilon(1e-12));
    }
  }
  SUBCASE("extrapolation is rejected") {
    CHECK_THROWS_AS(interpolate_at(traj, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_at(traj, 1.5), std::invalid_argument);
  }
  SUBCASE("interpolation error matches the local order") {
    for (double t : {0.1, 0.55, 0.93})
      CHECK(interpolate_at(traj, t)[0] == doctest::Approx(std::exp(-t)).epsilon(1e-6));
  }
}

TEST_CASE("deterministic step sequences") {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-5;
  cfg.abs_tol = 1e-8;
  const Trajectory a = integrate(forced_problem(), {0.0, 3.0}, Vector::Ones(1), cfg);
  const Trajectory b = integrate(forced_problem(), {0.0, 3.0}, Vector::Ones(1), cfg);
  REQUIRE(a.points() == b.points());
  for (size_t i = 0; i < a.times.size(); ++i) CHECK(a.times[i] == b.times[i]);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step-size underflow surfaces as a typed error") {
  // x' = x^2 from x(0) = 1 blows up at t = 1; integrating across it must
  // fail with the last good time attached
  ImplicitSystem sys;
  sys.dim = 1;
  sys.mass = Matrix::Identity(1, 1).sparseView();
  sys.linear = Matrix::Zero(1, 1).sparseView();
  sys.mass_is_identity = true;
  sys.nonlinearity = [](const Vector& x) { return Vector(x.array().square().matrix()); };
  sys.nonlin_jacobian = [](const Vector& x) { return Matrix(2.0 * x.asDiagonal()); };
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  cfg.method = Method::bdf;
  try {
    integrate(sys, {0.0, 2.0}, Vector::Ones(1), cfg);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.last_time() > 0.8);
    CHECK(e.last_time() < 1.05);
  }
}

TEST_CASE("index-1 system with a singular mass matrix") {
  // x1' = -x1, 0 = x1 - x2
  ImplicitSystem sys;
  sys.dim = 2;
  Matrix e(2, 2), a(2, 2);
  e << 1, 0, 0, 0;
  a << -1, 0, 1, -1;
  sys.mass = e.sparseView();
  sys.linear = a.sparseView();
  IntegratorConfig cfg;
  cfg.method = Method::bdf;
  cfg.rel_tol = 1e-7;
  cfg.abs_tol = 1e-10;
  Vector init(2);
  init << 1.0, 1.0;
  const Trajectory traj = integrate(sys, {0.0, 1.0}, init, cfg);
  const Vector xe = interpolate_at(traj, 1.0);
  CHECK(xe[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
  CHECK(xe[1] == doctest::Approx(xe[0]).epsilon(1e-9));
  // the algebraic equation holds at every accepted point
  for (Index c = 0; c < traj.points(); ++c)
    CHECK(std::abs(traj.states(0, c) - traj.states(1, c)) < 1e-8);
}

TEST_CASE("amplifier transient at constant parameters") {
  const ParametricSystem amp = transistor_amplifier_model();
  const Vector p = amp.nominal;
  ImplicitSystem sys;
  sys.dim = 5;
  sys.mass = amp.E.eval(p).sparseView();
  sys.linear = amp.A.eval(p).sparseView();
  sys.input_matrix = amp.B.eval(p);
  sys.input = amp.input;
  sys.nonlinearity = [&](const Vector& x) { return amp.F(x, p); };
  sys.nonlin_jacobian = [&](const Vector& x) { return amp.F_jacobian(x, p); };

  IntegratorConfig cfg;
  cfg.method = Method::bdf;
  cfg.rel_tol = 1e-5;
  cfg.abs_tol = 1e-8;
  const Vector x0 = consistent_init(amp, p);
  const Trajectory traj = integrate(sys, {0.0, 0.03}, x0, cfg);

  // output waveform: amplified and distorted relative to the 0.4 V input
  double umin = 0.0, umax = 0.0;
  for (Index c = 0; c < traj.points(); ++c) {
    umin = std::min(umin, traj.states(4, c));
    umax = std::max(umax, traj.states(4, c));
  }
  CHECK(umax - umin > 2.0 * 0.8);               // gain well above one
  CHECK(std::abs(umax + umin) > 0.05 * (umax - umin)); // asymmetric clipping

  // adaptive order control actually raised the order
  int max_used = 0;
  for (int o : traj.orders) max_used = std::max(max_used, o);
  CHECK(max_used >= 2);

  // tighter tolerances stay close to this solution
  IntegratorConfig tight = cfg;
  tight.rel_tol = 1e-7;
  tight.abs_tol = 1e-10;
  const Trajectory ref = integrate(sys, {0.0, 0.03}, x0, tight);
  const std::vector<double> grid = uniform_grid(0.001, 0.03, 50);
  const Matrix va = interpolate(traj, grid), vb = interpolate(ref, grid);
  CHECK((va.row(4) - vb.row(4)).cwiseAbs().maxCoeff() < 2e-2);
}

TEST_CASE("trajectory serialization round-trip") {
  IntegratorConfig cfg;
  const Trajectory traj = integrate(forced_problem(), {0.0, 1.0}, Vector::Ones(1), cfg);
  write_trajectory_csv(traj, "/tmp/pcmor_traj.csv");
  write_trajectory_binary(traj, "/tmp/pcmor_traj.bin");
  const Trajectory back = read_trajectory_binary("/tmp/pcmor_traj.bin");
  REQUIRE(back.points() == traj.points());
  CHECK((back.states - traj.states).cwiseAbs().maxCoeff() == 0.0);
  for (size_t i = 0; i < traj.times.size(); ++i) CHECK(back.times[i] == traj.times[i]);
}
