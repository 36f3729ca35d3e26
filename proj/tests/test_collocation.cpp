#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <random>

#include "pcmor/collocation.hpp"
#include "pcmor/galerkin.hpp"
#include "pcmor/models.hpp"

using namespace pcmor;

namespace {

// reaction model with the nonlinearity removed and an initial value that is
// affine in the parameters; its exact solution is affine in p, so both
// coupled formulations compute the same coefficients up to solver error
ParametricSystem linear_scrapie_variant() {
  ParametricSystem sys = scrapie_model();
  sys.F = nullptr;
  sys.F_jacobian = nullptr;
  sys.F_sparsity.clear();
  sys.A.terms.clear();
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = -1e-5;
  A(0, 1) = 0.1;
  A(1, 0) = 1e-5;
  A(1, 1) = -0.1;
  A(1, 2) = 2e-4;
  A(2, 2) = -1e-4;
  sys.A.terms.push_back({A, {}}); // parameter-independent dynamics
  sys.x0 = [](const Vector& p) {
    Vector x0(3);
    x0 << 1.0 + 100.0 * p[0], 10.0 * p[1], 0.1 + 1000.0 * p[3];
    return x0;
  };
  sys.t_end = 50.0;
  return sys;
}

} // namespace

TEST_CASE("coupled system shapes") {
  const ParametricSystem sys = scrapie_model();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 3);
  const QuadratureRule rule = tensor_rule(box, 3);
  const CollocationSystem csys = assemble_collocation(sys, spec, rule);

  CHECK(csys.dim() == 729);
  CHECK(csys.k() == 243);
  CHECK(csys.m() == 56);
  CHECK(csys.Chat[0].rows() == 56);
  CHECK(csys.Chat[0].cols() == 729);

  // strictly block diagonal dynamics
  const Matrix Ahat(csys.Ahat);
  for (Index l = 0; l < 5; ++l) {
    CHECK(Ahat.block(l * 3, l * 3, 3, 3).cwiseAbs().maxCoeff() > 0.0);
    if (l > 0) CHECK(Ahat.block(l * 3, 0, 3, 3).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single-node system reduces to the original model") {
  const ParametricSystem sys = scrapie_model();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 2);
  QuadratureRule rule;
  rule.box = box;
  rule.nodes = sys.nominal.transpose();
  rule.weights = Vector::Ones(1);
  const CollocationSystem csys = assemble_collocation(sys, spec, rule);
  CHECK(csys.dim() == 3);
  const Vector s = evaluate_basis(spec, sys.nominal);
  const Matrix C = sys.C.eval(sys.nominal);
  for (Index i = 0; i < spec.dim(); ++i)
    CHECK((csys.Chat[0].block(i, 0, 1, 3) - s[i] * C.row(0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((csys.x0hat - sys.x0(sys.nominal)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("output projection properties") {
  const ParametricSystem sys = scrapie_model();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 2);
  const QuadratureRule rule = tensor_rule(box, 3);
  const CollocationSystem csys = assemble_collocation(sys, spec, rule);

  SUBCASE("identical node states recover the mean only") {
    Vector x(3);
    x << 0.7, 0.2, 0.05;
    Vector xhat(csys.dim());
    for (Index l = 0; l < csys.k(); ++l) xhat.segment(l * 3, 3) = x;
    const Vector w = collocation_output(csys, xhat, 0);
    CHECK(w[0] == doctest::Approx(x[0]).epsilon(1e-13));
    CHECK(w.tail(w.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("degree-zero basis yields the plain expected output") {
    const BasisSpec mean_only(box, 0);
    const CollocationSystem c0 = assemble_collocation(sys, mean_only, rule);
    Vector xhat = Vector::Random(c0.dim());
    double expected = 0.0;
    for (Index l = 0; l < c0.k(); ++l) expected += rule.weights[l] * xhat[l * 3 + 0];
    CHECK(collocation_output(c0, xhat, 0)[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("output map is linear in the weights") {
    QuadratureRule doubled = rule;
    doubled.weights *= 2.0;
    const CollocationSystem c2 = assemble_collocation(sys, spec, doubled);
    CHECK((c2.Chat[0] - 2.0 * csys.Chat[0]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("decoupling: the coupled solve reproduces independent node solves") {
  const ParametricSystem sys = scrapie_model();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 1);
  const QuadratureRule rule = tensor_rule(box, 2); // 32 nodes keeps this quick
  const CollocationSystem csys = assemble_collocation(sys, spec, rule);

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  const std::vector<double> grid = uniform_grid(0.0, 500.0, 60);

  const Trajectory coupled = integrate(csys.to_implicit(), {0.0, 500.0}, csys.x0hat, cfg);
  const Matrix coupled_vals = interpolate(coupled, grid);
  const Matrix independent = solve_collocation_nodes(csys, cfg, grid);

  for (Index l = 0; l < csys.k(); ++l) {
    const Matrix diff = coupled_vals.middleRows(l * 3, 3) - independent.middleRows(l * 3, 3);
    // both carry their own integration error; stay within a few tolerances
    CHECK(diff.cwiseAbs().maxCoeff() < 5e-5);
  }
}

TEST_CASE("linear variant: collocation and spectral projection agree") {
  const ParametricSystem sys = linear_scrapie_variant();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 2);
  const QuadratureRule rule = tensor_rule(box, 3);

  const GalerkinSystem gal = assemble_galerkin(sys, spec, rule);
  const CollocationSystem col = assemble_collocation(sys, spec, rule);

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-11;
  const std::vector<double> grid = uniform_grid(0.0, 50.0, 40);

  const Trajectory tg = integrate(gal.to_implicit(), {0.0, 50.0}, gal.v0, cfg);
  const Trajectory tc = integrate(col.to_implicit(), {0.0, 50.0}, col.x0hat, cfg);

  for (Index o = 0; o < 3; ++o) {
    const Matrix wg = gal.Chat[static_cast<size_t>(o)] * interpolate(tg, grid);
    const Matrix wc = col.Chat[static_cast<size_t>(o)] * interpolate(tc, grid);
    CHECK((wg - wc).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("node solutions cached and reused") {
  const ParametricSystem sys = scrapie_model();
  const ParameterBox box = ParameterBox::relative(sys.nominal, 10.0);
  const BasisSpec spec(box, 1);
  QuadratureRule rule;
  rule.box = box;
  rule.nodes.resize(2, 5);
  rule.nodes.row(0) = sys.nominal.transpose();
  rule.nodes.row(1) = (sys.nominal * 1.05).transpose();
  rule.weights = Vector::Constant(2, 0.5);
  const CollocationSystem csys = assemble_collocation(sys, spec, rule);

  const std::string cache = "/tmp/pcmor_node_cache";
  std::filesystem::remove_all(cache);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  const std::vector<double> grid = uniform_grid(0.0, 100.0, 20);
  const Matrix first = solve_collocation_nodes(csys, cfg, grid, cache);
  CHECK(std::filesystem::exists(cache));
  size_t files = 0;
  for (auto& entry : std::filesystem::directory_iterator(cache)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 2);
  const Matrix second = solve_collocation_nodes(csys, cfg, grid, cache);
  CHECK((first - second).cwiseAbs().maxCoeff() == 0.0);
}
