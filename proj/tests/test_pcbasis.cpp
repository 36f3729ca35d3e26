#include <doctest.h>

#include <cmath>
#include <random>

#include "pcmor/pcbasis.hpp"
#include "pcmor/quadrature.hpp"

using namespace pcmor;

namespace {

ParameterBox unit_box(Index q) {
  return ParameterBox(Vector::Constant(q, -1.0), Vector::Constant(q, 1.0), Vector::Zero(q));
}

} // namespace

TEST_CASE("basis_dimension counts total-degree polynomials") {
  CHECK(basis_dimension(5, 3) == 56);
  CHECK(basis_dimension(10, 3) == 286);
  CHECK(basis_dimension(1, 0) == 1);
  CHECK(basis_dimension(7, 0) == 1);
  CHECK(basis_dimension(2, 4) == 15);
  CHECK_THROWS_AS(basis_dimension(400, 200), std::overflow_error);
  CHECK_THROWS_AS(basis_dimension(0, 1), std::invalid_argument);
}

TEST_CASE("multi-index set is graded, zero-first, and matches the count") {
  for (Index q : {1, 2, 5}) {
    for (Index d : {0, 1, 3}) {
      const MultiIndexSet set = MultiIndexSet::total_degree(q, d);
      CHECK(set.size() == basis_dimension(q, d));
      CHECK(set.indices.row(0).sum() == 0);
      int last_degree = 0;
      for (Index i = 0; i < set.size(); ++i) {
        const int deg = set.indices.row(i).sum();
        CHECK(deg >= last_degree); // graded
        CHECK(deg <= d);
        last_degree = deg;
      }
    }
  }
  // deterministic ordering across invocations
  const MultiIndexSet a = MultiIndexSet::total_degree(4, 3);
  const MultiIndexSet b = MultiIndexSet::total_degree(4, 3);
  CHECK((a.indices - b.indices).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("basis values at the midpoint and at the upper bound") {
  ParameterBox box(Vector::Constant(1, 2.0), Vector::Constant(1, 6.0), Vector::Constant(1, 4.0));

  const BasisSpec lin(box, 1);
  const Vector mid = evaluate_basis(lin, Vector::Constant(1, 4.0));
  CHECK(mid[0] == 1.0);
  CHECK(mid[1] == doctest::Approx(0.0).epsilon(1e-15));

  const BasisSpec quad(box, 2);
  const Vector top = evaluate_basis(quad, Vector::Constant(1, 6.0));
  CHECK(top[0] == 1.0);
  CHECK(top[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(top[2] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("multivariate values factor into univariate products") {
  ParameterBox box(Vector::Constant(2, 0.5), Vector::Constant(2, 1.5), Vector::Constant(2, 1.0));
  const BasisSpec spec(box, 2);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  for (int rep = 0; rep < 25; ++rep) {
    Vector p(2);
    p << dist(gen), dist(gen);
    const Vector s = evaluate_basis(spec, p);
    const Vector z = spec.box.to_unit(p);
    const Vector u0 = legendre_orthonormal(2, z[0]), u1 = legendre_orthonormal(2, z[1]);
    for (Index i = 0; i < spec.dim(); ++i) {
      const double expected = u0[spec.index_set.indices(i, 0)] * u1[spec.index_set.indices(i, 1)];
      CHECK(s[i] == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("first basis function is one everywhere") {
  ParameterBox box = unit_box(3);
  const BasisSpec spec(box, 3);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector p(3);
    p << dist(gen), dist(gen), dist(gen);
    CHECK(evaluate_basis(spec, p)[0] == 1.0);
  }
}

TEST_CASE("points outside the box are rejected") {
  ParameterBox box = unit_box(2);
  const BasisSpec spec(box, 1);
  Vector p(2);
  p << 0.0, 1.5;
  CHECK_THROWS_AS(evaluate_basis(spec, p), std::invalid_argument);
  p << -1.0, 1.0; // boundary is fine
  CHECK_NOTHROW(evaluate_basis(spec, p));
}

TEST_CASE("gram matrix under exact and inexact rules") {
  SUBCASE("one parameter, degree 2, 3-point rule is exact") {
    ParameterBox box = unit_box(1);
    const BasisSpec spec(box, 2);
    const Matrix G = gram_matrix(spec, tensor_rule(box, 3));
    CHECK((G - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("degree 0 with any normalized rule") {
    ParameterBox box = unit_box(2);
    const BasisSpec spec(box, 0);
    const Matrix G = gram_matrix(spec, tensor_rule(box, 2));
    CHECK(G.rows() == 1);
    CHECK(G(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("five parameters, degree 3: 3 points per axis fail, 4 succeed") {
    ParameterBox box = unit_box(5);
    const BasisSpec spec(box, 3);
    const Matrix G3 = gram_matrix(spec, tensor_rule(box, 3));
    const Matrix G4 = gram_matrix(spec, tensor_rule(box, 4));
    const Index m = spec.dim();
    // pairwise products reach per-axis degree 6; three Gauss points resolve
    // only degree 5, and the degree-3 factors vanish at the 3-point nodes
    CHECK((G3 - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 0.5);
    CHECK((G4 - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("evaluation is deterministic across runs") {
  ParameterBox box(Vector::Constant(3, 1.0), Vector::Constant(3, 3.0), Vector::Constant(3, 2.0));
  const BasisSpec spec(box, 3);
  Vector p(3);
  p << 1.25, 2.5, 2.9;
  const Vector a = evaluate_basis(spec, p);
  const Vector b = evaluate_basis(spec, p);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
