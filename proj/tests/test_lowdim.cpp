#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <random>

#include "pcmor/errors.hpp"
#include "pcmor/lowdim.hpp"
#include "pcmor/quadrature.hpp"

using namespace pcmor;

namespace {

Representation random_phi_rep(Index m, Index t_count, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Representation rep;
  rep.tag = BasisTag::phi;
  rep.times = uniform_grid(0.0, 1.0, t_count);
  rep.coeffs.resize(m, t_count);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < t_count; ++j) rep.coeffs(i, j) = dist(gen);
  return rep;
}

} // namespace

TEST_CASE("best approximation") {
  std::mt19937 gen(83);
  std::normal_distribution<double> dist;

  SUBCASE("targets inside the span are reproduced exactly") {
    Matrix cbar(6, 2);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 2; ++j) cbar(i, j) = dist(gen);
    Representation fom;
    fom.tag = BasisTag::phi;
    fom.times = uniform_grid(0.0, 1.0, 5);
    Matrix w(2, 5);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 5; ++j) w(i, j) = dist(gen);
    fom.coeffs = cbar * w;
    const Representation best = best_approximation(fom, cbar);
    CHECK((best.coeffs - w).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((to_phi(best).coeffs - fom.coeffs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("orthonormal columns collapse to a transpose product") {
    Matrix raw(8, 3);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 3; ++j) raw(i, j) = dist(gen);
    const Matrix Q =
        Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(8, 3);
    const Representation fom = random_phi_rep(8, 7, 89);
    const Representation best = best_approximation(fom, Q);
    CHECK((best.coeffs - Q.transpose() * fom.coeffs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random instance against the normal-equation oracle") {
    Matrix cbar(8, 3);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 3; ++j) cbar(i, j) = dist(gen);
    const Representation fom = random_phi_rep(8, 9, 97);
    const Representation best = best_approximation(fom, cbar);
    const Matrix normal = (cbar.transpose() * cbar).inverse() * cbar.transpose() * fom.coeffs;
    CHECK((best.coeffs - normal).cwiseAbs().maxCoeff() < 1e-12);
    // residual orthogonality
    const Matrix resid = fom.coeffs - cbar * best.coeffs;
    CHECK((cbar.transpose() * resid).cwiseAbs().maxCoeff() <
          1e-10 * fom.coeffs.cwiseAbs().maxCoeff());
  }
  SUBCASE("rank deficiency raises the typed error") {
    Matrix cbar(6, 3);
    for (Index i = 0; i < 6; ++i) cbar(i, 0) = dist(gen);
    cbar.col(1) = 2.0 * cbar.col(0);
    for (Index i = 0; i < 6; ++i) cbar(i, 2) = dist(gen);
    const Representation fom = random_phi_rep(6, 4, 101);
    CHECK_THROWS_AS(best_approximation(fom, cbar), RankDeficiencyError);
    try {
      best_approximation(fom, cbar);
    } catch (const RankDeficiencyError& e) {
      CHECK(std::string(e.what()).find("orthonormalize_basis") != std::string::npos);
      CHECK(e.rank() == 2);
    }
  }
  SUBCASE("optimality beats any other element of the subspace") {
    Matrix cbar(10, 4);
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 4; ++j) cbar(i, j) = dist(gen);
    const Representation fom = random_phi_rep(10, 6, 103);
    const Representation best = best_approximation(fom, cbar);
    for (int rep = 0; rep < 20; ++rep) {
      Matrix other(4, 6);
      for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 6; ++j) other(i, j) = dist(gen);
      for (Index t = 0; t < 6; ++t) {
        const double opt = (fom.coeffs.col(t) - cbar * best.coeffs.col(t)).norm();
        const double alt = (fom.coeffs.col(t) - cbar * other.col(t)).norm();
        CHECK(opt <= alt + 1e-12);
      }
    }
  }
}

TEST_CASE("orthonormalization of the reduced basis") {
  std::mt19937 gen(107);
  std::normal_distribution<double> dist;

  SUBCASE("already orthonormal stays orthonormal with full rank") {
    Matrix raw(7, 3);
    for (Index i = 0; i < 7; ++i)
      for (Index j = 0; j < 3; ++j) raw(i, j) = dist(gen);
    const Matrix Q =
        Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(7, 3);
    const auto [Q2, rank] = orthonormalize_basis(Q);
    CHECK(rank == 3);
    CHECK((Q2.transpose() * Q2 - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-13);
    // same span
    CHECK((Q2 * (Q2.transpose() * Q) - Q).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("duplicated column loses one dimension") {
    Matrix cbar(5, 3);
    for (Index i = 0; i < 5; ++i) {
      cbar(i, 0) = dist(gen);
      cbar(i, 2) = dist(gen);
    }
    cbar.col(1) = cbar.col(0);
    const auto [Q, rank] = orthonormalize_basis(cbar);
    CHECK(rank == 2);
    CHECK(Q.cols() == 2);
  }
  SUBCASE("coefficient orthonormality transports to the function space") {
    // Gram of the new basis functions, evaluated by quadrature
    ParameterBox box(Vector::Constant(2, 1.0), Vector::Constant(2, 2.0),
                     Vector::Constant(2, 1.5));
    const BasisSpec spec(box, 2);
    const Index m = spec.dim();
    Matrix cbar(m, 3);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < 3; ++j) cbar(i, j) = dist(gen);
    const auto [Q, rank] = orthonormalize_basis(cbar);
    REQUIRE(rank == 3);
    const QuadratureRule rule = tensor_rule(box, 4);
    Matrix gram = Matrix::Zero(3, 3);
    for (Index l = 0; l < rule.size(); ++l) {
      const Vector s = evaluate_basis(spec, rule.nodes.row(l).transpose());
      const Vector psi = Q.transpose() * s;
      gram += rule.weights[l] * (psi * psi.transpose());
    }
    CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pointwise output evaluation") {
  ParameterBox box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), Vector::Zero(1));
  const BasisSpec spec(box, 2);

  SUBCASE("constant-only representations ignore the parameter") {
    Representation rep;
    rep.tag = BasisTag::phi;
    rep.times = {0.0, 1.0};
    rep.coeffs = Matrix::Zero(3, 2);
    rep.coeffs(0, 0) = 2.0;
    rep.coeffs(0, 1) = 4.0;
    CHECK(evaluate_qoi(rep, spec, 0.5, Vector::Constant(1, -0.3)) == doctest::Approx(3.0));
    CHECK(evaluate_qoi(rep, spec, 0.5, Vector::Constant(1, 0.9)) == doctest::Approx(3.0));
  }
  SUBCASE("quadrature recovers the mean trajectory") {
    Representation rep;
    rep.tag = BasisTag::phi;
    rep.times = uniform_grid(0.0, 1.0, 4);
    rep.coeffs = Matrix::Random(3, 4);
    Representation mean_only = rep; // first coefficient is the mean
    mean_only.coeffs.bottomRows(2).setZero();
    const QuadratureRule rule = tensor_rule(box, 3);
    for (double t : {0.0, 0.4, 1.0}) {
      double mean = 0.0;
      for (Index l = 0; l < rule.size(); ++l)
        mean += rule.weights[l] * evaluate_qoi(rep, spec, t, rule.nodes.row(l).transpose());
      const double expected = evaluate_qoi(mean_only, spec, t, Vector::Zero(1));
      CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("reduced and full routes agree") {
    std::mt19937 gen(109);
    std::normal_distribution<double> dist;
    Matrix cbar(3, 2);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j) cbar(i, j) = dist(gen);
    Representation red;
    red.tag = BasisTag::psi;
    red.cbar = cbar;
    red.times = uniform_grid(0.0, 1.0, 5);
    red.coeffs = Matrix::Random(2, 5);
    const Representation full = to_phi(red);
    for (double t : {0.1, 0.7})
      for (double pv : {-0.8, 0.2, 1.0}) {
        const Vector p = Vector::Constant(1, pv);
        CHECK(evaluate_qoi(red, spec, t, p) ==
              doctest::Approx(evaluate_qoi(full, spec, t, p)).epsilon(1e-13));
      }
  }
  SUBCASE("time extrapolation is rejected") {
    Representation rep;
    rep.tag = BasisTag::phi;
    rep.times = {0.0, 1.0};
    rep.coeffs = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(evaluate_qoi(rep, spec, 2.0, Vector::Zero(1)), std::invalid_argument);
  }
}

TEST_CASE("function-space distance equals the coefficient distance") {
  // Parseval: the quadrature integral of the squared difference matches the
  // coefficient two-norm for orthonormal bases
  ParameterBox box(Vector::Constant(2, 0.5), Vector::Constant(2, 1.5),
                   Vector::Constant(2, 1.0));
  const BasisSpec spec(box, 2);
  const QuadratureRule rule = tensor_rule(box, 4);
  std::mt19937 gen(113);
  std::normal_distribution<double> dist;
  const Index m = spec.dim();
  Vector wa(m), wb(m);
  for (Index i = 0; i < m; ++i) {
    wa[i] = dist(gen);
    wb[i] = dist(gen);
  }
  double quad = 0.0;
  for (Index l = 0; l < rule.size(); ++l) {
    const Vector s = evaluate_basis(spec, rule.nodes.row(l).transpose());
    const double diff = s.dot(wa - wb);
    quad += rule.weights[l] * diff * diff;
  }
  CHECK(std::sqrt(quad) == doctest::Approx((wa - wb).norm()).epsilon(1e-10));
}

TEST_CASE("representation csv export") {
  Representation rep;
  rep.tag = BasisTag::psi;
  rep.times = uniform_grid(0.0, 1.0, 3);
  rep.coeffs = Matrix::Ones(2, 3);
  rep.cbar = Matrix::Identity(4, 2);
  write_representation_csv(rep, "/tmp/pcmor_rep.csv", "/tmp/pcmor_rep_cbar.csv");
  std::ifstream in("/tmp/pcmor_rep.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,w1,w2");
  std::ifstream cin("/tmp/pcmor_rep_cbar.csv");
  CHECK(cin.good());
}
