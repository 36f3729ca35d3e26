#include "pcmor/models.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pcmor {

ParametricMatrix ParametricMatrix::constant(Matrix value) {
  ParametricMatrix pm;
  pm.rows = value.rows();
  pm.cols = value.cols();
  pm.terms.push_back(MatrixTerm{std::move(value), {}});
  return pm;
}

ParametricMatrix ParametricMatrix::zero(Index rows, Index cols) {
  ParametricMatrix pm;
  pm.rows = rows;
  pm.cols = cols;
  return pm;
}

double factor_product(const std::vector<ParamFactor>& factors, const Vector& p) {
  double v = 1.0;
  for (const auto& f : factors) {
    const double pv = p[f.axis];
    v *= (f.kind == ParamFactor::Kind::value) ? pv : 1.0 / pv;
  }
  return v;
}

Matrix ParametricMatrix::eval(const Vector& p) const {
  if (general) return general(p);
  Matrix out = Matrix::Zero(rows, cols);
  for (const auto& term : terms) out += factor_product(term.factors, p) * term.matrix;
  return out;
}

Vector eval_rhs(const ParametricSystem& sys, double t, const Vector& x, const Vector& p) {
  Vector rhs = sys.A.eval(p) * x;
  if (sys.F) {
    const Vector fx = sys.F(x, p);
    if (!fx.allFinite())
      throw std::runtime_error("eval_rhs: nonlinearity not finite at state ||x||_inf = " +
                               std::to_string(x.lpNorm<Eigen::Infinity>()));
    rhs += fx;
  }
  if (sys.n_in > 0 && sys.input) rhs += sys.B.eval(p) * sys.input(t);
  return rhs;
}

Matrix nonlinearity_jacobian(const ParametricSystem& sys, const Vector& x, const Vector& p) {
  if (!sys.F) return Matrix::Zero(sys.n, sys.n);
  if (sys.F_jacobian) return sys.F_jacobian(x, p);
  // central differences, restricted to the declared sparsity when present
  Matrix jac = Matrix::Zero(sys.n, sys.n);
  std::vector<bool> touch(static_cast<size_t>(sys.n), sys.F_sparsity.empty());
  for (const auto& [r, c] : sys.F_sparsity) touch[static_cast<size_t>(c)] = true;
  Vector xp = x, xm = x;
  for (Index j = 0; j < sys.n; ++j) {
    if (!touch[static_cast<size_t>(j)]) continue;
    const double h = std::sqrt(1e-16) * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (sys.F(xp, p) - sys.F(xm, p)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

Vector consistent_init(const ParametricSystem& sys, const Vector& p,
                       const ConsistencyOptions& opts) {
  Vector guess = sys.x0(p);
  if (!sys.is_dae) return guess;

  const Matrix E = sys.E.eval(p);
  Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cutoff = 1e-12 * svd.singularValues()[0];
  Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()[rank] > cutoff) ++rank;
  const Index nullity = sys.n - rank;
  if (nullity == 0) return guess;

  const Matrix N = svd.matrixV().rightCols(nullity); // null space of E
  const Matrix W = svd.matrixU().rightCols(nullity); // left null space

  auto residual = [&](const Vector& x) -> Vector {
    return W.transpose() * eval_rhs(sys, sys.t_start, x, p);
  };

  Vector x = guess;
  Vector g = residual(x);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.tol) return x;
    const Matrix J =
        W.transpose() * (sys.A.eval(p) + nonlinearity_jacobian(sys, x, p)) * N;
    const Vector step = J.fullPivLu().solve(-g);
    double damping = 1.0;
    for (int half = 0; half < 40; ++half) {
      const Vector trial = x + damping * (N * step);
      Vector gt;
      bool ok = true;
      try {
        gt = residual(trial);
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && gt.allFinite() && (gt.norm() < g.norm() || gt.lpNorm<Eigen::Infinity>() <= opts.tol)) {
        x = trial;
        g = gt;
        break;
      }
      damping *= 0.5;
      if (half == 39)
        throw std::runtime_error("consistent_init: damped Newton made no progress");
    }
  }
  if (g.lpNorm<Eigen::Infinity>() <= opts.tol) return x;
  throw std::runtime_error("consistent_init: Newton did not converge within " +
                           std::to_string(opts.max_iter) + " iterations");
}

ParametricSystem scrapie_model() {
  ParametricSystem sys;
  sys.name = "scrapie";
  sys.n = 3;
  sys.n_in = 0;
  sys.n_out = 3;
  sys.is_dae = false;
  sys.nominal = (Vector(5) << 1e-5, 0.1, 1.0, 1e-4, 0.1).finished();
  sys.t_start = 0.0;
  sys.t_end = 500.0;

  sys.E = ParametricMatrix::constant(Matrix::Identity(3, 3));

  // first-order terms: p1, p2 exchange x1 <-> x2, p4 feeds x3 back
  sys.A.rows = sys.A.cols = 3;
  Matrix a1 = Matrix::Zero(3, 3);
  a1(0, 0) = -1.0;
  a1(1, 0) = 1.0;
  sys.A.terms.push_back({a1, {{0, ParamFactor::Kind::value}}});
  Matrix a2 = Matrix::Zero(3, 3);
  a2(0, 1) = 1.0;
  a2(1, 1) = -1.0;
  sys.A.terms.push_back({a2, {{1, ParamFactor::Kind::value}}});
  Matrix a4 = Matrix::Zero(3, 3);
  a4(1, 2) = 2.0;
  a4(2, 2) = -1.0;
  sys.A.terms.push_back({a4, {{3, ParamFactor::Kind::value}}});

  sys.B = ParametricMatrix::zero(3, 0);
  sys.C = ParametricMatrix::constant(Matrix::Identity(3, 3));

  sys.F = [](const Vector& x, const Vector& p) -> Vector {
    const double quad = p[2] * x[1] * x[1];
    const double bil = p[4] * x[0] * x[2];
    return (Vector(3) << -bil, -2.0 * quad + bil, quad).finished();
  };
  sys.F_jacobian = [](const Vector& x, const Vector& p) -> Matrix {
    Matrix jac = Matrix::Zero(3, 3);
    jac(0, 0) = -p[4] * x[2];
    jac(0, 2) = -p[4] * x[0];
    jac(1, 0) = p[4] * x[2];
    jac(1, 1) = -4.0 * p[2] * x[1];
    jac(1, 2) = p[4] * x[0];
    jac(2, 1) = 2.0 * p[2] * x[1];
    return jac;
  };
  sys.F_sparsity = {{0, 0}, {0, 2}, {1, 0}, {1, 1}, {1, 2}, {2, 1}};

  sys.x0 = [](const Vector&) { return (Vector(3) << 1.0, 0.0, 0.1).finished(); };
  return sys;
}

namespace {
constexpr double kAmpAlpha = 0.99;
constexpr double kAmpBeta = 1e-6;
constexpr double kAmpUF = 0.026;
constexpr double kAmpPeriod = 0.01;
} // namespace

ParametricSystem transistor_amplifier_model() {
  // parameter layout: (C1, C2, C3, R0, R1, R2, R3, R4, R5, Uop)
  ParametricSystem sys;
  sys.name = "transistor_amplifier";
  sys.n = 5;
  sys.n_in = 2;
  sys.n_out = 1;
  sys.is_dae = true;
  sys.nominal =
      (Vector(10) << 1e-6, 2e-6, 3e-6, 1000.0, 9000.0, 9000.0, 9000.0, 9000.0, 9000.0, 6.0)
          .finished();
  sys.t_start = 0.0;
  sys.t_end = kAmpPeriod;

  // capacitive couplings: C1 between nodes 1-2, C2 node 3 to ground,
  // C3 between nodes 4-5; E has rank 3 and two purely algebraic rows
  sys.E.rows = sys.E.cols = 5;
  Matrix e1 = Matrix::Zero(5, 5);
  e1(0, 0) = -1.0;
  e1(0, 1) = 1.0;
  e1(1, 0) = 1.0;
  e1(1, 1) = -1.0;
  sys.E.terms.push_back({e1, {{0, ParamFactor::Kind::value}}});
  Matrix e2 = Matrix::Zero(5, 5);
  e2(2, 2) = -1.0;
  sys.E.terms.push_back({e2, {{1, ParamFactor::Kind::value}}});
  Matrix e3 = Matrix::Zero(5, 5);
  e3(3, 3) = -1.0;
  e3(3, 4) = 1.0;
  e3(4, 3) = 1.0;
  e3(4, 4) = -1.0;
  sys.E.terms.push_back({e3, {{2, ParamFactor::Kind::value}}});

  // resistive terms enter through conductances 1/R
  sys.A.rows = sys.A.cols = 5;
  auto conductance = [&](Index node_row, Index node_col, Index r_axis) {
    Matrix m = Matrix::Zero(5, 5);
    m(node_row, node_col) = 1.0;
    sys.A.terms.push_back({m, {{r_axis, ParamFactor::Kind::reciprocal}}});
  };
  conductance(0, 0, 3); // R0
  conductance(1, 1, 4); // R1
  conductance(1, 1, 5); // R2
  conductance(2, 2, 6); // R3
  conductance(3, 3, 7); // R4
  conductance(4, 4, 8); // R5

  // u = (U_in, 1); the operating voltage sits inside B
  sys.B.rows = 5;
  sys.B.cols = 2;
  Matrix b0 = Matrix::Zero(5, 2);
  b0(0, 0) = -1.0;
  sys.B.terms.push_back({b0, {{3, ParamFactor::Kind::reciprocal}}});
  Matrix b1 = Matrix::Zero(5, 2);
  b1(1, 1) = -1.0;
  sys.B.terms.push_back(
      {b1, {{9, ParamFactor::Kind::value}, {4, ParamFactor::Kind::reciprocal}}});
  Matrix b3 = Matrix::Zero(5, 2);
  b3(3, 1) = -1.0;
  sys.B.terms.push_back(
      {b3, {{9, ParamFactor::Kind::value}, {7, ParamFactor::Kind::reciprocal}}});

  Matrix c = Matrix::Zero(1, 5);
  c(0, 4) = 1.0; // output voltage at node 5
  sys.C = ParametricMatrix::constant(c);

  sys.F = [](const Vector& x, const Vector&) -> Vector {
    const double f23 = kAmpBeta * (std::exp((x[1] - x[2]) / kAmpUF) - 1.0);
    return (Vector(5) << 0.0, (1.0 - kAmpAlpha) * f23, -f23, kAmpAlpha * f23, 0.0).finished();
  };
  sys.F_jacobian = [](const Vector& x, const Vector&) -> Matrix {
    const double g = kAmpBeta / kAmpUF * std::exp((x[1] - x[2]) / kAmpUF);
    Matrix jac = Matrix::Zero(5, 5);
    jac(1, 1) = (1.0 - kAmpAlpha) * g;
    jac(1, 2) = -(1.0 - kAmpAlpha) * g;
    jac(2, 1) = -g;
    jac(2, 2) = g;
    jac(3, 1) = kAmpAlpha * g;
    jac(3, 2) = -kAmpAlpha * g;
    return jac;
  };
  sys.F_sparsity = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}, {3, 2}};

  // operating-point guess at nominal values; consistent_init refines it
  // for perturbed parameters
  sys.x0 = [](const Vector&) { return (Vector(5) << 0.0, 3.0, 3.0, 6.0, 0.0).finished(); };

  sys.input = [](double t) -> Vector {
    return (Vector(2) << 0.4 * std::sin(2.0 * M_PI / kAmpPeriod * t), 1.0).finished();
  };
  return sys;
}

ParametricSystem make_model(const std::string& name) {
  if (name == "scrapie") return scrapie_model();
  if (name == "transistor_amplifier") return transistor_amplifier_model();
  throw std::invalid_argument("make_model: unknown model '" + name + "'");
}

namespace {

using nlohmann::json;

Matrix parse_dense(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return Matrix(0, 0);
  const auto cols = j.at(0).size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = j.at(r).at(c).get<double>();
  return m;
}

std::vector<ParamFactor> parse_factors(const json& j) {
  std::vector<ParamFactor> out;
  for (const auto& f : j) {
    ParamFactor pf;
    pf.axis = f.at("axis").get<Index>();
    const std::string kind = f.at("kind").get<std::string>();
    if (kind == "value")
      pf.kind = ParamFactor::Kind::value;
    else if (kind == "reciprocal")
      pf.kind = ParamFactor::Kind::reciprocal;
    else
      throw std::invalid_argument("model file: unknown factor kind '" + kind + "'");
    out.push_back(pf);
  }
  return out;
}

ParametricMatrix parse_matrix(const json& j, Index rows, Index cols) {
  ParametricMatrix pm;
  pm.rows = rows;
  pm.cols = cols;
  if (j.contains("constant")) {
    Matrix c = parse_dense(j.at("constant"));
    if (c.rows() != rows || c.cols() != cols)
      throw std::invalid_argument("model file: matrix shape mismatch");
    if ((c.array() != 0.0).any()) pm.terms.push_back({std::move(c), {}});
  }
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms")) {
      MatrixTerm term;
      term.matrix = parse_dense(t.at("matrix"));
      if (term.matrix.rows() != rows || term.matrix.cols() != cols)
        throw std::invalid_argument("model file: term shape mismatch");
      term.factors = parse_factors(t.at("factors"));
      pm.terms.push_back(std::move(term));
    }
  }
  return pm;
}

struct PolyTerm {
  Index row;
  double coeff;
  std::vector<ParamFactor> factors;
  std::vector<int> powers;
};

} // namespace

ParametricSystem load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model_file: cannot open " + path);
  json j = json::parse(in);

  ParametricSystem sys;
  sys.name = j.value("name", std::string("custom"));
  sys.n = j.at("n").get<Index>();
  sys.n_in = j.value("n_in", Index{0});
  sys.n_out = j.at("n_out").get<Index>();
  sys.is_dae = j.value("is_dae", false);
  const auto nom = j.at("nominal").get<std::vector<double>>();
  sys.nominal = Eigen::Map<const Vector>(nom.data(), static_cast<Index>(nom.size()));
  sys.t_start = j.value("t_start", 0.0);
  sys.t_end = j.at("t_end").get<double>();

  sys.E = parse_matrix(j.at("E"), sys.n, sys.n);
  sys.A = parse_matrix(j.at("A"), sys.n, sys.n);
  sys.B = j.contains("B") ? parse_matrix(j.at("B"), sys.n, sys.n_in)
                          : ParametricMatrix::zero(sys.n, sys.n_in);
  sys.C = parse_matrix(j.at("C"), sys.n_out, sys.n);

  const json x0j = j.at("x0");
  ParametricMatrix x0m = parse_matrix(x0j, sys.n, 1);
  sys.x0 = [x0m](const Vector& p) -> Vector { return x0m.eval(p).col(0); };

  const json nl = j.value("nonlinearity", json{{"kind", "none"}});
  const std::string nlkind = nl.at("kind").get<std::string>();
  if (nlkind == "none") {
    // linear model
  } else if (nlkind == "polynomial") {
    std::vector<PolyTerm> terms;
    for (const auto& t : nl.at("terms")) {
      PolyTerm pt;
      pt.row = t.at("row").get<Index>();
      pt.coeff = t.at("coeff").get<double>();
      if (t.contains("factors")) pt.factors = parse_factors(t.at("factors"));
      pt.powers = t.at("powers").get<std::vector<int>>();
      if (static_cast<Index>(pt.powers.size()) != sys.n)
        throw std::invalid_argument("model file: polynomial powers length mismatch");
      terms.push_back(std::move(pt));
    }
    const Index n = sys.n;
    sys.F = [terms, n](const Vector& x, const Vector& p) -> Vector {
      Vector out = Vector::Zero(n);
      for (const auto& t : terms) {
        double v = t.coeff * factor_product(t.factors, p);
        for (Index i = 0; i < n; ++i)
          for (int e = 0; e < t.powers[static_cast<size_t>(i)]; ++e) v *= x[i];
        out[t.row] += v;
      }
      return out;
    };
    sys.F_jacobian = [terms, n](const Vector& x, const Vector& p) -> Matrix {
      Matrix jac = Matrix::Zero(n, n);
      for (const auto& t : terms) {
        const double base = t.coeff * factor_product(t.factors, p);
        for (Index jcol = 0; jcol < n; ++jcol) {
          const int pw = t.powers[static_cast<size_t>(jcol)];
          if (pw == 0) continue;
          double v = base * pw;
          for (Index i = 0; i < n; ++i) {
            const int e = t.powers[static_cast<size_t>(i)] - (i == jcol ? 1 : 0);
            for (int rep = 0; rep < e; ++rep) v *= x[i];
          }
          jac(t.row, jcol) += v;
        }
      }
      return jac;
    };
  } else if (nlkind == "builtin") {
    const std::string bname = nl.at("name").get<std::string>();
    ParametricSystem ref = make_model(bname);
    sys.F = ref.F;
    sys.F_jacobian = ref.F_jacobian;
    sys.F_sparsity = ref.F_sparsity;
  } else {
    throw std::invalid_argument("model file: unknown nonlinearity kind '" + nlkind + "'");
  }

  const json inj = j.value("input", json{{"kind", "none"}});
  const std::string inkind = inj.at("kind").get<std::string>();
  if (inkind == "none") {
    if (sys.n_in != 0) throw std::invalid_argument("model file: n_in > 0 requires an input");
  } else if (inkind == "sine") {
    const double amp = inj.at("amplitude").get<double>();
    const double period = inj.at("period").get<double>();
    const Index sine_channel = inj.value("sine_channel", Index{0});
    const Index n_in = sys.n_in;
    sys.input = [amp, period, sine_channel, n_in](double t) -> Vector {
      Vector u = Vector::Ones(n_in);
      u[sine_channel] = amp * std::sin(2.0 * M_PI / period * t);
      return u;
    };
  } else {
    throw std::invalid_argument("model file: unknown input kind '" + inkind + "'");
  }

  return sys;
}

} // namespace pcmor
