#include "pcmor/galerkin.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace pcmor {

namespace {

/// Univariate moments <L_a(z) g(z) L_b(z)> against the density 1/2 on
/// [-1,1], where g collects every factor living on one axis.
Matrix univariate_moment_table(const BasisSpec& spec, Index axis,
                               const std::vector<ParamFactor>& axis_factors) {
  const Index d = spec.degree();
  bool polynomial = true;
  for (const auto& f : axis_factors)
    if (f.kind == ParamFactor::Kind::reciprocal) polynomial = false;
  const double lo = spec.box.lower[axis], hi = spec.box.upper[axis];
  if (!polynomial && lo * hi <= 0.0)
    throw std::invalid_argument(
        "expectation: reciprocal factor on an axis whose box crosses zero");

  // polynomial integrand of degree 2d + #factors, else analytic: both are
  // resolved by a generous 1D rule
  const Index pts = polynomial
                        ? d + static_cast<Index>(axis_factors.size()) / 2 + 2
                        : Index{48};
  const Rule1d rule = gauss_legendre_1d(pts);

  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  Matrix table = Matrix::Zero(d + 1, d + 1);
  for (Index l = 0; l < rule.nodes.size(); ++l) {
    const double z = rule.nodes[l];
    const double pval = mid + half * z;
    double g = 1.0;
    for (const auto& f : axis_factors)
      g *= (f.kind == ParamFactor::Kind::value) ? pval : 1.0 / pval;
    const Vector L = legendre_orthonormal(d, z);
    table += (rule.weights[l] * g) * (L * L.transpose());
  }
  return table;
}

/// Group row indices of the multi-index set by their exponents outside the
/// factor axes; pairs in different groups have vanishing expectation.
std::map<std::vector<int>, std::vector<Index>> group_by_complement(
    const MultiIndexSet& mis, const std::vector<Index>& factor_axes) {
  std::map<std::vector<int>, std::vector<Index>> groups;
  const Index m = mis.size(), q = mis.q;
  std::vector<bool> is_factor(static_cast<size_t>(q), false);
  for (Index a : factor_axes) is_factor[static_cast<size_t>(a)] = true;
  std::vector<int> key;
  for (Index i = 0; i < m; ++i) {
    key.clear();
    for (Index j = 0; j < q; ++j)
      if (!is_factor[static_cast<size_t>(j)]) key.push_back(mis.indices(i, j));
    groups[key].push_back(i);
  }
  return groups;
}

std::map<Index, std::vector<ParamFactor>> factors_by_axis(
    const std::vector<ParamFactor>& factors) {
  std::map<Index, std::vector<ParamFactor>> by_axis;
  for (const auto& f : factors) by_axis[f.axis].push_back(f);
  return by_axis;
}

} // namespace

SparseMatrix expectation_matrix(const BasisSpec& spec, const std::vector<ParamFactor>& factors) {
  const Index m = spec.dim();
  SparseMatrix M(m, m);
  if (factors.empty()) {
    M.setIdentity();
    return M;
  }
  const auto by_axis = factors_by_axis(factors);
  std::vector<Index> axes;
  std::vector<Matrix> tables;
  for (const auto& [axis, fs] : by_axis) {
    axes.push_back(axis);
    tables.push_back(univariate_moment_table(spec, axis, fs));
  }
  const auto groups = group_by_complement(spec.index_set, axes);

  std::vector<Triplet> trips;
  for (const auto& [key, rows] : groups) {
    for (Index a : rows) {
      for (Index b : rows) {
        double v = 1.0;
        for (size_t t = 0; t < axes.size(); ++t)
          v *= tables[t](spec.index_set.indices(a, axes[t]),
                         spec.index_set.indices(b, axes[t]));
        if (v != 0.0) trips.emplace_back(a, b, v);
      }
    }
  }
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Vector expectation_vector(const BasisSpec& spec, const std::vector<ParamFactor>& factors) {
  const Index m = spec.dim();
  Vector v = Vector::Zero(m);
  if (factors.empty()) {
    v[0] = 1.0;
    return v;
  }
  const auto by_axis = factors_by_axis(factors);
  std::vector<Index> axes;
  std::vector<Vector> moments; // <L_a g> per axis
  for (const auto& [axis, fs] : by_axis) {
    axes.push_back(axis);
    moments.push_back(univariate_moment_table(spec, axis, fs).col(0));
  }
  std::vector<bool> is_factor(static_cast<size_t>(spec.param_dim()), false);
  for (Index a : axes) is_factor[static_cast<size_t>(a)] = true;

  for (Index i = 0; i < m; ++i) {
    double val = 1.0;
    for (Index j = 0; j < spec.param_dim(); ++j) {
      const int deg = spec.index_set.indices(i, j);
      if (!is_factor[static_cast<size_t>(j)]) {
        if (deg != 0) {
          val = 0.0;
          break;
        }
      }
    }
    if (val == 0.0) continue;
    for (size_t t = 0; t < axes.size(); ++t)
      val *= moments[t][spec.index_set.indices(i, axes[t])];
    v[i] = val;
  }
  return v;
}

namespace {

void add_kron_block(std::vector<Triplet>& trips, const SparseMatrix& G, const Matrix& block,
                    Index n) {
  for (Index outer = 0; outer < G.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(G, outer); it; ++it) {
      for (Index a = 0; a < block.rows(); ++a)
        for (Index b = 0; b < block.cols(); ++b)
          if (block(a, b) != 0.0)
            trips.emplace_back(it.row() * n + a, it.col() * n + b, it.value() * block(a, b));
    }
  }
}

SparseMatrix project_matrix_family(const ParametricMatrix& pm, const BasisSpec& spec,
                                   const QuadratureRule& rule, const Matrix& phi) {
  const Index m = spec.dim(), n = pm.rows;
  SparseMatrix out(m * n, m * n);
  if (pm.separable()) {
    std::vector<Triplet> trips;
    for (const auto& term : pm.terms) {
      const SparseMatrix G = expectation_matrix(spec, term.factors);
      add_kron_block(trips, G, term.matrix, n);
    }
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  }
  // quadrature fallback for callable matrix families
  if (m * n > 6000)
    throw std::invalid_argument(
        "assemble_galerkin: callable matrix family too large for the dense fallback");
  Matrix dense = Matrix::Zero(m * n, m * n);
  for (Index l = 0; l < rule.size(); ++l) {
    const Matrix Ml = pm.eval(rule.nodes.row(l).transpose());
    const Vector s = phi.row(l).transpose();
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        const double c = rule.weights[l] * s[i] * s[j];
        if (c != 0.0) dense.block(i * n, j * n, n, n) += c * Ml;
      }
  }
  return dense.sparseView(1.0, 1e-300);
}

} // namespace

Matrix GalerkinContext::states_at_nodes(const Vector& vhat) const {
  const Eigen::Map<const Matrix> V(vhat.data(), n, m);
  return V * phi.transpose();
}

Vector GalerkinSystem::fhat(const Vector& vhat) const {
  const GalerkinContext& c = *ctx;
  if (!c.model.F) return Vector::Zero(dim());
  const Matrix X = c.states_at_nodes(vhat);
  Matrix FX(c.n, c.nodes.rows());
  for (Index l = 0; l < c.nodes.rows(); ++l)
    FX.col(l) = c.model.F(X.col(l), c.nodes.row(l).transpose());
  const Matrix out = FX * c.weights.asDiagonal() * c.phi; // n x m
  return Eigen::Map<const Vector>(out.data(), dim());
}

namespace {

std::vector<std::pair<Index, Index>> jacobian_pattern(const ParametricSystem& model) {
  if (!model.F_sparsity.empty()) return model.F_sparsity;
  std::vector<std::pair<Index, Index>> all;
  for (Index a = 0; a < model.n; ++a)
    for (Index b = 0; b < model.n; ++b) all.emplace_back(a, b);
  return all;
}

} // namespace

Matrix GalerkinSystem::fhat_jacobian(const Vector& vhat) const {
  const GalerkinContext& c = *ctx;
  Matrix J = Matrix::Zero(dim(), dim());
  if (!c.model.F) return J;
  const Matrix X = c.states_at_nodes(vhat);
  const Index k = c.nodes.rows();
  const auto pattern = jacobian_pattern(c.model);

  // entry pattern (a,b): J[(i,a),(j,b)] = sum_l gamma_l Fx_ab(l) phi_li phi_lj
  Matrix fx_entries(k, static_cast<Index>(pattern.size()));
  for (Index l = 0; l < k; ++l) {
    const Matrix fx = nonlinearity_jacobian(c.model, X.col(l), c.nodes.row(l).transpose());
    for (size_t e = 0; e < pattern.size(); ++e)
      fx_entries(l, static_cast<Index>(e)) = fx(pattern[e].first, pattern[e].second);
  }
  for (size_t e = 0; e < pattern.size(); ++e) {
    const Vector w = c.weights.array() * fx_entries.col(static_cast<Index>(e)).array();
    const Matrix sub = c.phi.transpose() * w.asDiagonal() * c.phi; // m x m
    const auto [a, b] = pattern[e];
    for (Index i = 0; i < c.m; ++i)
      for (Index j = 0; j < c.m; ++j) J(i * c.n + a, j * c.n + b) += sub(i, j);
  }
  return J;
}

Matrix GalerkinSystem::fhat_jacobian_times(const Vector& vhat, const Matrix& W) const {
  const GalerkinContext& c = *ctx;
  Matrix out = Matrix::Zero(dim(), W.cols());
  if (!c.model.F) return out;
  const Matrix X = c.states_at_nodes(vhat);
  const Index k = c.nodes.rows();

  std::vector<Matrix> fx(static_cast<size_t>(k));
  for (Index l = 0; l < k; ++l)
    fx[static_cast<size_t>(l)] =
        nonlinearity_jacobian(c.model, X.col(l), c.nodes.row(l).transpose());

  for (Index col = 0; col < W.cols(); ++col) {
    const Eigen::Map<const Matrix> Wc(W.col(col).data(), c.n, c.m);
    const Matrix Z = Wc * c.phi.transpose(); // n x k
    Matrix U(c.n, k);
    for (Index l = 0; l < k; ++l) U.col(l) = fx[static_cast<size_t>(l)] * Z.col(l);
    const Matrix res = U * c.weights.asDiagonal() * c.phi; // n x m
    out.col(col) = Eigen::Map<const Vector>(res.data(), dim());
  }
  return out;
}

GalerkinSystem assemble_galerkin(const ParametricSystem& sys, const BasisSpec& spec,
                                 const QuadratureRule& f_rule,
                                 const QuadratureRule* assembly_rule) {
  if (spec.param_dim() != sys.param_dim())
    throw std::invalid_argument("assemble_galerkin: basis/model parameter dimension mismatch");

  auto ctx = std::make_shared<GalerkinContext>();
  ctx->model = sys;
  ctx->basis = spec;
  ctx->nodes = f_rule.nodes;
  ctx->weights = f_rule.weights;
  ctx->phi = evaluate_basis_at(spec, f_rule.nodes);
  ctx->m = spec.dim();
  ctx->n = sys.n;

  const QuadratureRule& arule = assembly_rule ? *assembly_rule : f_rule;
  const Matrix aphi = assembly_rule ? evaluate_basis_at(spec, arule.nodes) : ctx->phi;

  GalerkinSystem gal;
  gal.ctx = ctx;
  gal.Ehat = project_matrix_family(sys.E, spec, arule, aphi);
  gal.Ahat = project_matrix_family(sys.A, spec, arule, aphi);

  const Index m = ctx->m, n = ctx->n;

  // Bhat = E[s (x) B]
  gal.Bhat = Matrix::Zero(m * n, sys.n_in);
  if (sys.n_in > 0) {
    if (sys.B.separable()) {
      for (const auto& term : sys.B.terms) {
        const Vector u = expectation_vector(spec, term.factors);
        for (Index i = 0; i < m; ++i)
          if (u[i] != 0.0) gal.Bhat.middleRows(i * n, n) += u[i] * term.matrix;
      }
    } else {
      for (Index l = 0; l < arule.size(); ++l) {
        const Matrix Bl = sys.B.eval(arule.nodes.row(l).transpose());
        for (Index i = 0; i < m; ++i)
          gal.Bhat.middleRows(i * n, n) += arule.weights[l] * aphi(l, i) * Bl;
      }
    }
  }

  // one block row map E[S (x) C_o] per output
  gal.Chat.resize(static_cast<size_t>(sys.n_out));
  for (Index o = 0; o < sys.n_out; ++o) {
    Matrix Co = Matrix::Zero(m, m * n);
    if (sys.C.separable()) {
      for (const auto& term : sys.C.terms) {
        const SparseMatrix G = expectation_matrix(spec, term.factors);
        for (Index outer = 0; outer < G.outerSize(); ++outer)
          for (SparseMatrix::InnerIterator it(G, outer); it; ++it)
            for (Index b = 0; b < n; ++b)
              Co(it.row(), it.col() * n + b) += it.value() * term.matrix(o, b);
      }
    } else {
      for (Index l = 0; l < arule.size(); ++l) {
        const Matrix Cl = sys.C.eval(arule.nodes.row(l).transpose());
        const Vector s = aphi.row(l).transpose();
        for (Index i = 0; i < m; ++i)
          for (Index j = 0; j < m; ++j)
            Co.block(i, j * n, 1, n) += (arule.weights[l] * s[i] * s[j]) * Cl.row(o);
      }
    }
    gal.Chat[static_cast<size_t>(o)] = std::move(Co);
  }

  gal.v0 = galerkin_initial(sys, spec, f_rule);

  SparseMatrix eye(m * n, m * n);
  eye.setIdentity();
  gal.mass_is_identity = (gal.Ehat - eye).norm() < 1e-13 * std::sqrt(static_cast<double>(m * n));
  return gal;
}

Vector galerkin_nonlinear(const Vector& vhat, const ParametricSystem& sys, const BasisSpec& spec,
                          const QuadratureRule& rule) {
  GalerkinContext ctx;
  ctx.model = sys;
  ctx.basis = spec;
  ctx.nodes = rule.nodes;
  ctx.weights = rule.weights;
  ctx.phi = evaluate_basis_at(spec, rule.nodes);
  ctx.m = spec.dim();
  ctx.n = sys.n;
  GalerkinSystem tmp;
  tmp.ctx = std::make_shared<GalerkinContext>(std::move(ctx));
  return tmp.fhat(vhat);
}

Vector galerkin_initial(const ParametricSystem& sys, const BasisSpec& spec,
                        const QuadratureRule& rule) {
  const Index m = spec.dim(), n = sys.n;
  const Matrix phi = evaluate_basis_at(spec, rule.nodes);
  Matrix X0(n, rule.size());
  for (Index l = 0; l < rule.size(); ++l) {
    const Vector p = rule.nodes.row(l).transpose();
    X0.col(l) = sys.is_dae ? consistent_init(sys, p) : sys.x0(p);
  }
  const Matrix out = X0 * rule.weights.asDiagonal() * phi; // n x m
  return Eigen::Map<const Vector>(out.data(), m * n);
}

ImplicitSystem GalerkinSystem::to_implicit() const {
  ImplicitSystem sys;
  sys.dim = dim();
  sys.mass = Ehat;
  sys.linear = Ahat;
  sys.input_matrix = Bhat;
  sys.input = ctx->model.input;
  sys.mass_is_identity = mass_is_identity;
  sys.dae_start = ctx->model.is_dae;
  if (ctx->model.F) {
    auto c = ctx;
    sys.nonlinearity = [c](const Vector& v) -> Vector {
      GalerkinSystem view;
      view.ctx = c;
      return view.fhat(v);
    };
    sys.nonlin_jacobian = [c](const Vector& v) -> Matrix {
      GalerkinSystem view;
      view.ctx = c;
      return view.fhat_jacobian(v);
    };
  }
  return sys;
}

void export_sparse_triplets(const SparseMatrix& M, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("export_sparse_triplets: cannot open " + path);
  std::fprintf(fp, "%lld %lld %lld\n", static_cast<long long>(M.rows()),
               static_cast<long long>(M.cols()), static_cast<long long>(M.nonZeros()));
  for (Index outer = 0; outer < M.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(M, outer); it; ++it)
      std::fprintf(fp, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                   static_cast<long long>(it.col()), it.value());
  std::fclose(fp);
}

} // namespace pcmor
