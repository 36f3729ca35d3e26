#include "pcmor/pcbasis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcmor/quadrature.hpp"

namespace pcmor {

ParameterBox::ParameterBox(Vector lo, Vector up, Vector nom)
    : lower(std::move(lo)), upper(std::move(up)), nominal(std::move(nom)) {
  if (lower.size() != upper.size() || lower.size() != nominal.size())
    throw std::invalid_argument("ParameterBox: bound/nominal sizes differ");
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("ParameterBox: lower[i] < upper[i] violated");
    if (nominal[i] < lower[i] || nominal[i] > upper[i])
      throw std::invalid_argument("ParameterBox: nominal outside the box");
  }
}

ParameterBox ParameterBox::relative(const Vector& nominal, double percent) {
  const double f = percent / 100.0;
  Vector lo(nominal.size()), up(nominal.size());
  for (Index i = 0; i < nominal.size(); ++i) {
    const double h = f * std::abs(nominal[i]);
    lo[i] = nominal[i] - h;
    up[i] = nominal[i] + h;
  }
  return ParameterBox(lo, up, nominal);
}

bool ParameterBox::contains(const Vector& p, double tol) const {
  if (p.size() != lower.size()) return false;
  for (Index i = 0; i < p.size(); ++i) {
    const double slack = tol * (upper[i] - lower[i]);
    if (p[i] < lower[i] - slack || p[i] > upper[i] + slack) return false;
  }
  return true;
}

Vector ParameterBox::to_unit(const Vector& p) const {
  return ((2.0 * p - lower - upper).array() / (upper - lower).array()).matrix();
}

Vector ParameterBox::from_unit(const Vector& z) const {
  return midpoint() + (halfwidth().array() * z.array()).matrix();
}

Index basis_dimension(Index q, Index d) {
  if (q < 1 || d < 0) throw std::invalid_argument("basis_dimension: q >= 1, d >= 0 required");
  // binomial(q+d, d) accumulated incrementally; detect overflow before it happens
  long long count = 1;
  const long long cap = std::numeric_limits<long long>::max();
  for (Index i = 1; i <= d; ++i) {
    // count = count * (q + i) / i is exact: count holds binomial(q+i-1, i-1)
    if (count > cap / (q + i)) throw std::overflow_error("basis_dimension: count overflows");
    count = count * (q + i) / i;
  }
  if (count > static_cast<long long>(std::numeric_limits<Index>::max()))
    throw std::overflow_error("basis_dimension: count overflows Index");
  return static_cast<Index>(count);
}

MultiIndexSet MultiIndexSet::total_degree(Index q, Index d) {
  const Index m = basis_dimension(q, d);
  MultiIndexSet set;
  set.q = q;
  set.d = d;
  set.indices.resize(m, q);

  // graded lexicographic: by total degree, then lexicographically descending,
  // so (g,0,...,0) leads its degree class and the zero tuple is first overall
  std::vector<int> alpha(static_cast<size_t>(q), 0);
  Index row = 0;
  for (Index g = 0; g <= d; ++g) {
    // enumerate compositions of g into q parts, lexicographically descending
    std::fill(alpha.begin(), alpha.end(), 0);
    alpha[0] = static_cast<int>(g);
    while (true) {
      for (Index j = 0; j < q; ++j) set.indices(row, j) = alpha[static_cast<size_t>(j)];
      ++row;
      // next composition: find rightmost position before the last with a
      // positive entry, decrement it, move the remainder just after it
      Index k = q - 2;
      while (k >= 0 && alpha[static_cast<size_t>(k)] == 0) --k;
      if (k < 0) break;
      int rest = 0;
      for (Index j = k + 1; j < q; ++j) {
        rest += alpha[static_cast<size_t>(j)];
        alpha[static_cast<size_t>(j)] = 0;
      }
      alpha[static_cast<size_t>(k)] -= 1;
      alpha[static_cast<size_t>(k + 1)] = rest + 1;
    }
  }
  if (row != m) throw std::logic_error("MultiIndexSet: enumeration count mismatch");
  return set;
}

Vector legendre_orthonormal(Index d, double z) {
  Vector vals(d + 1);
  double pm1 = 1.0, p = z;
  vals[0] = 1.0;
  if (d >= 1) vals[1] = std::sqrt(3.0) * z;
  for (Index k = 2; k <= d; ++k) {
    const double pk = ((2.0 * k - 1.0) * z * p - (k - 1.0) * pm1) / static_cast<double>(k);
    pm1 = p;
    p = pk;
    vals[k] = std::sqrt(2.0 * k + 1.0) * pk;
  }
  return vals;
}

double legendre_recurrence_beta(Index k) {
  return (k + 1.0) / std::sqrt((2.0 * k + 1.0) * (2.0 * k + 3.0));
}

Vector evaluate_basis(const BasisSpec& spec, const Vector& p) {
  if (p.size() != spec.param_dim())
    throw std::invalid_argument("evaluate_basis: parameter dimension mismatch");
  if (!spec.box.contains(p))
    throw std::invalid_argument("evaluate_basis: point outside the parameter box");

  const Vector z = spec.box.to_unit(p);
  const Index q = spec.param_dim(), d = spec.degree(), m = spec.dim();

  Matrix uni(q, d + 1);
  for (Index j = 0; j < q; ++j) uni.row(j) = legendre_orthonormal(d, z[j]).transpose();

  Vector s(m);
  for (Index i = 0; i < m; ++i) {
    double v = 1.0;
    for (Index j = 0; j < q; ++j) {
      const int deg = spec.index_set.indices(i, j);
      if (deg > 0) v *= uni(j, deg);
    }
    s[i] = v;
  }
  s[0] = 1.0;
  return s;
}

Matrix evaluate_basis_at(const BasisSpec& spec, const Matrix& points) {
  Matrix out(points.rows(), spec.dim());
  for (Index l = 0; l < points.rows(); ++l)
    out.row(l) = evaluate_basis(spec, points.row(l).transpose()).transpose();
  return out;
}

Matrix gram_matrix(const BasisSpec& spec, const QuadratureRule& rule) {
  if (rule.dim() != spec.param_dim())
    throw std::invalid_argument("gram_matrix: rule dimension mismatch");
  if (rule.box.dim() == spec.param_dim()) {
    for (Index j = 0; j < spec.param_dim(); ++j) {
      const double width = spec.box.upper[j] - spec.box.lower[j];
      if (std::abs(rule.box.lower[j] - spec.box.lower[j]) > 1e-10 * width ||
          std::abs(rule.box.upper[j] - spec.box.upper[j]) > 1e-10 * width)
        throw std::invalid_argument("gram_matrix: rule lives on a different box");
    }
  }
  const Matrix S = evaluate_basis_at(spec, rule.nodes); // k x m
  return S.transpose() * rule.weights.asDiagonal() * S;
}

} // namespace pcmor
