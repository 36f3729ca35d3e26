#ifndef PCMOR_PCBASIS_HPP
#define PCMOR_PCBASIS_HPP

#include <Eigen/Core>

#include "pcmor/types.hpp"

namespace pcmor {

struct QuadratureRule;

/// Axis-aligned box of admissible parameter values with a nominal point.
/// Random parameters are independent and uniform on the box, so the joint
/// density is the product of the per-axis uniform densities.
struct ParameterBox {
  Vector lower;
  Vector upper;
  Vector nominal;

  ParameterBox() = default;
  ParameterBox(Vector lo, Vector up, Vector nom);

  /// Box with bounds nominal * (1 -/+ percent/100) per axis.
  static ParameterBox relative(const Vector& nominal, double percent);

  Index dim() const { return lower.size(); }
  bool contains(const Vector& p, double tol = 1e-12) const;

  /// Affine map onto the reference cube [-1,1]^q and back.
  Vector to_unit(const Vector& p) const;
  Vector from_unit(const Vector& z) const;

  Vector midpoint() const { return 0.5 * (lower + upper); }
  Vector halfwidth() const { return 0.5 * (upper - lower); }
};

/// All exponent tuples of q nonnegative integers with component sum <= d,
/// in graded lexicographic order. The zero tuple comes first, so the first
/// basis function is the constant one.
struct MultiIndexSet {
  Index q = 0;
  Index d = 0;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> indices; // m x q

  static MultiIndexSet total_degree(Index q, Index d);

  Index size() const { return indices.rows(); }
};

/// Number of multivariate polynomials of total degree <= d in q variables,
/// (q+d)! / (q! d!). Throws std::overflow_error instead of wrapping.
Index basis_dimension(Index q, Index d);

struct BasisSpec {
  ParameterBox box;
  MultiIndexSet index_set;

  BasisSpec() = default;
  BasisSpec(ParameterBox b, Index degree)
      : box(std::move(b)), index_set(MultiIndexSet::total_degree(box.dim(), degree)) {}

  Index dim() const { return index_set.size(); }          // m
  Index param_dim() const { return box.dim(); }           // q
  Index degree() const { return index_set.d; }            // d
};

/// Values of the orthonormal Legendre polynomials of degree 0..d at z,
/// z in [-1,1], normalized against the uniform density 1/2. Entry k equals
/// sqrt(2k+1) P_k(z); three-term recurrence.
Vector legendre_orthonormal(Index d, double z);

/// Off-diagonal entry <L_k z L_{k+1}> of the Jacobi matrix for the
/// orthonormal Legendre family, (k+1)/sqrt((2k+1)(2k+3)).
double legendre_recurrence_beta(Index k);

/// s(p): values of all m basis functions at a parameter point inside the box.
/// The first entry is exactly 1.
Vector evaluate_basis(const BasisSpec& spec, const Vector& p);

/// Basis values at many points at once: row l holds s(points.row(l)).
Matrix evaluate_basis_at(const BasisSpec& spec, const Matrix& points);

/// Discrete Gram matrix sum_l gamma_l s(p_l) s(p_l)^T. Equals the identity
/// up to roundoff whenever the rule integrates all pairwise basis products
/// exactly.
Matrix gram_matrix(const BasisSpec& spec, const QuadratureRule& rule);

} // namespace pcmor

#endif
