#ifndef PCMOR_GALERKIN_HPP
#define PCMOR_GALERKIN_HPP

#include <memory>
#include <string>
#include <vector>

#include "pcmor/models.hpp"
#include "pcmor/pcbasis.hpp"
#include "pcmor/quadrature.hpp"
#include "pcmor/timeint.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

/// E[ Phi_a Phi_b * prod(factors) ] for all basis pairs. Factors on distinct
/// axes factorize into univariate moments; axes without factors contribute
/// Kronecker deltas, so the result is sparse.
SparseMatrix expectation_matrix(const BasisSpec& spec, const std::vector<ParamFactor>& factors);

/// E[ Phi_a * prod(factors) ] for all basis functions.
Vector expectation_vector(const BasisSpec& spec, const std::vector<ParamFactor>& factors);

/// Shared evaluation state for the projected nonlinearity.
struct GalerkinContext {
  ParametricSystem model;
  BasisSpec basis;
  Matrix nodes;        // k x q
  Vector weights;      // k
  Matrix phi;          // k x m basis values at the nodes
  Index m = 0, n = 0;

  /// States at all nodes for coefficient vector vhat: n x k.
  Matrix states_at_nodes(const Vector& vhat) const;
};

/// Spectral projection of the full parametric system onto the basis:
/// block matrices from expectations of S(p) = s(p) s(p)^T against the
/// matrix families, the nonlinearity evaluated through the quadrature rule.
struct GalerkinSystem {
  SparseMatrix Ehat, Ahat;   // mn x mn
  Matrix Bhat;               // mn x n_in
  std::vector<Matrix> Chat;  // one m x mn block row map per output
  Vector v0;                 // mn
  std::shared_ptr<const GalerkinContext> ctx;
  bool mass_is_identity = false;

  Index m() const { return ctx->m; }
  Index n() const { return ctx->n; }
  Index dim() const { return ctx->m * ctx->n; }

  Vector fhat(const Vector& vhat) const;
  Matrix fhat_jacobian(const Vector& vhat) const;
  /// J(vhat) * W without forming the full Jacobian.
  Matrix fhat_jacobian_times(const Vector& vhat, const Matrix& W) const;

  ImplicitSystem to_implicit() const;
};

/// Assemble Ehat, Ahat, Bhat, Chat. Separable matrix families are projected
/// exactly through univariate moments; a general parameter dependence falls
/// back to the given assembly rule (f_rule when absent).
GalerkinSystem assemble_galerkin(const ParametricSystem& sys, const BasisSpec& spec,
                                 const QuadratureRule& f_rule,
                                 const QuadratureRule* assembly_rule = nullptr);

/// Quadrature approximation of the projected nonlinearity at coefficients
/// vhat: block i sums gamma_l F(sum_j vhat_j Phi_j(p_l), p_l) Phi_i(p_l).
Vector galerkin_nonlinear(const Vector& vhat, const ParametricSystem& sys, const BasisSpec& spec,
                          const QuadratureRule& rule);

/// Projection of the initial values: block i approximates E[x0 Phi_i].
/// DAE initial values are made consistent node by node before projecting.
Vector galerkin_initial(const ParametricSystem& sys, const BasisSpec& spec,
                        const QuadratureRule& rule);

/// Plain text triplet export (row, col, value per line) for inspection.
void export_sparse_triplets(const SparseMatrix& M, const std::string& path);

} // namespace pcmor

#endif
