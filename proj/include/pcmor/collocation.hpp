#ifndef PCMOR_COLLOCATION_HPP
#define PCMOR_COLLOCATION_HPP

#include <memory>
#include <string>
#include <vector>

#include "pcmor/models.hpp"
#include "pcmor/pcbasis.hpp"
#include "pcmor/quadrature.hpp"
#include "pcmor/timeint.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

struct CollocationContext {
  ParametricSystem model;
  BasisSpec basis;
  QuadratureRule rule;
  Matrix phi;                // k x m basis values at the nodes
  std::vector<Matrix> Es, As, Bs; // matrices frozen at the nodes
  std::vector<Vector> x0s;        // consistent initial values per node
  Index k = 0, n = 0, m = 0;
};

/// The k node systems written as one weakly coupled system: block-diagonal
/// dynamics, stacked inputs and initial values, and an output map that
/// projects the node outputs onto the basis through the quadrature weights.
struct CollocationSystem {
  std::shared_ptr<const CollocationContext> ctx;
  SparseMatrix Ehat, Ahat;  // kn x kn, strictly block diagonal
  Matrix Bhat;              // kn x n_in
  std::vector<Matrix> Chat; // one m x kn map per output
  Vector x0hat;             // kn

  Index k() const { return ctx->k; }
  Index n() const { return ctx->n; }
  Index m() const { return ctx->m; }
  Index dim() const { return ctx->k * ctx->n; }

  /// Coupled view for a literal single solve with one shared time grid.
  ImplicitSystem to_implicit() const;
  /// The original system frozen at node l, for independent solves.
  ImplicitSystem node_implicit(Index l) const;
};

CollocationSystem assemble_collocation(const ParametricSystem& sys, const BasisSpec& spec,
                                       const QuadratureRule& rule);

/// w(t) = Chat_o x(t): coefficients of the output expansion.
Vector collocation_output(const CollocationSystem& csys, const Vector& xhat, Index output = 0);

/// Solve every node system independently and sample all of them on the
/// shared grid; returns the kn x |grid| snapshot matrix. When cache_dir is
/// nonempty, per-node samples are reused across runs, keyed by a hash of
/// the node, the tolerances, and the grid.
Matrix solve_collocation_nodes(const CollocationSystem& csys, const IntegratorConfig& cfg,
                               const std::vector<double>& grid,
                               const std::string& cache_dir = "");

} // namespace pcmor

#endif
