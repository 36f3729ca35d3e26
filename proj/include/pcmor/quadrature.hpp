#ifndef PCMOR_QUADRATURE_HPP
#define PCMOR_QUADRATURE_HPP

#include <functional>
#include <string>

#include "pcmor/pcbasis.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

/// Nodes and weights approximating the expectation against the product
/// uniform density on a parameter box. Weights sum to one; sparse-grid
/// weights may be negative.
struct QuadratureRule {
  Matrix nodes;   // k x q
  Vector weights; // k
  ParameterBox box;

  Index size() const { return nodes.rows(); }
  Index dim() const { return nodes.cols(); }
};

struct Rule1d {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss-Legendre rule on [-1,1] against the density 1/2,
/// exact for polynomials of degree <= 2n-1. Nodes ascending, weights
/// summing to one. Golub-Welsch on the Jacobi matrix.
Rule1d gauss_legendre_1d(Index n);

inline constexpr Index kDefaultNodeCap = 10'000'000;

/// Full tensor product of the per-axis Gauss-Legendre rule, affinely
/// mapped to the box. per_axis^q nodes; exceeding the cap is an error.
QuadratureRule tensor_rule(const ParameterBox& box, Index per_axis,
                           Index node_cap = kDefaultNodeCap);

enum class Growth {
  linear,      // level j rule has j nodes
  exponential, // level j rule has 2^j - 1 nodes
};

/// Smolyak sparse grid built from univariate Gauss-Legendre rules with the
/// given growth, levels 1..level. Coinciding nodes of different tensor
/// blocks are merged by weight summation.
QuadratureRule sparse_grid(const ParameterBox& box, Index level,
                           Growth growth = Growth::linear,
                           Index node_cap = kDefaultNodeCap);

/// sum_l gamma_l f(p_l) for a vector-valued integrand. An evaluation
/// failure is rethrown as NodeEvaluationError carrying the node index.
Vector expect(const QuadratureRule& rule, const std::function<Vector(const Vector&)>& f);

/// One row per node: the coordinates followed by the weight.
void write_rule_csv(const QuadratureRule& rule, const std::string& path);

} // namespace pcmor

#endif
