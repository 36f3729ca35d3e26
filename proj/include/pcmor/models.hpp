#ifndef PCMOR_MODELS_HPP
#define PCMOR_MODELS_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcmor/types.hpp"

namespace pcmor {

/// One scalar factor of a separable parameter dependence: the value of a
/// single parameter axis or its reciprocal.
struct ParamFactor {
  enum class Kind { value, reciprocal };
  Index axis = 0;
  Kind kind = Kind::value;
};

/// matrix * product of per-axis factors; no factors means a constant term.
struct MatrixTerm {
  Matrix matrix;
  std::vector<ParamFactor> factors;
};

/// Matrix-valued function of the parameters, stored as a sum of separable
/// terms whenever the dependence allows it. Separability keeps expectation
/// assembly exact: every moment factorizes into univariate integrals.
struct ParametricMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<MatrixTerm> terms;
  std::function<Matrix(const Vector&)> general; // fallback when terms is empty

  static ParametricMatrix constant(Matrix value);
  static ParametricMatrix zero(Index rows, Index cols);

  bool separable() const { return general == nullptr; }
  Matrix eval(const Vector& p) const;
};

double factor_product(const std::vector<ParamFactor>& factors, const Vector& p);

/// Descriptor system E(p) x' = A(p) x + F(x,p) + B(p) u(t), y = C(p) x,
/// with parameter-dependent initial values.
struct ParametricSystem {
  std::string name;
  Index n = 0;
  Index n_in = 0;
  Index n_out = 0;
  ParametricMatrix E, A, B, C;
  std::function<Vector(const Vector&, const Vector&)> F;            // F(x,p); null -> linear
  std::function<Matrix(const Vector&, const Vector&)> F_jacobian;   // dF/dx; null -> finite differences
  std::vector<std::pair<Index, Index>> F_sparsity;                  // possibly nonzero dF/dx entries
  std::function<Vector(const Vector&)> x0;                          // initial values (guess for DAEs)
  std::function<Vector(double)> input;                              // u(t); null when n_in == 0
  bool is_dae = false;
  Vector nominal;
  double t_start = 0.0;
  double t_end = 1.0;

  Index param_dim() const { return nominal.size(); }
};

/// A(p) x + F(x,p) + B(p) u(t). Non-finite values of F are reported with
/// the offending state.
Vector eval_rhs(const ParametricSystem& sys, double t, const Vector& x, const Vector& p);

/// dF/dx at (x,p): analytic when the model provides it, otherwise central
/// finite differences restricted to the declared sparsity.
Matrix nonlinearity_jacobian(const ParametricSystem& sys, const Vector& x, const Vector& p);

struct ConsistencyOptions {
  double tol = 1e-12;
  int max_iter = 50;
};

/// Initial values satisfying the algebraic constraints of the DAE at
/// t_start. Starting from the stored x0(p), a damped Newton iteration
/// corrects the state along the null-space directions of E(p), leaving the
/// differential components untouched. ODE systems return x0(p) unchanged.
Vector consistent_init(const ParametricSystem& sys, const Vector& p,
                       const ConsistencyOptions& opts = {});

/// Scrapie reaction kinetics: three concentrations, five rate constants,
/// autonomous ODE on [0, 500]. The linear part carries every term of first
/// order in the state; the quadratic and bilinear reaction terms form F.
ParametricSystem scrapie_model();

/// One-transistor amplifier circuit: five node voltages, index-1 DAE driven
/// by a sinusoidal input voltage. Ten parameters: the three capacitances,
/// the six resistances and the operating voltage. Coefficient values follow
/// the classical reference formulation of this circuit (R0 = 1k, other
/// resistors 9k, C_i = i uF, U_op = 6 V, transistor constants alpha = 0.99,
/// beta = 1e-6, U_F = 0.026 V).
ParametricSystem transistor_amplifier_model();

/// Registry lookup by name: "scrapie" or "transistor_amplifier".
ParametricSystem make_model(const std::string& name);

/// Custom model from a declarative JSON file: matrices as dense arrays or
/// separable term lists, the nonlinearity as a polynomial term list or a
/// named builtin, inputs as named signal shapes.
ParametricSystem load_model_file(const std::string& path);

} // namespace pcmor

#endif
