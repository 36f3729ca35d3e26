#ifndef PCMOR_TIMEINT_HPP
#define PCMOR_TIMEINT_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcmor/errors.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

/// Implicit-form system E x' = A x + F(x) + B u(t) as consumed by the
/// integrators. The linear part is explicit; the nonlinearity and its
/// Jacobian are callbacks (finite differences when no Jacobian is given).
struct ImplicitSystem {
  Index dim = 0;
  SparseMatrix mass;    // E
  SparseMatrix linear;  // A
  Matrix input_matrix;  // dim x n_in
  std::function<Vector(double)> input;
  std::function<Vector(const Vector&)> nonlinearity;
  std::function<Matrix(const Vector&)> nonlin_jacobian;              // dense
  std::function<SparseMatrix(const Vector&)> nonlin_jacobian_sparse; // sparse
  bool mass_is_identity = false;
  bool prefer_sparse_solver = false;
  /// Singular mass matrix whose initial values may violate the algebraic
  /// constraints slightly (projected initial data). The first step then
  /// doubles as the projection onto the constraint manifold: it is taken
  /// with a small backward Euler step exempt from the local error test.
  bool dae_start = false;

  Vector rhs(double t, const Vector& x) const;
  /// dF/dx, dense; finite differences if no callback is set.
  Matrix jacobian_dense(const Vector& x) const;
};

enum class Method { trapezoidal, bdf };

struct IntegratorConfig {
  Method method = Method::trapezoidal;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  int max_order = 5;        // bdf only, in [1,5]
  double initial_step = 0;  // 0: automatic
  double min_step = 0;      // 0: span * 1e-14
  double max_step = 0;      // 0: span / 10
  double newton_tol = 0.05; // wrms threshold on the Newton increment
  int newton_max_iter = 10;
  double fixed_step = 0;    // > 0 disables step control (convergence studies)
  Index max_steps = 2'000'000;
  /// Accepted points before span.first seeding the multistep history
  /// (restarts and convergence studies); ascending times, newest last.
  std::vector<std::pair<double, Vector>> warm_start;
};

struct IntegratorStats {
  Index steps = 0;
  Index rejected = 0;
  Index newton_iters = 0;
  Index jacobians = 0;
  Index factorizations = 0;
};

/// Accepted solution points with enough per-step data for dense output:
/// state derivatives for the trapezoidal rule, the interpolation order per
/// step for the multistep method.
struct Trajectory {
  std::vector<double> times;
  Matrix states;      // dim x points
  Matrix derivatives; // dim x points (trapezoidal only, else 0 x 0)
  std::vector<int> orders;
  Method method = Method::trapezoidal;
  IntegratorStats stats;

  Index dim() const { return states.rows(); }
  Index points() const { return states.cols(); }
  double t_front() const { return times.front(); }
  double t_back() const { return times.back(); }
};

/// Integrate from span.first to span.second with mixed absolute/relative
/// local error control. Throws IntegrationError (carrying the last good
/// time) when the step size underflows or Newton cannot be rescued.
Trajectory integrate(const ImplicitSystem& sys, std::pair<double, double> span,
                     const Vector& init, const IntegratorConfig& cfg);

/// Dense output at the requested times, which must lie inside the span of
/// the trajectory; interpolation matches the integrator's local order.
Matrix interpolate(const Trajectory& traj, const std::vector<double>& times);

Vector interpolate_at(const Trajectory& traj, double t);

std::vector<double> uniform_grid(double t0, double t1, Index count);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_trajectory_binary(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_binary(const std::string& path);

} // namespace pcmor

#endif
