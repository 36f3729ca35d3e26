#include "pcmor/timeint.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pcmor {

Vector ImplicitSystem::rhs(double t, const Vector& x) const {
  Vector out = linear * x;
  if (nonlinearity) out += nonlinearity(x);
  if (input_matrix.cols() > 0 && input) out += input_matrix * input(t);
  return out;
}

Matrix ImplicitSystem::jacobian_dense(const Vector& x) const {
  if (!nonlinearity) return Matrix::Zero(dim, dim);
  if (nonlin_jacobian) return nonlin_jacobian(x);
  Matrix jac(dim, dim);
  Vector xp = x, xm = x;
  for (Index j = 0; j < dim; ++j) {
    const double h = 1e-8 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (nonlinearity(xp) - nonlinearity(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

namespace {

constexpr double kSafety = 0.9;
constexpr double kGrowthCap = 2.0;
constexpr double kShrinkFloor = 0.2;

double wrms(const Vector& err, const Vector& scale_state, double atol, double rtol) {
  double acc = 0.0;
  for (Index i = 0; i < err.size(); ++i) {
    const double w = atol + rtol * std::abs(scale_state[i]);
    const double e = err[i] / w;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

/// Factorization of c*E - A - dF/dx, reused across steps until the leading
/// coefficient drifts or Newton convergence degrades.
class NewtonMatrix {
public:
  NewtonMatrix(const ImplicitSystem& sys, IntegratorStats& stats)
      : sys_(sys), stats_(stats) {
    use_sparse_ = sys.prefer_sparse_solver &&
                  (!sys.nonlinearity || sys.nonlin_jacobian_sparse != nullptr);
    if (!use_sparse_) {
      mass_dense_ = Matrix(sys.mass);
      linear_dense_ = Matrix(sys.linear);
    }
  }

  bool factored() const { return factored_; }
  double coefficient() const { return c_at_; }

  bool factor(double c, const Vector& x) {
    ++stats_.jacobians;
    ++stats_.factorizations;
    if (use_sparse_) {
      SparseMatrix M = c * sys_.mass - sys_.linear;
      if (sys_.nonlin_jacobian_sparse) M = (M - sys_.nonlin_jacobian_sparse(x)).eval();
      M.makeCompressed();
      sparse_lu_.compute(M);
      ok_ = sparse_lu_.info() == Eigen::Success;
    } else {
      Matrix M = c * mass_dense_ - linear_dense_;
      if (sys_.nonlinearity) M -= sys_.jacobian_dense(x);
      dense_lu_.compute(M);
      ok_ = true; // singularity surfaces as a non-finite solve
    }
    factored_ = true;
    c_at_ = c;
    return ok_;
  }

  bool ok() const { return ok_; }

  Vector solve(const Vector& b) const {
    return use_sparse_ ? Vector(sparse_lu_.solve(b)) : Vector(dense_lu_.solve(b));
  }

  void invalidate() { factored_ = false; }

private:
  const ImplicitSystem& sys_;
  IntegratorStats& stats_;
  bool use_sparse_ = false;
  bool factored_ = false;
  bool ok_ = false;
  double c_at_ = 0.0;
  Matrix mass_dense_, linear_dense_;
  Eigen::PartialPivLU<Matrix> dense_lu_;
  Eigen::SparseLU<SparseMatrix> sparse_lu_;
};

enum class NewtonOutcome { converged, slow, nonfinite };

NewtonOutcome newton_iterate(const NewtonMatrix& mat,
                             const std::function<Vector(const Vector&)>& residual,
                             Vector& z, const Vector& scale_state,
                             const IntegratorConfig& cfg, IntegratorStats& stats) {
  if (!mat.ok()) return NewtonOutcome::nonfinite;
  double last_norm = -1.0;
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    Vector r;
    try {
      r = residual(z);
    } catch (const std::exception&) {
      return NewtonOutcome::nonfinite;
    }
    if (!r.allFinite()) return NewtonOutcome::nonfinite;
    const Vector dz = mat.solve(-r);
    if (!dz.allFinite()) return NewtonOutcome::nonfinite;
    z += dz;
    ++stats.newton_iters;
    const double dn = wrms(dz, scale_state, cfg.abs_tol, cfg.rel_tol);
    const double tiny = 4e-15 * (1.0 + z.lpNorm<Eigen::Infinity>());
    if (dn <= cfg.newton_tol || dz.lpNorm<Eigen::Infinity>() <= tiny)
      return NewtonOutcome::converged;
    if (last_norm >= 0.0 && dn > 0.9 * last_norm) return NewtonOutcome::slow;
    last_norm = dn;
  }
  return NewtonOutcome::slow;
}

/// Value at t of the polynomial through (ts[i], xs[i]).
Vector neville(const std::vector<double>& ts, const std::vector<Vector>& xs, double t) {
  std::vector<Vector> w = xs;
  const size_t n = w.size();
  for (size_t j = 1; j < n; ++j)
    for (size_t i = 0; i + j < n; ++i)
      w[i] = ((t - ts[i + j]) * w[i] + (ts[i] - t) * w[i + 1]) / (ts[i] - ts[i + j]);
  return w[0];
}

/// Lagrange differentiation weights at nodes[0] for values at all nodes.
std::vector<double> bdf_derivative_weights(const std::vector<double>& nodes) {
  const size_t P = nodes.size();
  std::vector<double> d(P, 0.0);
  for (size_t i = 1; i < P; ++i) d[0] += 1.0 / (nodes[0] - nodes[i]);
  for (size_t j = 1; j < P; ++j) {
    double num = 1.0, den = 1.0;
    for (size_t i = 0; i < P; ++i) {
      if (i == j) continue;
      if (i != 0) num *= (nodes[0] - nodes[i]);
      den *= (nodes[j] - nodes[i]);
    }
    d[j] = num / den;
  }
  return d;
}

struct StepLimits {
  double h0, hmin, hmax;
};

StepLimits step_limits(const IntegratorConfig& cfg, double span, double h_guess) {
  StepLimits lim;
  lim.hmax = cfg.max_step > 0 ? cfg.max_step : span / 10.0;
  lim.hmin = cfg.min_step > 0 ? cfg.min_step : span * 1e-14;
  lim.h0 = cfg.initial_step > 0 ? cfg.initial_step : h_guess;
  lim.h0 = std::clamp(lim.h0, lim.hmin, lim.hmax);
  return lim;
}

Trajectory finalize(std::vector<double> times, const std::vector<Vector>& states,
                    const std::vector<Vector>& derivs, std::vector<int> orders,
                    Method method, IntegratorStats stats) {
  Trajectory traj;
  traj.method = method;
  traj.stats = stats;
  traj.times = std::move(times);
  traj.orders = std::move(orders);
  const Index dim = states.front().size();
  traj.states.resize(dim, static_cast<Index>(states.size()));
  for (size_t i = 0; i < states.size(); ++i) traj.states.col(static_cast<Index>(i)) = states[i];
  if (!derivs.empty()) {
    traj.derivatives.resize(dim, static_cast<Index>(derivs.size()));
    for (size_t i = 0; i < derivs.size(); ++i)
      traj.derivatives.col(static_cast<Index>(i)) = derivs[i];
  }
  return traj;
}

Trajectory integrate_trapezoidal(const ImplicitSystem& sys, double t0, double t1,
                                 const Vector& init, const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  IntegratorStats stats;

  Eigen::SparseLU<SparseMatrix> mass_lu;
  if (!sys.mass_is_identity) {
    SparseMatrix E = sys.mass;
    E.makeCompressed();
    mass_lu.compute(E);
    if (mass_lu.info() != Eigen::Success)
      throw IntegrationError("trapezoidal: singular mass matrix", t0);
  }
  auto state_derivative = [&](double t, const Vector& x) -> Vector {
    const Vector f = sys.rhs(t, x);
    return sys.mass_is_identity ? f : Vector(mass_lu.solve(f));
  };

  std::vector<double> times;
  std::vector<Vector> states, derivs;
  double t = t0;
  Vector x = init;
  Vector xdot = state_derivative(t, x);
  if (!xdot.allFinite())
    throw IntegrationError("trapezoidal: non-finite derivative at the initial state", t0);
  times.push_back(t);
  states.push_back(x);
  derivs.push_back(xdot);

  const double d0 = wrms(xdot, x, cfg.abs_tol, cfg.rel_tol);
  const StepLimits lim = step_limits(cfg, span, 0.01 / (d0 + 1e-10));
  double h = cfg.fixed_step > 0 ? cfg.fixed_step : lim.h0;

  NewtonMatrix mat(sys, stats);
  int consecutive_failures = 0;

  while (t < t1 - 1e-12 * span) {
    if (stats.steps + stats.rejected > cfg.max_steps)
      throw IntegrationError("trapezoidal: step budget exhausted", t);
    if (cfg.fixed_step <= 0) {
      h = std::clamp(h, lim.hmin, lim.hmax);
      if (t + 1.05 * h >= t1) h = t1 - t;
    } else if (t + h > t1 + 1e-12 * span) {
      h = t1 - t;
    }

    const double tn = t + h;
    const Vector f0 = sys.mass_is_identity ? Vector(xdot) : Vector(sys.mass * xdot);
    const double c = 2.0 / h; // factorization holds cE - A - Fx = (2/h) J_trap
    auto residual = [&](const Vector& z) -> Vector {
      return c * (sys.mass * (z - x)) - (f0 + sys.rhs(tn, z));
    };

    Vector z = x + h * xdot;
    bool fresh = false;
    if (!mat.factored() || std::abs(c - mat.coefficient()) > 0.3 * std::abs(mat.coefficient())) {
      fresh = true;
      mat.factor(c, z);
    }
    NewtonOutcome out = newton_iterate(mat, residual, z, x, cfg, stats);
    if (out != NewtonOutcome::converged && !fresh) {
      z = x + h * xdot;
      mat.factor(c, z);
      out = newton_iterate(mat, residual, z, x, cfg, stats);
    }
    bool step_ok = (out == NewtonOutcome::converged) && z.allFinite();

    Vector xdot1;
    if (step_ok) {
      try {
        xdot1 = state_derivative(tn, z);
        step_ok = xdot1.allFinite();
      } catch (const std::exception&) {
        step_ok = false;
      }
    }
    if (!step_ok) {
      ++stats.rejected;
      ++consecutive_failures;
      if (consecutive_failures > 60 || h <= lim.hmin * (1.0 + 1e-12))
        throw IntegrationError("trapezoidal: step size underflow at t = " + std::to_string(t), t);
      h *= 0.25;
      mat.invalidate();
      continue;
    }

    // embedded comparison with the backward Euler companion sharing f(tn, z)
    const Vector est_vec = 0.5 * h * (xdot - xdot1);
    const double err = wrms(est_vec, z, cfg.abs_tol, cfg.rel_tol);

    if (cfg.fixed_step > 0 || err <= 1.0) {
      t = tn;
      x = z;
      xdot = xdot1;
      times.push_back(t);
      states.push_back(x);
      derivs.push_back(xdot);
      ++stats.steps;
      consecutive_failures = 0;
      if (cfg.fixed_step <= 0)
        h *= std::clamp(kSafety * std::pow(std::max(err, 1e-10), -0.5), kShrinkFloor, kGrowthCap);
    } else {
      ++stats.rejected;
      h *= std::clamp(kSafety * std::pow(err, -0.5), kShrinkFloor, 0.9);
      if (h <= lim.hmin * (1.0 + 1e-12))
        throw IntegrationError("trapezoidal: step size underflow at t = " + std::to_string(t), t);
    }
  }

  std::vector<int> orders(states.size(), 2);
  return finalize(std::move(times), states, derivs, std::move(orders), Method::trapezoidal,
                  stats);
}

Trajectory integrate_bdf(const ImplicitSystem& sys, double t0, double t1, const Vector& init,
                         const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  const int max_order = std::clamp(cfg.max_order, 1, 5);
  IntegratorStats stats;

  std::vector<double> times;
  std::vector<Vector> states;
  for (const auto& [wt, wx] : cfg.warm_start) {
    if (wt >= t0) throw std::invalid_argument("integrate: warm-start times must precede the span");
    times.push_back(wt);
    states.push_back(wx);
  }
  const size_t preload = times.size();
  times.push_back(t0);
  states.push_back(init);
  std::vector<int> orders(times.size(), 1);

  const bool projecting_start = sys.dae_start && preload == 0 && cfg.fixed_step <= 0;
  const StepLimits lim = step_limits(cfg, span, span * (projecting_start ? 1e-6 : 1e-4));
  double h = cfg.fixed_step > 0 ? cfg.fixed_step : lim.h0;
  int k = cfg.fixed_step > 0 ? std::min<int>(max_order, static_cast<int>(times.size())) : 1;
  int steps_at_order = 0;

  NewtonMatrix mat(sys, stats);
  int consecutive_failures = 0;

  // interpolate the newest `points` accepted values to tn
  auto predictor = [&](int points, double tn) -> Vector {
    const int avail = std::min<int>(points, static_cast<int>(times.size()));
    std::vector<double> ts(static_cast<size_t>(avail));
    std::vector<Vector> xs(static_cast<size_t>(avail));
    for (int i = 0; i < avail; ++i) {
      ts[static_cast<size_t>(i)] = times[times.size() - 1 - static_cast<size_t>(i)];
      xs[static_cast<size_t>(i)] = states[states.size() - 1 - static_cast<size_t>(i)];
    }
    return neville(ts, xs, tn);
  };

  double t = t0;
  while (t < t1 - 1e-12 * span) {
    if (stats.steps + stats.rejected > cfg.max_steps)
      throw IntegrationError("bdf: step budget exhausted", t);
    k = std::min<int>(k, static_cast<int>(times.size()));
    if (cfg.fixed_step <= 0) {
      h = std::clamp(h, lim.hmin, lim.hmax);
      if (t + 1.05 * h >= t1) h = t1 - t;
    } else if (t + h > t1 + 1e-12 * span) {
      h = t1 - t;
    }
    const double tn = t + h;

    std::vector<double> nodes(static_cast<size_t>(k) + 1);
    nodes[0] = tn;
    for (int j = 1; j <= k; ++j)
      nodes[static_cast<size_t>(j)] = times[times.size() - static_cast<size_t>(j)];
    const std::vector<double> d = bdf_derivative_weights(nodes);
    Vector rstate = Vector::Zero(init.size());
    for (int j = 1; j <= k; ++j)
      rstate += d[static_cast<size_t>(j)] * states[states.size() - static_cast<size_t>(j)];

    const Vector& xold = states.back();
    auto residual = [&](const Vector& z) -> Vector {
      return sys.mass * (d[0] * z + rstate) - sys.rhs(tn, z);
    };

    const Vector xpred = predictor(k + 1, tn);
    Vector z = xpred;
    const double c = d[0];
    bool fresh = false;
    if (!mat.factored() || std::abs(c - mat.coefficient()) > 0.3 * std::abs(mat.coefficient())) {
      fresh = true;
      mat.factor(c, z);
    }
    NewtonOutcome out = newton_iterate(mat, residual, z, xold, cfg, stats);
    if (out != NewtonOutcome::converged && !fresh) {
      z = xpred;
      mat.factor(c, z);
      out = newton_iterate(mat, residual, z, xold, cfg, stats);
    }
    if (out != NewtonOutcome::converged || !z.allFinite()) {
      ++stats.rejected;
      ++consecutive_failures;
      if (consecutive_failures > 60 || h <= lim.hmin * (1.0 + 1e-12))
        throw IntegrationError("bdf: step size underflow at t = " + std::to_string(t), t);
      h *= 0.25;
      if (consecutive_failures % 3 == 0 && k > 1) {
        k -= 1;
        steps_at_order = 0;
      }
      mat.invalidate();
      continue;
    }

    // predictor-corrector difference estimates the order-k local error
    const Vector est_vec = (z - xpred) / static_cast<double>(k + 1);
    const double err = wrms(est_vec, z, cfg.abs_tol, cfg.rel_tol);
    // the first step after a projected DAE start absorbs the consistency
    // correction, which no step size can shrink
    const bool project_accept = projecting_start && stats.steps == 0;

    if (cfg.fixed_step > 0 || err <= 1.0 || project_accept) {
      int knew = k;
      double factor = project_accept && err > 1.0
                          ? 1.0
                          : kSafety * std::pow(std::max(err, 1e-10), -1.0 / (k + 1));
      if (cfg.fixed_step <= 0 && steps_at_order >= k + 2) {
        // pick the order whose estimate permits the largest next step
        if (k > 1) {
          const double errm =
              wrms((z - predictor(k, tn)) / static_cast<double>(k), z, cfg.abs_tol, cfg.rel_tol);
          const double fm = kSafety * std::pow(std::max(errm, 1e-10), -1.0 / k);
          if (fm > 1.2 * factor) {
            factor = fm;
            knew = k - 1;
          }
        }
        if (k < max_order && static_cast<int>(times.size()) >= k + 2) {
          const double errp = wrms((z - predictor(k + 2, tn)) / static_cast<double>(k + 2), z,
                                   cfg.abs_tol, cfg.rel_tol);
          const double fp = kSafety * std::pow(std::max(errp, 1e-10), -1.0 / (k + 2));
          if (fp > 1.2 * factor) {
            factor = fp;
            knew = k + 1;
          }
        }
      }

      t = tn;
      times.push_back(t);
      states.push_back(z);
      orders.push_back(k);
      ++stats.steps;
      consecutive_failures = 0;
      ++steps_at_order;
      if (knew != k) {
        k = knew;
        steps_at_order = 0;
      }
      if (cfg.fixed_step <= 0)
        h *= std::clamp(factor, kShrinkFloor, kGrowthCap);
      else
        k = std::min<int>(max_order, static_cast<int>(times.size()));
    } else {
      ++stats.rejected;
      ++consecutive_failures;
      h *= std::clamp(kSafety * std::pow(err, -1.0 / (k + 1)), kShrinkFloor, 0.9);
      if (consecutive_failures % 3 == 0 && k > 1) {
        k -= 1;
        steps_at_order = 0;
      }
      if (h <= lim.hmin * (1.0 + 1e-12))
        throw IntegrationError("bdf: step size underflow at t = " + std::to_string(t), t);
    }
  }

  if (preload > 0) {
    times.erase(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(preload));
    states.erase(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(preload));
    orders.erase(orders.begin(), orders.begin() + static_cast<std::ptrdiff_t>(preload));
  }
  return finalize(std::move(times), states, {}, std::move(orders), Method::bdf, stats);
}

} // namespace

Trajectory integrate(const ImplicitSystem& sys, std::pair<double, double> span,
                     const Vector& init, const IntegratorConfig& cfg) {
  if (!(span.second > span.first)) throw std::invalid_argument("integrate: empty time span");
  if (init.size() != sys.dim)
    throw std::invalid_argument("integrate: initial value size mismatch");
  if (cfg.method == Method::trapezoidal)
    return integrate_trapezoidal(sys, span.first, span.second, init, cfg);
  return integrate_bdf(sys, span.first, span.second, init, cfg);
}

namespace {

Index locate_segment(const std::vector<double>& times, double t) {
  // first index s >= 1 with times[s] >= t
  const auto it = std::lower_bound(times.begin() + 1, times.end(), t);
  return std::min<Index>(static_cast<Index>(it - times.begin()), static_cast<Index>(times.size()) - 1);
}

} // namespace

Vector interpolate_at(const Trajectory& traj, double t) {
  const double span = traj.t_back() - traj.t_front();
  const double slack = 1e-10 * std::max(span, 1.0);
  if (t < traj.t_front() - slack || t > traj.t_back() + slack)
    throw std::invalid_argument("interpolate: time outside the trajectory span");
  t = std::clamp(t, traj.t_front(), traj.t_back());

  const Index s = locate_segment(traj.times, t);
  if (t == traj.times[static_cast<size_t>(s)]) return traj.states.col(s);
  if (t == traj.times[static_cast<size_t>(s) - 1]) return traj.states.col(s - 1);

  if (traj.method == Method::trapezoidal) {
    const double ta = traj.times[static_cast<size_t>(s) - 1], tb = traj.times[static_cast<size_t>(s)];
    const double hseg = tb - ta;
    const double th = (t - ta) / hseg;
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    return h00 * traj.states.col(s - 1) + h10 * hseg * traj.derivatives.col(s - 1) +
           h01 * traj.states.col(s) + h11 * hseg * traj.derivatives.col(s);
  }

  // multistep: polynomial through the points the step to times[s] was built on
  const int ord = traj.orders[static_cast<size_t>(s)];
  const Index first = std::max<Index>(0, s - ord);
  std::vector<double> ts;
  std::vector<Vector> xs;
  for (Index i = s; i >= first; --i) {
    ts.push_back(traj.times[static_cast<size_t>(i)]);
    xs.push_back(traj.states.col(i));
  }
  return neville(ts, xs, t);
}

Matrix interpolate(const Trajectory& traj, const std::vector<double>& times) {
  Matrix out(traj.dim(), static_cast<Index>(times.size()));
  for (size_t i = 0; i < times.size(); ++i)
    out.col(static_cast<Index>(i)) = interpolate_at(traj, times[i]);
  return out;
}

std::vector<double> uniform_grid(double t0, double t1, Index count) {
  std::vector<double> g(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i)
    g[static_cast<size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = t1;
  return g;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  std::fprintf(fp, "t");
  for (Index i = 0; i < traj.dim(); ++i) std::fprintf(fp, ",x%lld", static_cast<long long>(i));
  std::fprintf(fp, "\n");
  for (Index c = 0; c < traj.points(); ++c) {
    std::fprintf(fp, "%.17g", traj.times[static_cast<size_t>(c)]);
    for (Index i = 0; i < traj.dim(); ++i) std::fprintf(fp, ",%.17g", traj.states(i, c));
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

void write_trajectory_binary(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trajectory_binary: cannot open " + path);
  const char magic[4] = {'P', 'C', 'M', 'T'};
  out.write(magic, 4);
  const std::int64_t dim = traj.dim(), pts = traj.points();
  const std::int64_t method = traj.method == Method::trapezoidal ? 0 : 1;
  const std::int64_t has_derivs = traj.derivatives.size() > 0 ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&dim), 8);
  out.write(reinterpret_cast<const char*>(&pts), 8);
  out.write(reinterpret_cast<const char*>(&method), 8);
  out.write(reinterpret_cast<const char*>(&has_derivs), 8);
  out.write(reinterpret_cast<const char*>(traj.times.data()), 8 * pts);
  out.write(reinterpret_cast<const char*>(traj.states.data()), 8 * dim * pts);
  if (has_derivs)
    out.write(reinterpret_cast<const char*>(traj.derivatives.data()), 8 * dim * pts);
  std::vector<std::int32_t> ords(traj.orders.begin(), traj.orders.end());
  out.write(reinterpret_cast<const char*>(ords.data()), 4 * static_cast<std::int64_t>(ords.size()));
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_trajectory_binary: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::string(magic, 4) != "PCMT")
    throw std::runtime_error("read_trajectory_binary: bad magic in " + path);
  std::int64_t dim, pts, method, has_derivs;
  in.read(reinterpret_cast<char*>(&dim), 8);
  in.read(reinterpret_cast<char*>(&pts), 8);
  in.read(reinterpret_cast<char*>(&method), 8);
  in.read(reinterpret_cast<char*>(&has_derivs), 8);
  Trajectory traj;
  traj.method = method == 0 ? Method::trapezoidal : Method::bdf;
  traj.times.resize(static_cast<size_t>(pts));
  in.read(reinterpret_cast<char*>(traj.times.data()), 8 * pts);
  traj.states.resize(dim, pts);
  in.read(reinterpret_cast<char*>(traj.states.data()), 8 * dim * pts);
  if (has_derivs) {
    traj.derivatives.resize(dim, pts);
    in.read(reinterpret_cast<char*>(traj.derivatives.data()), 8 * dim * pts);
  }
  std::vector<std::int32_t> ords(static_cast<size_t>(pts));
  in.read(reinterpret_cast<char*>(ords.data()), 4 * pts);
  traj.orders.assign(ords.begin(), ords.end());
  if (!in) throw std::runtime_error("read_trajectory_binary: truncated file " + path);
  return traj;
}

} // namespace pcmor
