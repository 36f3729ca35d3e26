#include "pcmor/collocation.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pcmor {

CollocationSystem assemble_collocation(const ParametricSystem& sys, const BasisSpec& spec,
                                       const QuadratureRule& rule) {
  if (spec.param_dim() != sys.param_dim())
    throw std::invalid_argument("assemble_collocation: basis/model parameter dimension mismatch");

  auto ctx = std::make_shared<CollocationContext>();
  ctx->model = sys;
  ctx->basis = spec;
  ctx->rule = rule;
  ctx->phi = evaluate_basis_at(spec, rule.nodes);
  ctx->k = rule.size();
  ctx->n = sys.n;
  ctx->m = spec.dim();

  const Index k = ctx->k, n = ctx->n, m = ctx->m;
  ctx->Es.reserve(static_cast<size_t>(k));
  ctx->As.reserve(static_cast<size_t>(k));
  ctx->Bs.reserve(static_cast<size_t>(k));
  ctx->x0s.reserve(static_cast<size_t>(k));

  CollocationSystem csys;
  std::vector<Triplet> etrips, atrips;
  csys.Bhat = Matrix::Zero(k * n, sys.n_in);
  csys.x0hat.resize(k * n);

  for (Index l = 0; l < k; ++l) {
    const Vector p = rule.nodes.row(l).transpose();
    Matrix El = sys.E.eval(p), Al = sys.A.eval(p);
    Matrix Bl = sys.n_in > 0 ? sys.B.eval(p) : Matrix(n, 0);
    const Vector x0l = sys.is_dae ? consistent_init(sys, p) : sys.x0(p);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        if (El(a, b) != 0.0) etrips.emplace_back(l * n + a, l * n + b, El(a, b));
        if (Al(a, b) != 0.0) atrips.emplace_back(l * n + a, l * n + b, Al(a, b));
      }
    if (sys.n_in > 0) csys.Bhat.middleRows(l * n, n) = Bl;
    csys.x0hat.segment(l * n, n) = x0l;
    ctx->Es.push_back(std::move(El));
    ctx->As.push_back(std::move(Al));
    ctx->Bs.push_back(std::move(Bl));
    ctx->x0s.push_back(x0l);
  }
  csys.Ehat.resize(k * n, k * n);
  csys.Ahat.resize(k * n, k * n);
  csys.Ehat.setFromTriplets(etrips.begin(), etrips.end());
  csys.Ahat.setFromTriplets(atrips.begin(), atrips.end());

  // row i of the output map: gamma_l Phi_i(p_l) C_o(p_l) per node block
  csys.Chat.resize(static_cast<size_t>(sys.n_out));
  for (Index o = 0; o < sys.n_out; ++o) {
    Matrix Co(m, k * n);
    for (Index l = 0; l < k; ++l) {
      const Matrix Cl = sys.C.eval(rule.nodes.row(l).transpose());
      for (Index i = 0; i < m; ++i)
        Co.block(i, l * n, 1, n) = (rule.weights[l] * ctx->phi(l, i)) * Cl.row(o);
    }
    csys.Chat[static_cast<size_t>(o)] = std::move(Co);
  }

  csys.ctx = ctx;
  return csys;
}

Vector collocation_output(const CollocationSystem& csys, const Vector& xhat, Index output) {
  if (xhat.size() != csys.dim())
    throw std::invalid_argument("collocation_output: state dimension mismatch");
  return csys.Chat.at(static_cast<size_t>(output)) * xhat;
}

ImplicitSystem CollocationSystem::to_implicit() const {
  auto c = ctx;
  ImplicitSystem sys;
  sys.dim = dim();
  sys.mass = Ehat;
  sys.linear = Ahat;
  sys.input_matrix = Bhat;
  sys.input = c->model.input;
  sys.prefer_sparse_solver = true;
  sys.dae_start = c->model.is_dae;
  if (c->model.F) {
    sys.nonlinearity = [c](const Vector& xhat) -> Vector {
      Vector out(c->k * c->n);
      for (Index l = 0; l < c->k; ++l)
        out.segment(l * c->n, c->n) =
            c->model.F(xhat.segment(l * c->n, c->n), c->rule.nodes.row(l).transpose());
      return out;
    };
    sys.nonlin_jacobian_sparse = [c](const Vector& xhat) -> SparseMatrix {
      std::vector<Triplet> trips;
      for (Index l = 0; l < c->k; ++l) {
        const Matrix fx = nonlinearity_jacobian(c->model, xhat.segment(l * c->n, c->n),
                                                c->rule.nodes.row(l).transpose());
        for (Index a = 0; a < c->n; ++a)
          for (Index b = 0; b < c->n; ++b)
            if (fx(a, b) != 0.0) trips.emplace_back(l * c->n + a, l * c->n + b, fx(a, b));
      }
      SparseMatrix J(c->k * c->n, c->k * c->n);
      J.setFromTriplets(trips.begin(), trips.end());
      return J;
    };
  }
  return sys;
}

ImplicitSystem CollocationSystem::node_implicit(Index l) const {
  auto c = ctx;
  ImplicitSystem sys;
  sys.dim = c->n;
  sys.mass = c->Es[static_cast<size_t>(l)].sparseView();
  sys.linear = c->As[static_cast<size_t>(l)].sparseView();
  sys.input_matrix = c->Bs[static_cast<size_t>(l)];
  sys.input = c->model.input;
  sys.dae_start = c->model.is_dae;
  if (c->model.F) {
    const Vector p = c->rule.nodes.row(l).transpose();
    sys.nonlinearity = [c, p](const Vector& x) -> Vector { return c->model.F(x, p); };
    sys.nonlin_jacobian = [c, p](const Vector& x) -> Matrix {
      return nonlinearity_jacobian(c->model, x, p);
    };
  }
  return sys;
}

namespace {

std::uint64_t fnv1a(const void* data, size_t bytes, std::uint64_t seed = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace

Matrix solve_collocation_nodes(const CollocationSystem& csys, const IntegratorConfig& cfg,
                               const std::vector<double>& grid, const std::string& cache_dir) {
  const CollocationContext& c = *csys.ctx;
  Matrix snapshots(c.k * c.n, static_cast<Index>(grid.size()));
  const std::pair<double, double> span(grid.front(), grid.back());

  for (Index l = 0; l < c.k; ++l) {
    std::string cache_file;
    if (!cache_dir.empty()) {
      std::uint64_t h = fnv1a(c.rule.nodes.row(l).data(),
                              sizeof(double) * static_cast<size_t>(c.rule.nodes.cols()));
      h = fnv1a(&cfg.rel_tol, sizeof(double), h);
      h = fnv1a(&cfg.abs_tol, sizeof(double), h);
      h = fnv1a(grid.data(), sizeof(double) * grid.size(), h);
      std::filesystem::create_directories(cache_dir);
      cache_file = cache_dir + "/node_" + std::to_string(h) + ".bin";
      std::ifstream in(cache_file, std::ios::binary);
      if (in) {
        Matrix block(c.n, static_cast<Index>(grid.size()));
        in.read(reinterpret_cast<char*>(block.data()),
                static_cast<std::streamsize>(sizeof(double)) * block.size());
        if (in) {
          snapshots.middleRows(l * c.n, c.n) = block;
          continue;
        }
      }
    }

    const Trajectory traj = integrate(csys.node_implicit(l), span, c.x0s[static_cast<size_t>(l)], cfg);
    const Matrix block = interpolate(traj, grid);
    snapshots.middleRows(l * c.n, c.n) = block;

    if (!cache_file.empty()) {
      std::ofstream out(cache_file, std::ios::binary);
      out.write(reinterpret_cast<const char*>(block.data()),
                static_cast<std::streamsize>(sizeof(double)) * block.size());
    }
  }
  return snapshots;
}

} // namespace pcmor
