#include "pcmor/mor.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pcmor {

namespace {

void fix_column_signs(Matrix& U) {
  for (Index c = 0; c < U.cols(); ++c) {
    const double peak = U.col(c).cwiseAbs().maxCoeff();
    for (Index r = 0; r < U.rows(); ++r) {
      if (std::abs(U(r, c)) > 1e-10 * peak) {
        if (U(r, c) < 0.0) U.col(c) = -U.col(c);
        break;
      }
    }
  }
}

} // namespace

PodResult pod(const Matrix& snapshots) {
  if (snapshots.cols() < 1) throw std::invalid_argument("pod: at least one snapshot required");
  if (!snapshots.allFinite()) throw std::invalid_argument("pod: non-finite snapshot entries");

  const Index N = snapshots.rows(), l = snapshots.cols();
  PodResult res;
  res.snapshot_count = l;
  res.state_dim = N;

  if (N > 4 * l) {
    // one-sided method on the small Gram matrix
    const Matrix G = snapshots.transpose() * snapshots;
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    const Index count = l;
    res.singular_values.resize(count);
    for (Index i = 0; i < count; ++i)
      res.singular_values[i] = std::sqrt(std::max(0.0, es.eigenvalues()[count - 1 - i]));
    const double cutoff = 1e-14 * res.singular_values[0];
    Index rank = 0;
    while (rank < count && res.singular_values[rank] > cutoff) ++rank;
    Matrix U(N, rank);
    for (Index i = 0; i < rank; ++i)
      U.col(i) = snapshots * es.eigenvectors().col(count - 1 - i) / res.singular_values[i];
    // re-orthonormalize in order so leading directions stay put
    for (Index i = 0; i < rank; ++i) {
      for (Index j = 0; j < i; ++j) U.col(i) -= U.col(j).dot(U.col(i)) * U.col(j);
      for (Index j = 0; j < i; ++j) U.col(i) -= U.col(j).dot(U.col(i)) * U.col(j);
      U.col(i) /= U.col(i).norm();
    }
    res.left_vectors = std::move(U);
  } else {
    Eigen::BDCSVD<Matrix> svd(snapshots, Eigen::ComputeThinU);
    res.singular_values = svd.singularValues();
    const double cutoff = 1e-14 * res.singular_values[0];
    Index rank = 0;
    while (rank < res.singular_values.size() && res.singular_values[rank] > cutoff) ++rank;
    res.left_vectors = svd.matrixU().leftCols(rank);
  }
  fix_column_signs(res.left_vectors);
  return res;
}

Matrix projection_basis(const PodResult& podres, Index r) {
  if (r < 1) throw std::invalid_argument("projection_basis: r >= 1 required");
  if (r > podres.rank())
    throw std::invalid_argument("projection_basis: r exceeds the available vector count (" +
                                std::to_string(podres.rank()) + ")");
  return podres.left_vectors.leftCols(r);
}

namespace {

ReducedModel reduce_core(const SparseMatrix& Ehat, const SparseMatrix& Ahat, const Matrix& Bhat,
                         const std::vector<Matrix>& Chat, const Vector& v0,
                         bool mass_is_identity, const Matrix& Tr) {
  ReducedModel rom;
  rom.Tr = Tr;
  rom.Ebar = Tr.transpose() * (Ehat * Tr);
  rom.Abar = Tr.transpose() * (Ahat * Tr);
  rom.Bbar = Tr.transpose() * Bhat;
  rom.Cbar.reserve(Chat.size());
  for (const auto& Co : Chat) rom.Cbar.push_back(Co * Tr);
  rom.v0bar = Tr.transpose() * v0;
  rom.mass_is_identity = mass_is_identity;
  if (mass_is_identity) rom.Ebar = Matrix::Identity(Tr.cols(), Tr.cols());
  return rom;
}

} // namespace

ReducedModel reduce(const GalerkinSystem& fom, const Matrix& Tr) {
  ReducedModel rom = reduce_core(fom.Ehat, fom.Ahat, fom.Bhat, fom.Chat, fom.v0,
                                 fom.mass_is_identity, Tr);
  rom.input = fom.ctx->model.input;
  rom.dae_start = fom.ctx->model.is_dae;
  if (fom.ctx->model.F) {
    auto ctx = fom.ctx;
    const Matrix T = Tr;
    rom.Fbar = [ctx, T](const Vector& vbar) -> Vector {
      GalerkinSystem view;
      view.ctx = ctx;
      return T.transpose() * view.fhat(T * vbar);
    };
    rom.Fbar_jacobian = [ctx, T](const Vector& vbar) -> Matrix {
      GalerkinSystem view;
      view.ctx = ctx;
      return T.transpose() * view.fhat_jacobian_times(T * vbar, T);
    };
  }
  return rom;
}

ReducedModel reduce(const CollocationSystem& fom, const Matrix& Tr) {
  ReducedModel rom =
      reduce_core(fom.Ehat, fom.Ahat, fom.Bhat, fom.Chat, fom.x0hat, false, Tr);
  rom.input = fom.ctx->model.input;
  rom.dae_start = fom.ctx->model.is_dae;
  if (fom.ctx->model.F) {
    const ImplicitSystem coupled = fom.to_implicit();
    const Matrix T = Tr;
    auto F = coupled.nonlinearity;
    auto Js = coupled.nonlin_jacobian_sparse;
    rom.Fbar = [F, T](const Vector& vbar) -> Vector { return T.transpose() * F(T * vbar); };
    rom.Fbar_jacobian = [Js, T](const Vector& vbar) -> Matrix {
      return T.transpose() * (Js(T * vbar) * T);
    };
  }
  return rom;
}

ImplicitSystem ReducedModel::to_implicit() const {
  ImplicitSystem sys;
  sys.dim = r();
  sys.mass = Ebar.sparseView();
  sys.linear = Abar.sparseView();
  sys.input_matrix = Bbar;
  sys.input = input;
  sys.mass_is_identity = mass_is_identity;
  sys.dae_start = dae_start;
  sys.nonlinearity = Fbar;
  sys.nonlin_jacobian = Fbar_jacobian;
  return sys;
}

void write_singular_values_csv(const PodResult& podres, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_singular_values_csv: cannot open " + path);
  std::fprintf(fp, "index,sigma\n");
  for (Index i = 0; i < podres.singular_values.size(); ++i)
    std::fprintf(fp, "%lld,%.17g\n", static_cast<long long>(i + 1), podres.singular_values[i]);
  std::fclose(fp);
}

} // namespace pcmor
