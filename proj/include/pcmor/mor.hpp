#ifndef PCMOR_MOR_HPP
#define PCMOR_MOR_HPP

#include <functional>
#include <string>
#include <vector>

#include "pcmor/collocation.hpp"
#include "pcmor/galerkin.hpp"
#include "pcmor/timeint.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

struct PodResult {
  Vector singular_values; // all min(N, l), nonincreasing
  Matrix left_vectors;    // N x rank, orthonormal columns
  Index snapshot_count = 0;
  Index state_dim = 0;

  Index rank() const { return left_vectors.cols(); }
};

/// Singular value decomposition of the snapshot matrix. Uses the Gram
/// matrix of the snapshots (with re-orthonormalization) when the state
/// dimension dominates the snapshot count, a direct SVD otherwise.
/// Columns beyond the numerical rank (sigma < 1e-14 sigma_1) are dropped;
/// each kept column has its first significant entry made positive.
PodResult pod(const Matrix& snapshots);

/// First r left singular vectors.
Matrix projection_basis(const PodResult& podres, Index r);

/// Projected system: matrices congruent with T_r on both sides (Galerkin
/// projection), the nonlinearity wrapped so one evaluation costs one
/// evaluation of the full-order nonlinearity.
struct ReducedModel {
  Matrix Ebar, Abar;        // r x r
  Matrix Bbar;              // r x n_in
  std::vector<Matrix> Cbar; // one m x r output map per output
  Matrix Tr;                // N x r
  Vector v0bar;             // r
  std::function<Vector(const Vector&)> Fbar;
  std::function<Matrix(const Vector&)> Fbar_jacobian;
  std::function<Vector(double)> input;
  bool mass_is_identity = false;
  bool dae_start = false;

  Index r() const { return Ebar.rows(); }
  ImplicitSystem to_implicit() const;
};

ReducedModel reduce(const GalerkinSystem& fom, const Matrix& Tr);
ReducedModel reduce(const CollocationSystem& fom, const Matrix& Tr);

void write_singular_values_csv(const PodResult& podres, const std::string& path);

} // namespace pcmor

#endif
