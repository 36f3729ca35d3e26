#ifndef PCMOR_LOWDIM_HPP
#define PCMOR_LOWDIM_HPP

#include <string>
#include <utility>
#include <vector>

#include "pcmor/pcbasis.hpp"
#include "pcmor/timeint.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

enum class BasisTag { phi, psi };

/// Coefficient trajectories of the output expansion on a time grid, either
/// over the full basis or over a reduced basis whose coordinates in the
/// full basis are the columns of cbar.
struct Representation {
  std::vector<double> times;
  Matrix coeffs; // basis_size x |times|
  BasisTag tag = BasisTag::phi;
  Matrix cbar;   // m x r, set when tag == psi

  Index basis_size() const { return coeffs.rows(); }
  Index grid_size() const { return static_cast<Index>(times.size()); }
};

/// Full-basis coordinates: the identity for a full representation, the
/// linear map cbar for a reduced one.
Representation to_phi(const Representation& rep);

/// Output coefficients of a full-order trajectory on a grid: coeffs(:,t) =
/// output_map * state(t).
Representation output_representation(const Trajectory& traj, const Matrix& output_map,
                                     const std::vector<double>& times);

/// The reduced trajectory's own states are the coefficients over the
/// reduced basis; nothing is recomputed.
Representation mor_representation(const Trajectory& rom_traj, const Matrix& cbar,
                                  const std::vector<double>& times);

/// Per-time least squares fit of the full coefficients within the span of
/// cbar, through one QR factorization shared across all times. Throws
/// RankDeficiencyError when cbar loses column rank.
Representation best_approximation(const Representation& fom_phi, const Matrix& cbar);

/// Orthonormal column basis of span(cbar) and its numerical rank, via SVD.
/// Orthonormal coordinates make the reduced basis orthonormal in the
/// underlying function space as well.
std::pair<Matrix, Index> orthonormalize_basis(const Matrix& cbar);

/// Pointwise value of the represented output at (t, p): coefficients are
/// interpolated linearly in t, the basis is evaluated at p.
double evaluate_qoi(const Representation& rep, const BasisSpec& spec, double t, const Vector& p);

/// Time column plus one column per coefficient; a companion file carries
/// cbar for reduced representations.
void write_representation_csv(const Representation& rep, const std::string& path,
                              const std::string& cbar_path = "");

} // namespace pcmor

#endif
