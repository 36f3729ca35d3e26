#include "pcmor/lowdim.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pcmor/errors.hpp"

namespace pcmor {

Representation to_phi(const Representation& rep) {
  if (rep.tag == BasisTag::phi) return rep;
  Representation out;
  out.times = rep.times;
  out.coeffs = rep.cbar * rep.coeffs;
  out.tag = BasisTag::phi;
  return out;
}

Representation output_representation(const Trajectory& traj, const Matrix& output_map,
                                     const std::vector<double>& times) {
  Representation rep;
  rep.times = times;
  rep.coeffs = output_map * interpolate(traj, times);
  rep.tag = BasisTag::phi;
  return rep;
}

Representation mor_representation(const Trajectory& rom_traj, const Matrix& cbar,
                                  const std::vector<double>& times) {
  if (rom_traj.dim() != cbar.cols())
    throw std::invalid_argument("mor_representation: trajectory dimension does not match cbar");
  Representation rep;
  rep.times = times;
  rep.coeffs = interpolate(rom_traj, times);
  rep.tag = BasisTag::psi;
  rep.cbar = cbar;
  return rep;
}

Representation best_approximation(const Representation& fom_phi, const Matrix& cbar) {
  if (fom_phi.tag != BasisTag::phi)
    throw std::invalid_argument("best_approximation: full-basis representation required");
  if (fom_phi.basis_size() != cbar.rows())
    throw std::invalid_argument("best_approximation: coefficient count does not match cbar");

  Eigen::ColPivHouseholderQR<Matrix> qr(cbar);
  if (qr.rank() < cbar.cols())
    throw RankDeficiencyError(
        "best_approximation: output matrix is rank deficient (rank " +
            std::to_string(qr.rank()) + " of " + std::to_string(cbar.cols()) +
            "); orthonormalize_basis removes the dependent directions",
        qr.rank());

  Representation rep;
  rep.times = fom_phi.times;
  rep.tag = BasisTag::psi;
  rep.cbar = cbar;
  rep.coeffs = qr.solve(fom_phi.coeffs); // one factorization, all time points
  return rep;
}

std::pair<Matrix, Index> orthonormalize_basis(const Matrix& cbar) {
  Eigen::JacobiSVD<Matrix> svd(cbar, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return {Matrix(cbar.rows(), 0), 0};
  const double cutoff =
      static_cast<double>(std::max(cbar.rows(), cbar.cols())) * sv[0] * 1e-12;
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;
  return {svd.matrixU().leftCols(rank), rank};
}

double evaluate_qoi(const Representation& rep, const BasisSpec& spec, double t, const Vector& p) {
  const double t0 = rep.times.front(), t1 = rep.times.back();
  const double slack = 1e-10 * std::max(t1 - t0, 1.0);
  if (t < t0 - slack || t > t1 + slack)
    throw std::invalid_argument("evaluate_qoi: time outside the representation grid");
  t = std::clamp(t, t0, t1);

  const auto it = std::lower_bound(rep.times.begin() + 1, rep.times.end(), t);
  const Index s = std::min<Index>(static_cast<Index>(it - rep.times.begin()),
                                  rep.grid_size() - 1);
  const double ta = rep.times[static_cast<size_t>(s) - 1], tb = rep.times[static_cast<size_t>(s)];
  const double th = (t - ta) / (tb - ta);
  const Vector w = (1.0 - th) * rep.coeffs.col(s - 1) + th * rep.coeffs.col(s);

  const Vector s_p = evaluate_basis(spec, p);
  if (rep.tag == BasisTag::phi) return s_p.dot(w);
  return s_p.dot(rep.cbar * w);
}

void write_representation_csv(const Representation& rep, const std::string& path,
                              const std::string& cbar_path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_representation_csv: cannot open " + path);
  std::fprintf(fp, "t");
  for (Index i = 0; i < rep.basis_size(); ++i) std::fprintf(fp, ",w%lld", static_cast<long long>(i + 1));
  std::fprintf(fp, "\n");
  for (Index c = 0; c < rep.grid_size(); ++c) {
    std::fprintf(fp, "%.17g", rep.times[static_cast<size_t>(c)]);
    for (Index i = 0; i < rep.basis_size(); ++i) std::fprintf(fp, ",%.17g", rep.coeffs(i, c));
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);

  if (!cbar_path.empty() && rep.tag == BasisTag::psi) {
    std::FILE* fc = std::fopen(cbar_path.c_str(), "w");
    if (!fc) throw std::runtime_error("write_representation_csv: cannot open " + cbar_path);
    for (Index i = 0; i < rep.cbar.rows(); ++i) {
      for (Index j = 0; j < rep.cbar.cols(); ++j)
        std::fprintf(fc, "%s%.17g", j ? "," : "", rep.cbar(i, j));
      std::fprintf(fc, "\n");
    }
    std::fclose(fc);
  }
}

} // namespace pcmor
