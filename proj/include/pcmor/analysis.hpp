#ifndef PCMOR_ANALYSIS_HPP
#define PCMOR_ANALYSIS_HPP

#include <string>
#include <vector>

#include "pcmor/lowdim.hpp"
#include "pcmor/mor.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

struct ErrorReport {
  std::vector<double> times;
  Vector l2;         // per-time distance in the function-space norm
  double max_error = 0.0;
  Index r = 0;
  std::string kind;  // "mor" or "best_approx"
};

/// Pointwise-in-time distance between two represented outputs: the 2-norm
/// of the full-basis coefficient difference, which is the function-space
/// distance by orthonormality. Grids must coincide.
ErrorReport l2_error(const Representation& a, const Representation& b, Index r = 0,
                     const std::string& kind = "");

struct StatSeries {
  std::vector<double> times;
  Vector mean;
  Vector stddev;
};

/// mean(t) = first coefficient; std(t) = 2-norm of the remaining ones.
StatSeries statistics(const Representation& rep);

struct BoundReport {
  Index r = 0;
  double sigma_next = 0.0;
  double c_norm = 0.0;
  double dt_max = 0.0;
  double deriv_inf = 0.0;   // finite-difference surrogate, an estimate only
  double bound_value = 0.0; // c_norm * (sigma_next + sqrt(N) dt_max deriv_inf)
};

/// A-priori bound on the best-approximation error from the decay of the
/// singular values and the snapshot spacing. The derivative maximum is not
/// observable; central differences of the snapshots stand in for it.
BoundReport theorem_bound(const PodResult& podres, const Matrix& output_map,
                          const Matrix& snapshots, const std::vector<double>& times, Index r);

/// Spectral norm by power iteration on M^T M.
double spectral_norm(const Matrix& M, double tol = 1e-10, int max_iter = 500);

void write_error_report_csv(const std::vector<ErrorReport>& reports, const std::string& path);
void write_statistics_csv(const StatSeries& stats, const std::string& path);
void write_bound_reports_csv(const std::vector<BoundReport>& reports, const std::string& path);

} // namespace pcmor

#endif
