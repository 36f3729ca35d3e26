#include "pcmor/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pcmor {

ErrorReport l2_error(const Representation& a, const Representation& b, Index r,
                     const std::string& kind) {
  if (a.grid_size() != b.grid_size())
    throw std::invalid_argument("l2_error: representations live on different grids");
  const double span = std::max(1.0, std::abs(a.times.back() - a.times.front()));
  for (size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-9 * span)
      throw std::invalid_argument("l2_error: representations live on different grids");

  const Representation pa = to_phi(a), pb = to_phi(b);
  if (pa.basis_size() != pb.basis_size())
    throw std::invalid_argument("l2_error: representations use different full bases");

  ErrorReport rep;
  rep.times = a.times;
  rep.r = r;
  rep.kind = kind;
  rep.l2 = (pa.coeffs - pb.coeffs).colwise().norm();
  rep.max_error = rep.l2.maxCoeff();
  return rep;
}

StatSeries statistics(const Representation& rep) {
  const Representation phi = to_phi(rep);
  StatSeries out;
  out.times = phi.times;
  out.mean = phi.coeffs.row(0);
  out.stddev = phi.coeffs.bottomRows(phi.basis_size() - 1).colwise().norm();
  return out;
}

double spectral_norm(const Matrix& M, double tol, int max_iter) {
  if (M.size() == 0) return 0.0;
  Vector v = Vector::Ones(M.cols());
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = M.transpose() * (M * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    w /= wn;
    const double next = wn;
    if (it > 0 && std::abs(next - lambda) <= tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
    v = w;
  }
  return std::sqrt(lambda);
}

BoundReport theorem_bound(const PodResult& podres, const Matrix& output_map,
                          const Matrix& snapshots, const std::vector<double>& times, Index r) {
  if (static_cast<Index>(times.size()) != snapshots.cols())
    throw std::invalid_argument("theorem_bound: snapshot/time count mismatch");
  if (snapshots.cols() <= r)
    throw std::invalid_argument("theorem_bound: more snapshots than reduced dimensions required");

  BoundReport rep;
  rep.r = r;
  rep.sigma_next =
      r < podres.singular_values.size() ? podres.singular_values[r] : 0.0;
  rep.c_norm = spectral_norm(output_map);

  double dt_max = 0.0;
  for (size_t j = 1; j < times.size(); ++j) dt_max = std::max(dt_max, times[j] - times[j - 1]);
  rep.dt_max = dt_max;

  // second-order differences inside, one-sided at the ends
  const Index cols = snapshots.cols();
  double deriv = 0.0;
  for (Index j = 0; j < cols; ++j) {
    Vector d;
    if (j == 0)
      d = (snapshots.col(1) - snapshots.col(0)) / (times[1] - times[0]);
    else if (j == cols - 1)
      d = (snapshots.col(cols - 1) - snapshots.col(cols - 2)) /
          (times[static_cast<size_t>(cols) - 1] - times[static_cast<size_t>(cols) - 2]);
    else
      d = (snapshots.col(j + 1) - snapshots.col(j - 1)) /
          (times[static_cast<size_t>(j) + 1] - times[static_cast<size_t>(j) - 1]);
    deriv = std::max(deriv, d.lpNorm<Eigen::Infinity>());
  }
  rep.deriv_inf = deriv;

  rep.bound_value =
      rep.c_norm *
      (rep.sigma_next + std::sqrt(static_cast<double>(snapshots.rows())) * dt_max * deriv);
  return rep;
}

void write_error_report_csv(const std::vector<ErrorReport>& reports, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_error_report_csv: cannot open " + path);
  std::fprintf(fp, "r,kind,t,l2_error\n");
  for (const auto& rep : reports)
    for (size_t i = 0; i < rep.times.size(); ++i)
      std::fprintf(fp, "%lld,%s,%.17g,%.17g\n", static_cast<long long>(rep.r), rep.kind.c_str(),
                   rep.times[i], rep.l2[static_cast<Index>(i)]);
  std::fclose(fp);
}

void write_statistics_csv(const StatSeries& stats, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_statistics_csv: cannot open " + path);
  std::fprintf(fp, "t,mean,std\n");
  for (size_t i = 0; i < stats.times.size(); ++i)
    std::fprintf(fp, "%.17g,%.17g,%.17g\n", stats.times[i], stats.mean[static_cast<Index>(i)],
                 stats.stddev[static_cast<Index>(i)]);
  std::fclose(fp);
}

void write_bound_reports_csv(const std::vector<BoundReport>& reports, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_bound_reports_csv: cannot open " + path);
  std::fprintf(fp, "r,sigma_next,c_norm,dt_max,deriv_inf_estimate,bound_value\n");
  for (const auto& rep : reports)
    std::fprintf(fp, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(rep.r),
                 rep.sigma_next, rep.c_norm, rep.dt_max, rep.deriv_inf, rep.bound_value);
  std::fclose(fp);
}

} // namespace pcmor
