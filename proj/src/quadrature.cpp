#include "pcmor/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <vector>

#include "pcmor/errors.hpp"

namespace pcmor {

Rule1d gauss_legendre_1d(Index n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_1d: n >= 1 required");
  Rule1d rule;
  if (n == 1) {
    rule.nodes = Vector::Zero(1);
    rule.weights = Vector::Ones(1);
    return rule;
  }
  Matrix jacobi = Matrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();

  // enforce the symmetry of the rule exactly: mirror node pairs, zero center
  for (Index i = 0; i < n / 2; ++i) {
    const Index j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule tensor_rule(const ParameterBox& box, Index per_axis, Index node_cap) {
  if (per_axis < 1) throw std::invalid_argument("tensor_rule: per_axis >= 1 required");
  const Index q = box.dim();
  double count = std::pow(static_cast<double>(per_axis), static_cast<double>(q));
  if (count > static_cast<double>(node_cap))
    throw std::invalid_argument("tensor_rule: node count exceeds the cap");
  const Index k = static_cast<Index>(std::llround(count));

  const Rule1d uni = gauss_legendre_1d(per_axis);
  const Vector mid = box.midpoint(), half = box.halfwidth();

  QuadratureRule rule;
  rule.box = box;
  rule.nodes.resize(k, q);
  rule.weights.resize(k);
  for (Index l = 0; l < k; ++l) {
    Index rest = l;
    double w = 1.0;
    for (Index j = 0; j < q; ++j) {
      const Index idx = rest % per_axis;
      rest /= per_axis;
      rule.nodes(l, j) = mid[j] + half[j] * uni.nodes[idx];
      w *= uni.weights[idx];
    }
    rule.weights[l] = w;
  }
  return rule;
}

namespace {

Index growth_nodes(Growth growth, Index level) {
  switch (growth) {
    case Growth::linear: return level;
    case Growth::exponential: return (Index{1} << level) - 1;
  }
  return level;
}

double binomial(Index n, Index k) {
  double v = 1.0;
  for (Index i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// multi-indices l in N^q with l_i >= 1 and |l|_1 = total, lexicographic
void level_compositions(Index q, Index total, std::vector<std::vector<Index>>& out) {
  std::vector<Index> l(static_cast<size_t>(q), 1);
  Index excess = total - q;
  std::function<void(Index, Index)> rec = [&](Index pos, Index left) {
    if (pos == q - 1) {
      l[static_cast<size_t>(pos)] = 1 + left;
      out.push_back(l);
      return;
    }
    for (Index take = 0; take <= left; ++take) {
      l[static_cast<size_t>(pos)] = 1 + take;
      rec(pos + 1, left - take);
    }
  };
  rec(0, excess);
}

} // namespace

QuadratureRule sparse_grid(const ParameterBox& box, Index level, Growth growth,
                           Index node_cap) {
  if (level < 1) throw std::invalid_argument("sparse_grid: level >= 1 required");
  const Index q = box.dim();

  std::vector<Rule1d> uni(static_cast<size_t>(level) + 1);
  for (Index j = 1; j <= level; ++j) uni[static_cast<size_t>(j)] = gauss_legendre_1d(growth_nodes(growth, j));

  // Smolyak combination: sum over |l|_1 in [max(q, level), level+q-1] of
  // (-1)^(level+q-1-|l|) binom(q-1, level+q-1-|l|) times the tensor block
  std::map<std::vector<double>, double> merged;
  const Index lo = std::max(q, level), hi = level + q - 1;
  for (Index total = lo; total <= hi; ++total) {
    const Index excess = hi - total;
    const double coeff = ((excess % 2 == 0) ? 1.0 : -1.0) * binomial(q - 1, excess);
    std::vector<std::vector<Index>> combos;
    level_compositions(q, total, combos);
    for (const auto& levels : combos) {
      Index block = 1;
      for (Index j = 0; j < q; ++j) {
        block *= uni[static_cast<size_t>(levels[static_cast<size_t>(j)])].nodes.size();
        if (block > node_cap) throw std::invalid_argument("sparse_grid: node count exceeds the cap");
      }
      std::vector<double> point(static_cast<size_t>(q));
      for (Index flat = 0; flat < block; ++flat) {
        Index rest = flat;
        double w = coeff;
        for (Index j = 0; j < q; ++j) {
          const Rule1d& r = uni[static_cast<size_t>(levels[static_cast<size_t>(j)])];
          const Index idx = rest % r.nodes.size();
          rest /= r.nodes.size();
          point[static_cast<size_t>(j)] = r.nodes[idx];
          w *= r.weights[idx];
        }
        merged[point] += w;
      }
      if (static_cast<Index>(merged.size()) > node_cap)
        throw std::invalid_argument("sparse_grid: node count exceeds the cap");
    }
  }

  // nodes from different univariate rules only coincide exactly (the rules
  // share no nonzero roots and the symmetrized center is exactly zero), so
  // the map key comparison merges duplicates; sweep once more with a
  // componentwise relative tolerance as a guard
  std::vector<std::pair<std::vector<double>, double>> entries(merged.begin(), merged.end());
  const double tol = 1e-12;
  std::vector<std::pair<std::vector<double>, double>> unique;
  for (auto& e : entries) {
    bool dup = false;
    if (!unique.empty()) {
      auto& last = unique.back();
      dup = true;
      for (Index j = 0; j < q; ++j) {
        const double a = last.first[static_cast<size_t>(j)], b = e.first[static_cast<size_t>(j)];
        if (std::abs(a - b) > tol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
          dup = false;
          break;
        }
      }
    }
    if (dup)
      unique.back().second += e.second;
    else
      unique.push_back(std::move(e));
  }

  const Vector mid = box.midpoint(), half = box.halfwidth();
  QuadratureRule rule;
  rule.box = box;
  rule.nodes.resize(static_cast<Index>(unique.size()), q);
  rule.weights.resize(static_cast<Index>(unique.size()));
  for (Index l = 0; l < rule.size(); ++l) {
    for (Index j = 0; j < q; ++j)
      rule.nodes(l, j) = mid[j] + half[j] * unique[static_cast<size_t>(l)].first[static_cast<size_t>(j)];
    rule.weights[l] = unique[static_cast<size_t>(l)].second;
  }
  return rule;
}

Vector expect(const QuadratureRule& rule, const std::function<Vector(const Vector&)>& f) {
  Vector acc;
  for (Index l = 0; l < rule.size(); ++l) {
    Vector val;
    try {
      val = f(rule.nodes.row(l).transpose());
    } catch (const std::exception& e) {
      throw NodeEvaluationError(std::string("expect: integrand failed at node ") +
                                    std::to_string(l) + ": " + e.what(),
                                l);
    }
    if (acc.size() == 0)
      acc = rule.weights[l] * val;
    else
      acc += rule.weights[l] * val;
  }
  return acc;
}

void write_rule_csv(const QuadratureRule& rule, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_rule_csv: cannot open " + path);
  for (Index j = 0; j < rule.dim(); ++j) std::fprintf(fp, "p%lld,", static_cast<long long>(j));
  std::fprintf(fp, "weight\n");
  for (Index l = 0; l < rule.size(); ++l) {
    for (Index j = 0; j < rule.dim(); ++j) std::fprintf(fp, "%.17g,", rule.nodes(l, j));
    std::fprintf(fp, "%.17g\n", rule.weights[l]);
  }
  std::fclose(fp);
}

} // namespace pcmor
