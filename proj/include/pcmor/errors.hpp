#ifndef PCMOR_ERRORS_HPP
#define PCMOR_ERRORS_HPP

#include <stdexcept>
#include <string>

#include "pcmor/types.hpp"

namespace pcmor {

/// Time integration aborted (step-size underflow, Newton breakdown, ...).
/// Carries the last time the integrator had a valid solution at.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, double last_time)
      : std::runtime_error(what), last_time_(last_time) {}
  double last_time() const { return last_time_; }

private:
  double last_time_;
};

/// A matrix required to have full column rank turned out rank deficient.
class RankDeficiencyError : public std::runtime_error {
public:
  RankDeficiencyError(const std::string& what, Index rank)
      : std::runtime_error(what), rank_(rank) {}
  Index rank() const { return rank_; }

private:
  Index rank_;
};

/// Evaluation of an integrand failed at a specific quadrature node.
class NodeEvaluationError : public std::runtime_error {
public:
  NodeEvaluationError(const std::string& what, Index node)
      : std::runtime_error(what), node_(node) {}
  Index node() const { return node_; }

private:
  Index node_;
};

} // namespace pcmor

#endif
