#ifndef PCMOR_CONFIG_HPP
#define PCMOR_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "pcmor/quadrature.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

struct QuadratureConfig {
  std::string kind = "tensor"; // "tensor" | "sparse"
  Index per_axis = 3;
  Index level = 2;
  Growth growth = Growth::linear;
};

struct IntegratorBlock {
  std::string method = "trapezoidal"; // "trapezoidal" | "bdf"
  double rel_tol = 1e-4;
  double abs_tol = 1e-6;
  double comparison_rel_tol = 0; // 0: same as rel_tol
  double comparison_abs_tol = 0;
  double t_start = std::numeric_limits<double>::quiet_NaN(); // NaN: model default
  double t_end = std::numeric_limits<double>::quiet_NaN();
  Index eval_points = 200;
  int max_order = 5;
  double initial_step = 0;
  double min_step = 0;
  double max_step = 0;
  double newton_tol = 0.05;
  int newton_max_iter = 10;
};

struct MorBlock {
  std::vector<Index> r_values;
  std::string snapshot_source = "steps"; // "steps" | "uniform"
  double reuse_horizon_multiplier = 1.0;
};

struct OutputsBlock {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv"}; // "csv", "svg", "triplets"
  std::string cache_dir;
};

struct BoxOverride {
  Vector lower;
  Vector upper;
};

struct RunConfig {
  std::string model_name;          // registry name, or
  std::string model_file;          // declarative model file
  double override_t_start = std::numeric_limits<double>::quiet_NaN();
  double override_t_end = std::numeric_limits<double>::quiet_NaN();
  Index degree = 3;
  double variation_percent = 10.0;
  std::optional<BoxOverride> box;
  std::string method = "galerkin"; // "galerkin" | "collocation"
  QuadratureConfig quadrature;
  std::optional<QuadratureConfig> assembly_quadrature;
  IntegratorBlock integrator;
  MorBlock mor;
  OutputsBlock outputs;
};

/// Parse and validate; unknown keys anywhere are rejected.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Stable hash of the canonical serialized form.
std::uint64_t config_hash(const RunConfig& cfg);

std::uint64_t fnv1a_bytes(const void* data, std::size_t bytes,
                          std::uint64_t seed = 1469598103934665603ull);

} // namespace pcmor

#endif
