#include "pcmor/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace pcmor {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

QuadratureConfig parse_quadrature(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "per_axis", "level", "growth"});
  QuadratureConfig qc;
  qc.kind = j.at("kind").get<std::string>();
  if (qc.kind == "tensor") {
    qc.per_axis = j.at("per_axis").get<Index>();
    if (j.contains("level") || j.contains("growth"))
      throw std::invalid_argument("config: tensor quadrature takes per_axis only");
  } else if (qc.kind == "sparse") {
    qc.level = j.at("level").get<Index>();
    const std::string g = j.value("growth", std::string("linear"));
    if (g == "linear")
      qc.growth = Growth::linear;
    else if (g == "exponential")
      qc.growth = Growth::exponential;
    else
      throw std::invalid_argument("config: unknown growth '" + g + "'");
    if (j.contains("per_axis"))
      throw std::invalid_argument("config: sparse quadrature takes level/growth only");
  } else {
    throw std::invalid_argument("config: unknown quadrature kind '" + qc.kind + "'");
  }
  return qc;
}

json dump_quadrature(const QuadratureConfig& qc) {
  json j;
  j["kind"] = qc.kind;
  if (qc.kind == "tensor") {
    j["per_axis"] = qc.per_axis;
  } else {
    j["level"] = qc.level;
    j["growth"] = qc.growth == Growth::linear ? "linear" : "exponential";
  }
  return j;
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  require_keys(j, "top level",
               {"model", "uq", "method", "quadrature", "assembly_quadrature", "integrator",
                "mor", "outputs"});
  RunConfig cfg;

  const json& jm = j.at("model");
  require_keys(jm, "model", {"name", "file", "overrides"});
  if (jm.contains("name")) cfg.model_name = jm.at("name").get<std::string>();
  if (jm.contains("file")) cfg.model_file = jm.at("file").get<std::string>();
  if (cfg.model_name.empty() == cfg.model_file.empty())
    throw std::invalid_argument("config: model needs exactly one of name/file");
  if (jm.contains("overrides")) {
    const json& jo = jm.at("overrides");
    require_keys(jo, "model.overrides", {"t_start", "t_end"});
    if (jo.contains("t_start")) cfg.override_t_start = jo.at("t_start").get<double>();
    if (jo.contains("t_end")) cfg.override_t_end = jo.at("t_end").get<double>();
  }

  const json& ju = j.at("uq");
  require_keys(ju, "uq", {"degree", "variation_percent", "box"});
  cfg.degree = ju.at("degree").get<Index>();
  if (cfg.degree < 0) throw std::invalid_argument("config: uq.degree must be >= 0");
  cfg.variation_percent = ju.value("variation_percent", 10.0);
  if (cfg.variation_percent <= 0 && !ju.contains("box"))
    throw std::invalid_argument("config: uq.variation_percent must be positive");
  if (ju.contains("box")) {
    const json& jb = ju.at("box");
    require_keys(jb, "uq.box", {"lower", "upper"});
    const auto lo = jb.at("lower").get<std::vector<double>>();
    const auto up = jb.at("upper").get<std::vector<double>>();
    if (lo.size() != up.size()) throw std::invalid_argument("config: box bound sizes differ");
    BoxOverride box;
    box.lower = Eigen::Map<const Vector>(lo.data(), static_cast<Index>(lo.size()));
    box.upper = Eigen::Map<const Vector>(up.data(), static_cast<Index>(up.size()));
    cfg.box = box;
  }

  cfg.method = j.at("method").get<std::string>();
  if (cfg.method != "galerkin" && cfg.method != "collocation")
    throw std::invalid_argument("config: method must be galerkin or collocation");

  cfg.quadrature = parse_quadrature(j.at("quadrature"), "quadrature");
  if (j.contains("assembly_quadrature"))
    cfg.assembly_quadrature = parse_quadrature(j.at("assembly_quadrature"), "assembly_quadrature");

  const json& ji = j.at("integrator");
  require_keys(ji, "integrator",
               {"method", "rel_tol", "abs_tol", "comparison_rel_tol", "comparison_abs_tol",
                "t_start", "t_end", "eval_points", "max_order", "initial_step", "min_step",
                "max_step", "newton_tol", "newton_max_iter"});
  cfg.integrator.method = ji.value("method", std::string("trapezoidal"));
  if (cfg.integrator.method != "trapezoidal" && cfg.integrator.method != "bdf")
    throw std::invalid_argument("config: integrator.method must be trapezoidal or bdf");
  cfg.integrator.rel_tol = ji.at("rel_tol").get<double>();
  cfg.integrator.abs_tol = ji.at("abs_tol").get<double>();
  if (cfg.integrator.rel_tol <= 0 || cfg.integrator.abs_tol <= 0)
    throw std::invalid_argument("config: tolerances must be positive");
  cfg.integrator.comparison_rel_tol = ji.value("comparison_rel_tol", 0.0);
  cfg.integrator.comparison_abs_tol = ji.value("comparison_abs_tol", 0.0);
  if (ji.contains("t_start")) cfg.integrator.t_start = ji.at("t_start").get<double>();
  if (ji.contains("t_end")) cfg.integrator.t_end = ji.at("t_end").get<double>();
  cfg.integrator.eval_points = ji.value("eval_points", Index{200});
  if (cfg.integrator.eval_points < 2)
    throw std::invalid_argument("config: integrator.eval_points must be >= 2");
  cfg.integrator.max_order = ji.value("max_order", 5);
  if (cfg.integrator.max_order < 1 || cfg.integrator.max_order > 5)
    throw std::invalid_argument("config: integrator.max_order must be in [1,5]");
  cfg.integrator.initial_step = ji.value("initial_step", 0.0);
  cfg.integrator.min_step = ji.value("min_step", 0.0);
  cfg.integrator.max_step = ji.value("max_step", 0.0);
  cfg.integrator.newton_tol = ji.value("newton_tol", 0.05);
  cfg.integrator.newton_max_iter = ji.value("newton_max_iter", 10);

  const json& jr = j.at("mor");
  require_keys(jr, "mor", {"r_values", "snapshot_source", "reuse_horizon_multiplier"});
  const json& jrv = jr.at("r_values");
  if (jrv.is_array()) {
    for (const auto& v : jrv) cfg.mor.r_values.push_back(v.get<Index>());
  } else {
    require_keys(jrv, "mor.r_values", {"from", "to", "step"});
    const Index from = jrv.at("from").get<Index>(), to = jrv.at("to").get<Index>();
    const Index step = jrv.value("step", Index{1});
    for (Index r = from; r <= to; r += step) cfg.mor.r_values.push_back(r);
  }
  if (cfg.mor.r_values.empty()) throw std::invalid_argument("config: mor.r_values is empty");
  for (Index r : cfg.mor.r_values)
    if (r < 1) throw std::invalid_argument("config: reduced dimensions must be >= 1");
  cfg.mor.snapshot_source = jr.value("snapshot_source", std::string("steps"));
  if (cfg.mor.snapshot_source != "steps" && cfg.mor.snapshot_source != "uniform")
    throw std::invalid_argument("config: mor.snapshot_source must be steps or uniform");
  cfg.mor.reuse_horizon_multiplier = jr.value("reuse_horizon_multiplier", 1.0);
  if (cfg.mor.reuse_horizon_multiplier < 1.0)
    throw std::invalid_argument("config: mor.reuse_horizon_multiplier must be >= 1");

  const json& jo = j.at("outputs");
  require_keys(jo, "outputs", {"directory", "formats", "cache_dir"});
  cfg.outputs.directory = jo.at("directory").get<std::string>();
  if (jo.contains("formats"))
    cfg.outputs.formats = jo.at("formats").get<std::vector<std::string>>();
  for (const auto& f : cfg.outputs.formats)
    if (f != "csv" && f != "svg" && f != "triplets")
      throw std::invalid_argument("config: unknown output format '" + f + "'");
  cfg.outputs.cache_dir = jo.value("cache_dir", std::string());

  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  if (!cfg.model_name.empty()) j["model"]["name"] = cfg.model_name;
  if (!cfg.model_file.empty()) j["model"]["file"] = cfg.model_file;
  if (!std::isnan(cfg.override_t_start)) j["model"]["overrides"]["t_start"] = cfg.override_t_start;
  if (!std::isnan(cfg.override_t_end)) j["model"]["overrides"]["t_end"] = cfg.override_t_end;
  j["uq"]["degree"] = cfg.degree;
  j["uq"]["variation_percent"] = cfg.variation_percent;
  if (cfg.box) {
    j["uq"]["box"]["lower"] = std::vector<double>(cfg.box->lower.data(),
                                                  cfg.box->lower.data() + cfg.box->lower.size());
    j["uq"]["box"]["upper"] = std::vector<double>(cfg.box->upper.data(),
                                                  cfg.box->upper.data() + cfg.box->upper.size());
  }
  j["method"] = cfg.method;
  j["quadrature"] = dump_quadrature(cfg.quadrature);
  if (cfg.assembly_quadrature) j["assembly_quadrature"] = dump_quadrature(*cfg.assembly_quadrature);
  json& ji = j["integrator"];
  ji["method"] = cfg.integrator.method;
  ji["rel_tol"] = cfg.integrator.rel_tol;
  ji["abs_tol"] = cfg.integrator.abs_tol;
  if (cfg.integrator.comparison_rel_tol > 0) ji["comparison_rel_tol"] = cfg.integrator.comparison_rel_tol;
  if (cfg.integrator.comparison_abs_tol > 0) ji["comparison_abs_tol"] = cfg.integrator.comparison_abs_tol;
  if (!std::isnan(cfg.integrator.t_start)) ji["t_start"] = cfg.integrator.t_start;
  if (!std::isnan(cfg.integrator.t_end)) ji["t_end"] = cfg.integrator.t_end;
  ji["eval_points"] = cfg.integrator.eval_points;
  ji["max_order"] = cfg.integrator.max_order;
  if (cfg.integrator.initial_step > 0) ji["initial_step"] = cfg.integrator.initial_step;
  if (cfg.integrator.min_step > 0) ji["min_step"] = cfg.integrator.min_step;
  if (cfg.integrator.max_step > 0) ji["max_step"] = cfg.integrator.max_step;
  ji["newton_tol"] = cfg.integrator.newton_tol;
  ji["newton_max_iter"] = cfg.integrator.newton_max_iter;
  j["mor"]["r_values"] = cfg.mor.r_values;
  j["mor"]["snapshot_source"] = cfg.mor.snapshot_source;
  j["mor"]["reuse_horizon_multiplier"] = cfg.mor.reuse_horizon_multiplier;
  j["outputs"]["directory"] = cfg.outputs.directory;
  j["outputs"]["formats"] = cfg.outputs.formats;
  if (!cfg.outputs.cache_dir.empty()) j["outputs"]["cache_dir"] = cfg.outputs.cache_dir;
  return j.dump(2);
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  return fnv1a_bytes(s.data(), s.size());
}

} // namespace pcmor
