#include "pcmor/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pcmor/collocation.hpp"
#include "pcmor/errors.hpp"
#include "pcmor/galerkin.hpp"
#include "pcmor/plot.hpp"

namespace pcmor {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

QuadratureRule build_rule(const QuadratureConfig& qc, const ParameterBox& box) {
  if (qc.kind == "tensor") return tensor_rule(box, qc.per_axis);
  return sparse_grid(box, qc.level, qc.growth);
}

IntegratorConfig integrator_config(const IntegratorBlock& blk, bool comparison) {
  IntegratorConfig cfg;
  cfg.method = blk.method == "bdf" ? Method::bdf : Method::trapezoidal;
  cfg.rel_tol = comparison && blk.comparison_rel_tol > 0 ? blk.comparison_rel_tol : blk.rel_tol;
  cfg.abs_tol = comparison && blk.comparison_abs_tol > 0 ? blk.comparison_abs_tol : blk.abs_tol;
  cfg.max_order = blk.max_order;
  cfg.initial_step = blk.initial_step;
  cfg.min_step = blk.min_step;
  cfg.max_step = blk.max_step;
  cfg.newton_tol = blk.newton_tol;
  cfg.newton_max_iter = blk.newton_max_iter;
  return cfg;
}

std::uint64_t hash_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = seed;
  char buf[4096];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a_bytes(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

struct FomHandles {
  ImplicitSystem coupled;
  std::vector<Matrix> output_maps; // per output
  Vector init;
  Index dim = 0;
};

} // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult result;
  std::vector<std::string> written;
  const char* root_env = std::getenv("PCMOR_OUTPUT_ROOT");
  fs::path dir = cfg.outputs.directory;
  if (root_env && dir.is_relative()) dir = fs::path(root_env) / dir;
  fs::create_directories(dir);
  result.directory = dir.string();

  auto fail_stage = [&](const std::string& name, const std::string& detail) {
    result.stages.push_back({name, "failed", detail});
  };
  auto ok_stage = [&](const std::string& name, const std::string& detail = "") {
    result.stages.push_back({name, "ok", detail});
  };
  auto emit = [&](const std::string& name) {
    written.push_back((dir / name).string());
    return (dir / name).string();
  };
  const bool want_svg =
      std::find(cfg.outputs.formats.begin(), cfg.outputs.formats.end(), "svg") !=
      cfg.outputs.formats.end();
  const bool want_triplets =
      std::find(cfg.outputs.formats.begin(), cfg.outputs.formats.end(), "triplets") !=
      cfg.outputs.formats.end();

  try {
    // model and stochastic setup
    ParametricSystem model =
        cfg.model_file.empty() ? make_model(cfg.model_name) : load_model_file(cfg.model_file);
    if (!std::isnan(cfg.override_t_start)) model.t_start = cfg.override_t_start;
    if (!std::isnan(cfg.override_t_end)) model.t_end = cfg.override_t_end;

    ParameterBox box = cfg.box ? ParameterBox(cfg.box->lower, cfg.box->upper, model.nominal)
                               : ParameterBox::relative(model.nominal, cfg.variation_percent);
    const BasisSpec spec(box, cfg.degree);
    const QuadratureRule rule = build_rule(cfg.quadrature, box);
    result.quadrature_nodes = rule.size();
    ok_stage("setup", "m=" + std::to_string(spec.dim()) + " k=" + std::to_string(rule.size()));

    write_rule_csv(rule, emit("quadrature_rule.csv"));

    const double t0 = std::isnan(cfg.integrator.t_start) ? model.t_start : cfg.integrator.t_start;
    const double t1 = std::isnan(cfg.integrator.t_end) ? model.t_end : cfg.integrator.t_end;
    const double t1_cmp = t0 + cfg.mor.reuse_horizon_multiplier * (t1 - t0);

    // assemble the coupled full-order formulation
    FomHandles fom;
    GalerkinSystem gal;
    CollocationSystem col;
    const bool galerkin = cfg.method == "galerkin";
    if (galerkin) {
      QuadratureRule arule;
      const QuadratureRule* arule_ptr = nullptr;
      if (cfg.assembly_quadrature) {
        arule = build_rule(*cfg.assembly_quadrature, box);
        arule_ptr = &arule;
      }
      gal = assemble_galerkin(model, spec, rule, arule_ptr);
      fom.coupled = gal.to_implicit();
      fom.output_maps = gal.Chat;
      fom.init = gal.v0;
      fom.dim = gal.dim();
      if (want_triplets) {
        export_sparse_triplets(gal.Ehat, emit("Ehat_triplets.txt"));
        export_sparse_triplets(gal.Ahat, emit("Ahat_triplets.txt"));
      }
    } else {
      col = assemble_collocation(model, spec, rule);
      fom.coupled = col.to_implicit();
      fom.output_maps = col.Chat;
      fom.init = col.x0hat;
      fom.dim = col.dim();
      if (want_triplets) {
        export_sparse_triplets(col.Ehat, emit("Ehat_triplets.txt"));
        export_sparse_triplets(col.Ahat, emit("Ahat_triplets.txt"));
      }
    }
    result.fom_dim = fom.dim;
    ok_stage("assemble", "dim=" + std::to_string(fom.dim));

    {
      json summary;
      summary["method"] = cfg.method;
      summary["model"] = model.name;
      summary["state_dim"] = fom.dim;
      summary["basis_size"] = spec.dim();
      summary["parameter_dim"] = spec.param_dim();
      summary["degree"] = spec.degree();
      summary["quadrature_nodes"] = rule.size();
      summary["outputs"] = static_cast<Index>(fom.output_maps.size());
      if (galerkin) {
        summary["mass_nonzeros"] = gal.Ehat.nonZeros();
        summary["linear_nonzeros"] = gal.Ahat.nonZeros();
        summary["mass_is_identity"] = gal.mass_is_identity;
      } else {
        summary["mass_nonzeros"] = col.Ehat.nonZeros();
        summary["linear_nonzeros"] = col.Ahat.nonZeros();
      }
      std::ofstream out(emit("system_summary.json"));
      out << summary.dump(2) << "\n";
    }

    // snapshot production on [t0, t1]
    const IntegratorConfig icfg = integrator_config(cfg.integrator, false);
    const std::vector<double> snap_grid = uniform_grid(t0, t1, cfg.integrator.eval_points);
    Trajectory snap_traj;
    if (galerkin) {
      snap_traj = integrate(fom.coupled, {t0, t1}, fom.init, icfg);
      result.accepted_steps = snap_traj.stats.steps;
      if (cfg.mor.snapshot_source == "uniform") {
        result.snapshots = interpolate(snap_traj, snap_grid);
        result.snapshot_times = snap_grid;
      } else {
        result.snapshots = snap_traj.states;
        result.snapshot_times = snap_traj.times;
      }
    } else if (cfg.mor.snapshot_source == "steps") {
      // literal coupled solve: one shared step sequence for every block
      snap_traj = integrate(fom.coupled, {t0, t1}, fom.init, icfg);
      result.accepted_steps = snap_traj.stats.steps;
      result.snapshots = snap_traj.states;
      result.snapshot_times = snap_traj.times;
    } else {
      // node systems solved independently, sampled on the shared grid
      result.snapshots = solve_collocation_nodes(col, icfg, snap_grid, cfg.outputs.cache_dir);
      result.snapshot_times = snap_grid;
    }
    result.snapshot_count = result.snapshots.cols();
    ok_stage("snapshots", std::to_string(result.snapshot_count) + " snapshots");
    {
      Trajectory snap_store;
      snap_store.method = Method::bdf;
      snap_store.times = result.snapshot_times;
      snap_store.states = result.snapshots;
      snap_store.orders.assign(result.snapshot_times.size(), 1);
      write_trajectory_binary(snap_store, emit("snapshots.bin"));
    }

    // statistics of the snapshot-quality solution
    {
      Representation rep;
      rep.tag = BasisTag::phi;
      if (snap_traj.points() > 0) {
        rep.times = snap_grid;
        const Matrix vals = interpolate(snap_traj, snap_grid);
        for (size_t o = 0; o < fom.output_maps.size(); ++o) {
          rep.coeffs = fom.output_maps[o] * vals;
          result.fom_stats.push_back(statistics(rep));
        }
      } else {
        rep.times = result.snapshot_times;
        for (size_t o = 0; o < fom.output_maps.size(); ++o) {
          rep.coeffs = fom.output_maps[o] * result.snapshots;
          result.fom_stats.push_back(statistics(rep));
        }
      }
      for (size_t o = 0; o < result.fom_stats.size(); ++o)
        write_statistics_csv(result.fom_stats[o],
                             emit("statistics_fom_out" + std::to_string(o) + ".csv"));
    }

    // decomposition
    result.pod = pod(result.snapshots);
    write_singular_values_csv(result.pod, emit("singular_values.csv"));
    ok_stage("pod", "rank=" + std::to_string(result.pod.rank()));

    // comparison solve of the full model over the (possibly longer) horizon
    const IntegratorConfig ccfg = integrator_config(cfg.integrator, true);
    result.eval_grid = uniform_grid(t0, t1_cmp, cfg.integrator.eval_points);
    Trajectory cmp_traj = integrate(fom.coupled, {t0, t1_cmp}, fom.init, ccfg);
    for (size_t o = 0; o < fom.output_maps.size(); ++o) {
      result.fom_outputs.push_back(
          output_representation(cmp_traj, fom.output_maps[o], result.eval_grid));
      write_representation_csv(result.fom_outputs[o],
                               emit("fom_output_coeffs_out" + std::to_string(o) + ".csv"));
      if (cfg.mor.reuse_horizon_multiplier > 1.0)
        write_statistics_csv(statistics(result.fom_outputs[o]),
                             emit("statistics_fom_full_horizon_out" + std::to_string(o) + ".csv"));
    }
    ok_stage("fom_comparison", std::to_string(cmp_traj.stats.steps) + " steps");

    // sweep over the reduced dimensions
    for (Index r : cfg.mor.r_values) {
      RomSweepEntry entry;
      entry.r = r;
      if (r > result.pod.rank()) {
        entry.rom_ok = false;
        entry.rom_failure = "r exceeds the numerical rank " + std::to_string(result.pod.rank());
        result.warnings.push_back("r=" + std::to_string(r) + ": " + entry.rom_failure);
        result.sweep.push_back(std::move(entry));
        continue;
      }
      const Matrix Tr = projection_basis(result.pod, r);
      ReducedModel rom = galerkin ? reduce(gal, Tr) : reduce(col, Tr);

      // theoretical bound per output (snapshot data only)
      for (size_t o = 0; o < fom.output_maps.size(); ++o) {
        if (result.snapshot_count > r)
          entry.bounds.push_back(theorem_bound(result.pod, fom.output_maps[o], result.snapshots,
                                               result.snapshot_times, r));
      }

      // best approximation never needs the reduced solve
      for (size_t o = 0; o < fom.output_maps.size(); ++o) {
        Matrix cbar = rom.Cbar[o];
        Representation best;
        try {
          best = best_approximation(result.fom_outputs[o], cbar);
        } catch (const RankDeficiencyError&) {
          auto [cb2, rank2] = orthonormalize_basis(cbar);
          result.warnings.push_back("r=" + std::to_string(r) + " output " + std::to_string(o) +
                                    ": rank-deficient output matrix, orthonormalized to rank " +
                                    std::to_string(rank2));
          best = best_approximation(result.fom_outputs[o], cb2);
        }
        entry.best_errors.push_back(
            l2_error(result.fom_outputs[o], best, r, "best_approx"));
      }

      // reduced transient simulation; failures are recorded, never fatal
      try {
        IntegratorConfig rcfg = ccfg;
        const Trajectory rom_traj = integrate(rom.to_implicit(), {t0, t1_cmp}, rom.v0bar, rcfg);
        entry.rom_ok = true;
        for (size_t o = 0; o < fom.output_maps.size(); ++o) {
          const Representation morrep =
              mor_representation(rom_traj, rom.Cbar[o], result.eval_grid);
          entry.mor_errors.push_back(l2_error(result.fom_outputs[o], morrep, r, "mor"));
          entry.rom_stats.push_back(statistics(morrep));
        }
      } catch (const IntegrationError& e) {
        entry.rom_ok = false;
        entry.rom_failure = e.what();
        result.warnings.push_back("r=" + std::to_string(r) +
                                  ": reduced model integration failed: " + e.what());
      }
      result.sweep.push_back(std::move(entry));
    }
    ok_stage("sweep", std::to_string(cfg.mor.r_values.size()) + " reduced dimensions");

    // reports
    {
      std::vector<ErrorReport> all_errors;
      std::vector<BoundReport> all_bounds;
      for (const auto& entry : result.sweep) {
        for (const auto& e : entry.mor_errors) all_errors.push_back(e);
        for (const auto& e : entry.best_errors) all_errors.push_back(e);
        for (const auto& b : entry.bounds) all_bounds.push_back(b);
      }
      write_error_report_csv(all_errors, emit("error_reports.csv"));
      write_bound_reports_csv(all_bounds, emit("bound_reports.csv"));

      std::FILE* fp = std::fopen(emit("max_errors.csv").c_str(), "w");
      std::fprintf(fp, "r,output,mor_max_error,best_max_error,rom_ok\n");
      for (const auto& entry : result.sweep) {
        for (size_t o = 0; o < entry.best_errors.size(); ++o) {
          const double morv =
              entry.rom_ok && o < entry.mor_errors.size() ? entry.mor_errors[o].max_error : NAN;
          std::fprintf(fp, "%lld,%zu,%.17g,%.17g,%d\n", static_cast<long long>(entry.r), o, morv,
                       entry.best_errors[o].max_error, entry.rom_ok ? 1 : 0);
        }
      }
      std::fclose(fp);

      for (const auto& entry : result.sweep) {
        if (!entry.rom_ok) continue;
        for (size_t o = 0; o < entry.rom_stats.size(); ++o)
          write_statistics_csv(entry.rom_stats[o],
                               emit("statistics_rom_r" + std::to_string(entry.r) + "_out" +
                                    std::to_string(o) + ".csv"));
      }
    }

    if (want_svg) {
      {
        PlotSeries s;
        s.label = "sigma";
        for (Index i = 0; i < result.pod.singular_values.size(); ++i) {
          s.x.push_back(static_cast<double>(i + 1));
          s.y.push_back(result.pod.singular_values[i]);
        }
        write_svg_plot(emit("singular_values.svg"), {s},
                       {"Singular value decay", "index", "sigma", true});
      }
      for (size_t o = 0; o < fom.output_maps.size(); ++o) {
        PlotSeries sm, sb;
        sm.label = "reduced model";
        sb.label = "best approximation";
        for (const auto& entry : result.sweep) {
          if (entry.rom_ok && o < entry.mor_errors.size()) {
            sm.x.push_back(static_cast<double>(entry.r));
            sm.y.push_back(entry.mor_errors[o].max_error);
          }
          if (o < entry.best_errors.size()) {
            sb.x.push_back(static_cast<double>(entry.r));
            sb.y.push_back(entry.best_errors[o].max_error);
          }
        }
        write_svg_plot(emit("max_error_out" + std::to_string(o) + ".svg"), {sm, sb},
                       {"Maximum error vs reduced dimension", "r", "max error", true});
        // error vs time at the largest successful r
        for (auto it = result.sweep.rbegin(); it != result.sweep.rend(); ++it) {
          if (!it->rom_ok || o >= it->mor_errors.size()) continue;
          PlotSeries em, eb;
          em.label = "reduced model";
          eb.label = "best approximation";
          em.x = it->mor_errors[o].times;
          eb.x = it->best_errors[o].times;
          for (Index i = 0; i < it->mor_errors[o].l2.size(); ++i) em.y.push_back(it->mor_errors[o].l2[i]);
          for (Index i = 0; i < it->best_errors[o].l2.size(); ++i) eb.y.push_back(it->best_errors[o].l2[i]);
          write_svg_plot(emit("error_vs_time_r" + std::to_string(it->r) + "_out" +
                              std::to_string(o) + ".svg"),
                         {em, eb}, {"Error vs time, r=" + std::to_string(it->r), "t", "error", true});
          break;
        }
        PlotSeries mean_s, std_s;
        mean_s.label = "mean";
        std_s.label = "std";
        mean_s.x = result.fom_stats[o].times;
        std_s.x = result.fom_stats[o].times;
        for (Index i = 0; i < result.fom_stats[o].mean.size(); ++i) {
          mean_s.y.push_back(result.fom_stats[o].mean[i]);
          std_s.y.push_back(result.fom_stats[o].stddev[i]);
        }
        write_svg_plot(emit("statistics_out" + std::to_string(o) + ".svg"), {mean_s, std_s},
                       {"Mean and standard deviation", "t", "value", false});
      }
    }
  } catch (const std::exception& e) {
    fail_stage("pipeline", e.what());
  }

  // manifest with the config echo and output hashes
  {
    json manifest;
    manifest["config"] = json::parse(serialize_config(cfg));
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    manifest["config_hash"] = hex;
    manifest["versions"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION);
    manifest["versions"]["compiler"] = __VERSION__;
    for (const auto& st : result.stages)
      manifest["stages"].push_back({{"name", st.name}, {"status", st.status}, {"detail", st.detail}});
    manifest["warnings"] = result.warnings;
    std::uint64_t all = 1469598103934665603ull;
    std::sort(written.begin(), written.end());
    for (const auto& f : written) {
      const std::uint64_t h = hash_file(f, 1469598103934665603ull);
      char fh[32];
      std::snprintf(fh, sizeof(fh), "%016llx", static_cast<unsigned long long>(h));
      manifest["outputs"].push_back({{"file", fs::path(f).filename().string()}, {"hash", fh}});
      all = fnv1a_bytes(&h, sizeof(h), all);
    }
    char allh[32];
    std::snprintf(allh, sizeof(allh), "%016llx", static_cast<unsigned long long>(all));
    manifest["output_hash"] = allh;
    result.output_hash = all;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return result;
}

PipelineResult reuse_rom(RunConfig cfg, double horizon_multiplier) {
  if (horizon_multiplier < 1.0)
    throw std::invalid_argument("reuse_rom: horizon multiplier must be >= 1");
  cfg.mor.reuse_horizon_multiplier = horizon_multiplier;
  return run_pipeline(cfg);
}

} // namespace pcmor
