#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pcmor/pipeline.hpp"
#include "pcmor/timeint.hpp"

using namespace pcmor;

namespace {

namespace fs = std::filesystem;

RunConfig small_scrapie_config(const std::string& outdir) {
  RunConfig cfg;
  cfg.model_name = "scrapie";
  cfg.degree = 2; // m = 21, system dimension 63: quick to sweep
  cfg.variation_percent = 10.0;
  cfg.method = "galerkin";
  cfg.quadrature.kind = "tensor";
  cfg.quadrature.per_axis = 5; // resolves the quadratic products at degree 2
  cfg.integrator.method = "trapezoidal";
  cfg.integrator.rel_tol = 1e-4;
  cfg.integrator.abs_tol = 1e-6;
  cfg.integrator.comparison_rel_tol = 1e-3;
  cfg.integrator.eval_points = 100;
  cfg.mor.r_values = {2, 4, 8};
  cfg.mor.snapshot_source = "steps";
  cfg.outputs.directory = outdir;
  cfg.outputs.formats = {"csv", "svg"};
  return cfg;
}

} // namespace

TEST_CASE("small reaction pipeline produces the full artifact set") {
  const std::string dir = "/tmp/pcmor_pipe_a";
  fs::remove_all(dir);
  const RunConfig cfg = small_scrapie_config(dir);
  const PipelineResult result = run_pipeline(cfg);

  CHECK(result.ok());
  CHECK(result.fom_dim == 63);
  CHECK(result.snapshot_count > 10);
  CHECK(result.sweep.size() == 3);
  for (const auto& entry : result.sweep) CHECK(entry.rom_ok);

  for (const char* name :
       {"manifest.json", "system_summary.json", "snapshots.bin", "singular_values.csv",
        "error_reports.csv", "bound_reports.csv", "max_errors.csv", "quadrature_rule.csv",
        "statistics_fom_out0.csv", "statistics_fom_out2.csv", "fom_output_coeffs_out0.csv",
        "singular_values.svg", "max_error_out0.svg", "statistics_out1.svg"})
    CHECK_MESSAGE(fs::exists(fs::path(dir) / name), name);

  // the stored snapshots round-trip through the compact binary format
  const Trajectory snaps = read_trajectory_binary((fs::path(dir) / "snapshots.bin").string());
  CHECK(snaps.dim() == result.fom_dim);
  CHECK(snaps.points() == result.snapshot_count);
  CHECK((snaps.states - result.snapshots).cwiseAbs().maxCoeff() == 0.0);

  // larger reduced spaces do no worse, and the best approximation never
  // loses to the reduced transient
  for (size_t o = 0; o < 3; ++o) {
    for (const auto& entry : result.sweep) {
      REQUIRE(entry.best_errors.size() == 3);
      REQUIRE(entry.mor_errors.size() == 3);
      for (Index t = 0; t < entry.best_errors[o].l2.size(); ++t)
        CHECK(entry.best_errors[o].l2[t] <= entry.mor_errors[o].l2[t] * (1.0 + 1e-9) + 1e-13);
    }
    CHECK(result.sweep[2].best_errors[o].max_error <=
          result.sweep[0].best_errors[o].max_error * (1.0 + 1e-9));
  }
}

TEST_CASE("identical configs produce identical output hashes") {
  const std::string dir1 = "/tmp/pcmor_pipe_h1";
  const std::string dir2 = "/tmp/pcmor_pipe_h2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  RunConfig cfg = small_scrapie_config(dir1);
  cfg.mor.r_values = {2, 4};
  cfg.integrator.eval_points = 60;
  const PipelineResult a = run_pipeline(cfg);
  cfg.outputs.directory = dir2;
  const PipelineResult b = run_pipeline(cfg);
  CHECK(a.ok());
  CHECK(b.ok());
  CHECK(a.output_hash == b.output_hash);
}

TEST_CASE("horizon multiplier one reduces to the standard pipeline") {
  const std::string dir1 = "/tmp/pcmor_pipe_r1";
  const std::string dir2 = "/tmp/pcmor_pipe_r2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  RunConfig cfg = small_scrapie_config(dir1);
  cfg.mor.r_values = {4};
  cfg.integrator.eval_points = 60;
  const PipelineResult plain = run_pipeline(cfg);
  cfg.outputs.directory = dir2;
  const PipelineResult reused = reuse_rom(cfg, 1.0);
  CHECK(plain.output_hash == reused.output_hash);
}

TEST_CASE("stretched horizons degrade the out-of-window errors") {
  const std::string dir = "/tmp/pcmor_pipe_stretch";
  fs::remove_all(dir);
  RunConfig cfg = small_scrapie_config(dir);
  cfg.mor.r_values = {6};
  cfg.integrator.eval_points = 120;
  const PipelineResult result = reuse_rom(cfg, 2.0);
  REQUIRE(result.ok());
  REQUIRE(result.sweep.size() == 1);
  REQUIRE(result.sweep[0].rom_ok);
  // the evaluation grid covers [0, 1000]; outside the snapshot window the
  // errors climb monotonically past their level at the window end
  const ErrorReport& err = result.sweep[0].mor_errors[0];
  const ErrorReport& best = result.sweep[0].best_errors[0];
  double mor_at_window_end = 0.0, best_in_window = 0.0;
  double mor_final = err.l2[err.l2.size() - 1];
  double best_beyond = 0.0;
  for (size_t i = 0; i < err.times.size(); ++i) {
    if (err.times[i] <= 500.0) {
      mor_at_window_end = err.l2[static_cast<Index>(i)];
      best_in_window = std::max(best_in_window, best.l2[static_cast<Index>(i)]);
    } else {
      best_beyond = std::max(best_beyond, best.l2[static_cast<Index>(i)]);
    }
  }
  CHECK(mor_final > 1.2 * mor_at_window_end);
  CHECK(best_beyond > best_in_window);
}

TEST_CASE("custom declarative models run through the pipeline") {
  const std::string model_path = "/tmp/pcmor_pipe_model.json";
  {
    std::ofstream out(model_path);
    out << R"({
      "name": "toy_decay",
      "n": 2, "n_in": 0, "n_out": 1,
      "nominal": [1.0, 0.5],
      "t_start": 0.0, "t_end": 5.0,
      "E": {"constant": [[1,0],[0,1]]},
      "A": {"terms": [{"matrix": [[-1,0],[0,0]], "factors": [{"axis":0,"kind":"value"}]},
                       {"matrix": [[0,0],[1,-1]], "factors": [{"axis":1,"kind":"value"}]}]},
      "C": {"constant": [[0,1]]},
      "x0": {"constant": [[1],[0]]}
    })";
  }
  const std::string dir = "/tmp/pcmor_pipe_custom";
  fs::remove_all(dir);
  RunConfig cfg;
  cfg.model_file = model_path;
  cfg.degree = 2;
  cfg.variation_percent = 15.0;
  cfg.method = "collocation";
  cfg.quadrature.kind = "tensor";
  cfg.quadrature.per_axis = 3;
  cfg.integrator.rel_tol = 1e-5;
  cfg.integrator.abs_tol = 1e-8;
  cfg.integrator.eval_points = 50;
  cfg.mor.r_values = {2, 3};
  cfg.mor.snapshot_source = "uniform";
  cfg.outputs.directory = dir;
  const PipelineResult result = run_pipeline(cfg);
  CHECK(result.ok());
  CHECK(result.fom_dim == 2 * 9);
  CHECK(result.snapshot_count == 50);

  // the literal coupled solve is the alternative snapshot source
  cfg.mor.snapshot_source = "steps";
  cfg.outputs.directory = dir + "_steps";
  fs::remove_all(cfg.outputs.directory);
  const PipelineResult stepped = run_pipeline(cfg);
  CHECK(stepped.ok());
  CHECK(stepped.accepted_steps > 5);
  CHECK(stepped.snapshot_count == stepped.accepted_steps + 1);
}

TEST_CASE("output root environment variable prefixes relative directories") {
  fs::remove_all("/tmp/pcmor_root_env");
  setenv("PCMOR_OUTPUT_ROOT", "/tmp/pcmor_root_env", 1);
  RunConfig cfg = small_scrapie_config("nested/run");
  cfg.mor.r_values = {2};
  cfg.integrator.eval_points = 40;
  cfg.outputs.formats = {"csv"};
  const PipelineResult result = run_pipeline(cfg);
  unsetenv("PCMOR_OUTPUT_ROOT");
  CHECK(result.ok());
  CHECK(result.directory == "/tmp/pcmor_root_env/nested/run");
  CHECK(fs::exists("/tmp/pcmor_root_env/nested/run/manifest.json"));
}

TEST_CASE("failed reduced dimensions are recorded, not fatal") {
  const std::string dir = "/tmp/pcmor_pipe_fail";
  fs::remove_all(dir);
  RunConfig cfg = small_scrapie_config(dir);
  cfg.mor.r_values = {2, 5000}; // far beyond the snapshot rank
  cfg.integrator.eval_points = 60;
  const PipelineResult result = run_pipeline(cfg);
  CHECK(result.ok());
  REQUIRE(result.sweep.size() == 2);
  CHECK(result.sweep[0].rom_ok);
  CHECK_FALSE(result.sweep[1].rom_ok);
  CHECK(!result.sweep[1].rom_failure.empty());
  CHECK(!result.warnings.empty());
}
