#ifndef PCMOR_PIPELINE_HPP
#define PCMOR_PIPELINE_HPP

#include <string>
#include <vector>

#include "pcmor/analysis.hpp"
#include "pcmor/config.hpp"
#include "pcmor/lowdim.hpp"
#include "pcmor/mor.hpp"
#include "pcmor/types.hpp"

namespace pcmor {

struct StageStatus {
  std::string name;
  std::string status; // "ok" | "failed"
  std::string detail;
};

struct RomSweepEntry {
  Index r = 0;
  bool rom_ok = false;
  std::string rom_failure;
  std::vector<ErrorReport> mor_errors;  // per output
  std::vector<ErrorReport> best_errors; // per output
  std::vector<BoundReport> bounds;      // per output
  std::vector<StatSeries> rom_stats;    // per output, comparison horizon
};

struct PipelineResult {
  std::string directory;
  Index fom_dim = 0;
  Index quadrature_nodes = 0;
  Index snapshot_count = 0;
  Index accepted_steps = 0;
  std::vector<double> snapshot_times;
  Matrix snapshots;
  PodResult pod;
  std::vector<double> eval_grid;
  std::vector<Representation> fom_outputs; // per output, comparison run
  std::vector<StatSeries> fom_stats;       // per output, snapshot run
  std::vector<RomSweepEntry> sweep;
  std::vector<StageStatus> stages;
  std::vector<std::string> warnings;
  std::uint64_t output_hash = 0;

  bool ok() const {
    for (const auto& s : stages)
      if (s.status != "ok") return false;
    return true;
  }
};

/// End-to-end batch pipeline: assemble the chosen coupled formulation,
/// produce snapshots, decompose, sweep the reduced dimensions, and write
/// every report (and a manifest) into the artifact directory. Failures of
/// individual reduced models are recorded in the sweep, not fatal.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Same pipeline with the comparison horizon stretched beyond the snapshot
/// window, exposing how the reduced representations degrade there.
PipelineResult reuse_rom(RunConfig cfg, double horizon_multiplier);

} // namespace pcmor

#endif
