// Batch front-end: run UQ/reduction pipelines from a declarative config,
// sweep reduced dimensions, stretch horizons, render CSV outputs as SVG.
//
// Exit codes: 0 success, 1 configuration error, 2 numeric failure,
// 3 success with warnings.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcmor/config.hpp"
#include "pcmor/pipeline.hpp"
#include "pcmor/plot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitWarnings = 3;

int report(const pcmor::PipelineResult& result) {
  for (const auto& st : result.stages)
    std::printf("[%s] %s%s%s\n", st.status.c_str(), st.name.c_str(),
                st.detail.empty() ? "" : ": ", st.detail.c_str());
  for (const auto& w : result.warnings) std::printf("[warning] %s\n", w.c_str());
  std::printf("artifacts: %s\n", result.directory.c_str());
  if (!result.ok()) return kExitNumeric;
  return result.warnings.empty() ? kExitOk : kExitWarnings;
}

std::vector<pcmor::Index> parse_r_spec(const std::string& spec) {
  std::vector<pcmor::Index> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) {
      out.push_back(std::stoll(tok));
    } else {
      const long long a = std::stoll(tok.substr(0, colon));
      const long long b = std::stoll(tok.substr(colon + 1));
      for (long long r = a; r <= b; ++r) out.push_back(r);
    }
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  table.columns.resize(table.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    size_t c = 0;
    while (std::getline(ls, cell, ',') && c < table.columns.size())
      table.columns[c++].push_back(std::strtod(cell.c_str(), nullptr));
  }
  return table;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"polynomial chaos + model order reduction pipelines"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;

  auto* run = app.add_subcommand("run", "run the pipeline described by a config file");
  run->add_option("config", config_path, "config file (json)")->required();
  run->add_option("--output", output_dir, "override the output directory");

  std::string r_spec;
  auto* sweep = app.add_subcommand("sweep", "run with an overridden list of reduced dimensions");
  sweep->add_option("config", config_path, "config file (json)")->required();
  sweep->add_option("--r", r_spec, "dimensions, e.g. 2:30 or 2,5,10")->required();
  sweep->add_option("--output", output_dir, "override the output directory");

  double multiplier = 3.0;
  auto* reuse = app.add_subcommand("reuse", "reuse the reduced model on a longer horizon");
  reuse->add_option("config", config_path, "config file (json)")->required();
  reuse->add_option("--multiplier", multiplier, "horizon multiplier (> 1)")->required();
  reuse->add_option("--output", output_dir, "override the output directory");

  std::string csv_path, svg_path, ycols;
  bool logy = false;
  std::string title;
  auto* plot = app.add_subcommand("plot", "render a CSV file as an SVG line chart");
  plot->add_option("csv", csv_path, "input csv (first column is x)")->required();
  plot->add_option("--out", svg_path, "output svg path")->required();
  plot->add_option("--y", ycols, "comma list of y column names (default: all)");
  plot->add_option("--title", title, "chart title");
  plot->add_flag("--logy", logy, "logarithmic y axis");

  auto* validate = app.add_subcommand("validate-config", "parse and check a config file");
  validate->add_option("config", config_path, "config file (json)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      pcmor::RunConfig cfg = pcmor::load_config_file(config_path);
      std::printf("config ok: %s\n", pcmor::serialize_config(cfg).c_str());
      return kExitOk;
    }
    if (app.got_subcommand(plot)) {
      const CsvTable table = read_csv(csv_path);
      std::vector<std::string> wanted;
      if (!ycols.empty()) {
        std::stringstream ss(ycols);
        std::string tok;
        while (std::getline(ss, tok, ',')) wanted.push_back(tok);
      }
      std::vector<pcmor::PlotSeries> series;
      for (size_t c = 1; c < table.header.size(); ++c) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), table.header[c]) == wanted.end())
          continue;
        pcmor::PlotSeries s;
        s.label = table.header[c];
        s.x = table.columns[0];
        s.y = table.columns[c];
        series.push_back(std::move(s));
      }
      pcmor::PlotOptions opts;
      opts.title = title.empty() ? csv_path : title;
      opts.xlabel = table.header[0];
      opts.logy = logy;
      pcmor::write_svg_plot(svg_path, series, opts);
      std::printf("wrote %s\n", svg_path.c_str());
      return kExitOk;
    }

    pcmor::RunConfig cfg = pcmor::load_config_file(config_path);
    if (!output_dir.empty()) cfg.outputs.directory = output_dir;
    if (app.got_subcommand(sweep)) {
      cfg.mor.r_values = parse_r_spec(r_spec);
      if (cfg.mor.r_values.empty()) throw std::invalid_argument("empty --r specification");
    }
    pcmor::PipelineResult result = app.got_subcommand(reuse)
                                       ? pcmor::reuse_rom(cfg, multiplier)
                                       : pcmor::run_pipeline(cfg);
    return report(result);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
