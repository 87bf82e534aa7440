#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fuelsurr/csv.hpp"
#include "fuelsurr/pipeline.hpp"

namespace {

using namespace fuelsurr;

RunConfig load_config(const std::string& config_path, std::uint64_t seed_override,
                      const std::string& out_override) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
  if (seed_override != 0) cfg.seed = seed_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  cfg.validate();
  return cfg;
}

void print_summary(const PipelineSummary& s) {
  std::printf("design samples retained: %zu\n", s.design_retained);
  for (const auto& [qoi, kind] : s.selected_kind) {
    const MetricReport& m = s.test_metrics.at(qoi);
    std::printf("%-28s %-14s R2=%8.4f  RMSE=%.4g  MAE=%.4g\n", qoi.c_str(), kind.c_str(), m.r2,
                m.rmse, m.mae);
  }
  if (s.runtime.n_rods > 0)
    std::printf("runtime: surrogate %.4f ms/rod, simulator %.4f ms/rod, speedup %.1fx\n",
                s.runtime.surrogate_ms_per_rod, s.runtime.simulator_ms_per_rod,
                s.runtime.speedup);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-core fuel-performance surrogate toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  app.add_option("--config", config_path, "run configuration JSON");
  app.add_option("--seed", seed_override, "override the global seed");
  app.add_option("--out", out_override, "override the output directory");

  std::string qoi_filter;
  std::string core_path;
  std::string screen_out = "screening.csv";

  CLI::App* c_sim = app.add_subcommand("simulate", "simulate all cores and tabulate QoIs");
  CLI::App* c_lut = app.add_subcommand("build-lut", "build the per-QoI lookup tables");
  c_lut->add_option("--qoi", qoi_filter, "export only this QoI's tables");
  CLI::App* c_feat = app.add_subcommand("extract-features", "extract coefficient features");
  CLI::App* c_design = app.add_subcommand("design", "draw the space-filling training design");
  CLI::App* c_train = app.add_subcommand("train", "label the design and fit per-QoI surrogates");
  c_train->add_option("--qoi", qoi_filter, "train only this QoI's surrogate");
  CLI::App* c_eval = app.add_subcommand("evaluate", "evaluate surrogates on the held-out core");
  CLI::App* c_screen = app.add_subcommand("screen-core", "predict QoIs and PCI flags for a core");
  c_screen->add_option("--core", core_path, "core dataset JSON artifact")->required();
  c_screen->add_option("--screen-out", screen_out, "output CSV path");
  CLI::App* c_bench = app.add_subcommand("benchmark", "time the combined surrogate vs the simulator");
  CLI::App* c_run = app.add_subcommand("run", "run the full pipeline");
  CLI::App* c_gen = app.add_subcommand("generate", "generate the synthetic cores");

  // global flags may follow the subcommand name
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  std::string stage = "setup";
  try {
    const RunConfig cfg = load_config(config_path, seed_override, out_override);
    if (c_gen->parsed() || c_run->parsed()) {
      stage = "generate";
      stage_generate(cfg);
    }
    if (c_sim->parsed() || c_run->parsed()) {
      stage = "simulate";
      stage_simulate(cfg);
    }
    if (c_lut->parsed() || c_run->parsed()) {
      stage = "build-lut";
      stage_build_luts(cfg, c_lut->parsed() ? qoi_filter : "");
    }
    if (c_feat->parsed() || c_run->parsed()) {
      stage = "extract-features";
      stage_extract_features(cfg);
    }
    if (c_design->parsed() || c_run->parsed()) {
      stage = "design";
      stage_design(cfg);
    }
    if (c_train->parsed() || c_run->parsed()) {
      stage = "train";
      stage_train(cfg, c_train->parsed() ? qoi_filter : "");
    }
    if (c_eval->parsed() || c_run->parsed()) {
      stage = "evaluate";
      stage_evaluate(cfg);
      print_summary(read_summary(cfg));
    }
    if (c_bench->parsed() || c_run->parsed()) {
      stage = "benchmark";
      stage_benchmark(cfg);
      const PipelineSummary s = read_summary(cfg);
      std::printf("runtime: surrogate %.4f ms/rod, simulator %.4f ms/rod, speedup %.1fx\n",
                  s.runtime.surrogate_ms_per_rod, s.runtime.simulator_ms_per_rod,
                  s.runtime.speedup);
    }
    if (c_screen->parsed()) {
      stage = "screen-core";
      const CoreDataset core = core_from_json(load_artifact(core_path, "core"));
      const ScreeningResult res = screen_core(cfg, core);
      write_csv(screen_out, res.header, res.rows);
      std::printf("screened %zu rods, %zu flagged PCI-vulnerable -> %s\n", res.rows.size(),
                  res.vulnerable, screen_out.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "[stage:" << stage << "] error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
