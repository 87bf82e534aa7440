#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fuelsurr/doe.hpp"
#include "fuelsurr/eval.hpp"
#include "fuelsurr/features.hpp"
#include "fuelsurr/lut.hpp"
#include "fuelsurr/ml.hpp"
#include "fuelsurr/pci_risk.hpp"
#include "fuelsurr/rodsim.hpp"

namespace fuelsurr {

// Trajectory family for synthetic cores: per-cycle quartic coefficient draws
// kept inside the physical envelope by construction.
struct CoreGenParams {
  double ifba_fraction = 1.0 / 3.0;
  double cycle1_power_lo = 13.0;   // kW/m
  double cycle1_power_hi = 26.0;
  double cycle_ratio_lo = 0.75;    // cycle-to-cycle power carryover
  double cycle_ratio_hi = 1.04;
  double power_floor = 0.8;
  double power_ceiling = 29.2;
  double drift_use_lo = 0.15;      // fraction of the bound margin spent on drift
  double drift_use_hi = 0.85;
  double pf_lo = 1.10;
  double pf_hi = 1.48;
  double pf_floor = 1.02;
  double pf_ceiling = 1.58;
  double pf_ratio_lo = 0.94;
  double pf_ratio_hi = 1.05;
};

struct SyntheticRod {
  int index = 0;
  bool ifba = false;
  std::vector<CycleCoeffs> cycles;
};

struct CoreDataset {
  std::string core_id;
  ScheduleTemplate schedule;
  std::vector<SyntheticRod> rods;

  void validate() const;
};

CoreDataset generate_synthetic_core(std::uint64_t seed, int n_rods, const ScheduleTemplate& tmpl,
                                    const CoreGenParams& gen = {}, const std::string& core_id = "core");

PowerHistory materialize_history(const SyntheticRod& rod, const ScheduleTemplate& tmpl);

std::string core_to_json(const CoreDataset& core);
CoreDataset core_from_json(const std::string& text);

// ---- run configuration ------------------------------------------------------

struct TrainConfig {
  int cv_folds = 5;
  std::vector<ModelKind> candidates = {ModelKind::kPls, ModelKind::kGbt, ModelKind::kNn};
  Hyperparameters defaults;  // per-kind settings shared by all candidates
  // a faster kind within this CV-R2 margin of the best wins the tie
  double speed_preference_margin = 0.01;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string sim_config_path;   // empty -> shipped defaults
  std::string yield_table_path;  // empty -> shipped defaults
  std::string cdi_cdf_path;      // empty -> shipped defaults
  ScheduleTemplate schedule;
  CoreGenParams generation;
  int n_cores = 3;
  int rods_per_core = 500;
  int holdout_core = 2;  // evaluated, never pooled into the design
  DesignConfig design;
  std::vector<double> lut_lhgr_grid = default_lhgr_grid();
  std::vector<double> lut_burnup_grid = default_burnup_grid();
  TrainConfig train;
  int benchmark_repeats = 5;
  int benchmark_rods = 64;

  void validate() const;
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  SimConfig sim_config() const;
  PciRiskEngine risk_engine() const;
};

// ---- artifact container -------------------------------------------------------

// Every on-disk artifact is wrapped with a schema version and a content hash;
// loading verifies both.
void save_artifact(const std::string& path, const std::string& kind, const std::string& payload);
std::string load_artifact(const std::string& path, const std::string& kind);
std::uint64_t fnv1a64(const std::string& text);

// ---- stages -------------------------------------------------------------------

// Each stage reads its inputs from out_dir and writes its outputs there, so a
// stage invoked on its own produces the same artifacts as the full run. The
// optional qoi filter narrows table export / model training to one QoI.
void stage_generate(const RunConfig& cfg);
void stage_simulate(const RunConfig& cfg);
void stage_build_luts(const RunConfig& cfg, const std::string& qoi_filter = "");
void stage_extract_features(const RunConfig& cfg);
void stage_design(const RunConfig& cfg);
void stage_train(const RunConfig& cfg, const std::string& qoi_filter = "");
void stage_evaluate(const RunConfig& cfg);
void stage_benchmark(const RunConfig& cfg);

struct PipelineSummary {
  std::size_t design_retained = 0;
  std::map<std::string, std::string> selected_kind;  // qoi -> model kind
  std::map<std::string, MetricReport> test_metrics;  // qoi -> held-out metrics
  std::map<std::string, MetricReport> lut_metrics;   // qoi -> LUT baseline metrics
  RuntimeReport runtime;
};

PipelineSummary run_pipeline(const RunConfig& cfg);
PipelineSummary read_summary(const RunConfig& cfg);

// Combined per-QoI surrogate over a feature table (hoop stress consumes the
// extra LUT column); used by screening and benchmarking.
struct CombinedSurrogate {
  std::map<std::string, TrainedSurrogate> models;  // keyed by QoI name

  QoiVector predict_row(const std::vector<double>& base_features, double hoop_lut_feature) const;
};

CombinedSurrogate load_combined_surrogate(const RunConfig& cfg);

// Predict all QoIs for every rod of a core dataset and flag PCI-vulnerable
// rods (predicted failure risk above 0.5); returns CSV-ready rows.
struct ScreeningResult {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t vulnerable = 0;
};
ScreeningResult screen_core(const RunConfig& cfg, const CoreDataset& core);

}  // namespace fuelsurr
