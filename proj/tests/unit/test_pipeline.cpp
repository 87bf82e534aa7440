#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fuelsurr/pipeline.hpp"

using namespace fuelsurr;
namespace fs = std::filesystem;

namespace {

RunConfig micro_config(const std::string& out_dir) {
  RunConfig cfg;
  cfg.seed = 20240917;
  cfg.out_dir = out_dir;
  cfg.n_cores = 2;
  cfg.rods_per_core = 24;
  cfg.holdout_core = 1;
  cfg.schedule.cycle_days = 120.0;
  cfg.design.n_clusters = 2;
  cfg.design.samples_per_cluster = 30;
  cfg.design.maximin_trials = 8;
  cfg.design.kmeans_restarts = 3;
  cfg.lut_lhgr_grid = {5.0, 15.0, 25.0, 30.0};
  cfg.lut_burnup_grid = {0.0, 4000.0, 8000.0, 12000.0, 16000.0};
  cfg.train.cv_folds = 3;
  cfg.train.candidates = {ModelKind::kPls, ModelKind::kGbt};
  cfg.train.defaults.gbt.n_rounds = 60;
  cfg.train.defaults.gbt.max_depth = 3;
  cfg.benchmark_repeats = 3;
  cfg.benchmark_rods = 8;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synthetic core generation") {
  const ScheduleTemplate tmpl;

  SUBCASE("same seed reproduces the core") {
    const CoreDataset a = generate_synthetic_core(99, 40, tmpl);
    const CoreDataset b = generate_synthetic_core(99, 40, tmpl);
    REQUIRE(a.rods.size() == b.rods.size());
    for (std::size_t i = 0; i < a.rods.size(); ++i) {
      CHECK(a.rods[i].ifba == b.rods[i].ifba);
      for (int c = 0; c < 2; ++c)
        for (int k = 0; k < 5; ++k) {
          CHECK(a.rods[i].cycles[c].lhgr[k] == b.rods[i].cycles[c].lhgr[k]);
          CHECK(a.rods[i].cycles[c].max_pf[k] == b.rods[i].cycles[c].max_pf[k]);
        }
    }
  }

  SUBCASE("every generated rod passes the physical filter") {
    const CoreDataset core = generate_synthetic_core(7, 60, tmpl);
    for (const SyntheticRod& rod : core.rods) {
      const ReconstructionResult rec = build_history_from_coeffs(rod.cycles, tmpl);
      CHECK(rec.physical());
    }
  }

  SUBCASE("core json round trip") {
    const CoreDataset core = generate_synthetic_core(13, 10, tmpl);
    const CoreDataset back = core_from_json(core_to_json(core));
    CHECK(back.core_id == core.core_id);
    REQUIRE(back.rods.size() == core.rods.size());
    for (std::size_t i = 0; i < core.rods.size(); ++i)
      for (int c = 0; c < 2; ++c)
        for (int k = 0; k < 5; ++k)
          CHECK(back.rods[i].cycles[c].lhgr[k] == core.rods[i].cycles[c].lhgr[k]);
  }

  SUBCASE("ifba fraction tracks the request") {
    const CoreDataset core = generate_synthetic_core(21, 600, tmpl);
    std::size_t n_ifba = 0;
    for (const SyntheticRod& r : core.rods) n_ifba += r.ifba ? 1 : 0;
    CHECK(n_ifba > 120);
    CHECK(n_ifba < 280);  // around a third of 600
  }
}

TEST_CASE("artifact container integrity") {
  const fs::path dir = "test_artifacts";
  fs::create_directories(dir);
  const std::string payload = R"({"hello": [1, 2, 3]})";
  const std::string path = (dir / "a.json").string();
  save_artifact(path, "probe", payload);

  SUBCASE("round trip") { CHECK(load_artifact(path, "probe") == payload); }

  SUBCASE("kind mismatch refused") {
    CHECK_THROWS_AS(load_artifact(path, "other"), std::runtime_error);
  }

  SUBCASE("corrupted payload refused") {
    std::string text = slurp(path);
    const auto pos = text.find("hello");
    text.replace(pos, 5, "jello");
    std::ofstream out(path);
    out << text;
    out.close();
    CHECK_THROWS_AS(load_artifact(path, "probe"), std::runtime_error);
  }

  SUBCASE("version mismatch names both versions") {
    std::string text = slurp(path);
    const auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"version\":9");
    std::ofstream out(path);
    out << text;
    out.close();
    try {
      load_artifact(path, "probe");
      FAIL("expected a version error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("9") != std::string::npos);
      CHECK(msg.find("1") != std::string::npos);
    }
  }

  fs::remove_all(dir);
}

TEST_CASE("run config file round trip") {
  RunConfig cfg = micro_config("cfg_probe_out");
  const std::string path = "test_run_config.json";
  cfg.save(path);
  const RunConfig back = RunConfig::load(path);
  CHECK(back.seed == cfg.seed);
  CHECK(back.rods_per_core == cfg.rods_per_core);
  CHECK(back.design.samples_per_cluster == cfg.design.samples_per_cluster);
  CHECK(back.train.candidates == cfg.train.candidates);
  CHECK(back.train.defaults.gbt.n_rounds == 60);
  CHECK(back.lut_burnup_grid == cfg.lut_burnup_grid);
  fs::remove(path);
}

TEST_CASE("micro pipeline end to end") {
  const std::string out = "test_pipeline_out";
  fs::remove_all(out);
  RunConfig cfg = micro_config(out);

  const PipelineSummary summary = run_pipeline(cfg);

  SUBCASE("all eight QoIs are reported") {
    CHECK(summary.test_metrics.size() == kNumQois);
    CHECK(summary.lut_metrics.size() == kNumQois);
    for (QoiId q : all_qois()) {
      CHECK(summary.test_metrics.count(qoi_name(q)) == 1);
      CHECK(summary.selected_kind.count(qoi_name(q)) == 1);
    }
    CHECK(summary.design_retained > 0);
    CHECK(summary.runtime.speedup > 1.0);
  }

  SUBCASE("reports are byte-identical on a rerun") {
    const std::string first = slurp(fs::path(out) / "reports" / "summary.json");
    const std::string first_design = slurp(fs::path(out) / "design" / "design.csv");
    run_pipeline(cfg);
    CHECK(slurp(fs::path(out) / "reports" / "summary.json") == first);
    CHECK(slurp(fs::path(out) / "design" / "design.csv") == first_design);
  }

  SUBCASE("cross-run model reload gives identical predictions") {
    const CombinedSurrogate cs = load_combined_surrogate(cfg);
    const CoreDataset probe = generate_synthetic_core(5, 6, cfg.schedule);
    std::vector<QoiVector> before;
    {
      const ScreeningResult sr = screen_core(cfg, probe);
      CHECK(sr.rows.size() == 6);
    }
    // reload from disk and compare a direct prediction
    const CombinedSurrogate cs2 = load_combined_surrogate(cfg);
    std::vector<double> row(21, 0.0);
    row[0] = 18.0;
    row[5] = 1.3;
    row[10] = 16.0;
    row[15] = 1.25;
    const QoiVector a = cs.predict_row(row, 10.0);
    const QoiVector b = cs2.predict_row(row, 10.0);
    for (std::size_t k = 0; k < kNumQois; ++k) CHECK(a.values[k] == b.values[k]);
  }

  SUBCASE("held-out rods never appear in the design pool") {
    // design pooling reads only the training cores by construction; verify the
    // audit flag recorded in the summary
    std::ifstream in(fs::path(out) / "reports" / "summary.json");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("\"holdout_pooled_into_design\": false") != std::string::npos);
  }

  fs::remove_all(out);
}
