#include "fuelsurr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fuelsurr/csv.hpp"
#include "fuelsurr/rng.hpp"
#include "json.hpp"

namespace fuelsurr {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- synthetic cores ---------------------------------------------------------

void CoreDataset::validate() const {
  schedule.validate();
  for (const SyntheticRod& r : rods)
    if (r.cycles.size() != static_cast<std::size_t>(schedule.n_cycles))
      throw std::invalid_argument("CoreDataset: rod cycle count does not match the schedule");
}

namespace {

// drift coefficients with |sum| bounded so the trajectory stays inside
// [floor, ceiling] by construction
void draw_drift(Rng& rng, double level, double floor, double ceiling, double use_lo,
                double use_hi, PolyCoeffs& out) {
  const double margin = std::min(level - floor, ceiling - level);
  const double weights[4] = {1.0, 0.6, 0.35, 0.2};
  double raw[4];
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    raw[k] = rng.uniform(-weights[k], weights[k]);
    total += std::abs(raw[k]);
  }
  const double budget = margin * rng.uniform(use_lo, use_hi);
  const double scale = total > 0.0 ? budget / total : 0.0;
  out[0] = level;
  for (int k = 0; k < 4; ++k) out[k + 1] = raw[k] * scale;
}

}  // namespace

CoreDataset generate_synthetic_core(std::uint64_t seed, int n_rods, const ScheduleTemplate& tmpl,
                                    const CoreGenParams& gen, const std::string& core_id) {
  if (n_rods < 1) throw std::invalid_argument("generate_synthetic_core: need >= 1 rod");
  tmpl.validate();

  CoreDataset core;
  core.core_id = core_id;
  core.schedule = tmpl;
  core.rods.reserve(n_rods);

  Rng rng(seed);
  for (int i = 0; i < n_rods; ++i) {
    Rng rod_rng = rng.child(static_cast<std::uint64_t>(i));
    SyntheticRod rod;
    rod.index = i;
    rod.ifba = rod_rng.u01() < gen.ifba_fraction;

    double level = rod_rng.uniform(gen.cycle1_power_lo, gen.cycle1_power_hi);
    double pf = rod_rng.uniform(gen.pf_lo, gen.pf_hi);
    for (int c = 0; c < tmpl.n_cycles; ++c) {
      CycleCoeffs cc;
      draw_drift(rod_rng, level, gen.power_floor, gen.power_ceiling, gen.drift_use_lo,
                 gen.drift_use_hi, cc.lhgr);
      draw_drift(rod_rng, pf, gen.pf_floor, gen.pf_ceiling, gen.drift_use_lo, gen.drift_use_hi,
                 cc.max_pf);
      rod.cycles.push_back(cc);
      level = std::clamp(level * rod_rng.uniform(gen.cycle_ratio_lo, gen.cycle_ratio_hi),
                         gen.power_floor + 2.0, gen.power_ceiling - 2.0);
      pf = std::clamp(pf * rod_rng.uniform(gen.pf_ratio_lo, gen.pf_ratio_hi),
                      gen.pf_floor + 0.02, gen.pf_ceiling - 0.02);
    }
    core.rods.push_back(std::move(rod));
  }
  return core;
}

PowerHistory materialize_history(const SyntheticRod& rod, const ScheduleTemplate& tmpl) {
  return build_history_from_coeffs(rod.cycles, tmpl).history;
}

namespace {

json schedule_to_json(const ScheduleTemplate& t) {
  return json{{"n_cycles", t.n_cycles},       {"cycle_days", t.cycle_days},
              {"shutdown_days", t.shutdown_days}, {"ramp_dt_h", t.ramp_dt_h},
              {"steady_dt_h", t.steady_dt_h}, {"axial_nodes", t.axial_nodes},
              {"pf_shape_width", t.pf_shape_width}};
}

ScheduleTemplate schedule_from_json(const json& j) {
  ScheduleTemplate t;
  t.n_cycles = j.value("n_cycles", t.n_cycles);
  t.cycle_days = j.value("cycle_days", t.cycle_days);
  t.shutdown_days = j.value("shutdown_days", t.shutdown_days);
  t.ramp_dt_h = j.value("ramp_dt_h", t.ramp_dt_h);
  t.steady_dt_h = j.value("steady_dt_h", t.steady_dt_h);
  t.axial_nodes = j.value("axial_nodes", t.axial_nodes);
  t.pf_shape_width = j.value("pf_shape_width", t.pf_shape_width);
  return t;
}

}  // namespace

std::string core_to_json(const CoreDataset& core) {
  json j;
  j["core_id"] = core.core_id;
  j["schedule"] = schedule_to_json(core.schedule);
  json rods = json::array();
  for (const SyntheticRod& r : core.rods) {
    json jr;
    jr["index"] = r.index;
    jr["ifba"] = r.ifba;
    json cyc = json::array();
    for (const CycleCoeffs& c : r.cycles)
      cyc.push_back(json{{"lhgr", c.lhgr}, {"max_pf", c.max_pf}});
    jr["cycles"] = std::move(cyc);
    rods.push_back(std::move(jr));
  }
  j["rods"] = std::move(rods);
  return j.dump();
}

CoreDataset core_from_json(const std::string& text) {
  json j = json::parse(text);
  CoreDataset core;
  core.core_id = j.at("core_id").get<std::string>();
  core.schedule = schedule_from_json(j.at("schedule"));
  for (const json& jr : j.at("rods")) {
    SyntheticRod r;
    r.index = jr.at("index").get<int>();
    r.ifba = jr.at("ifba").get<bool>();
    for (const json& jc : jr.at("cycles")) {
      CycleCoeffs c;
      c.lhgr = jc.at("lhgr").get<PolyCoeffs>();
      c.max_pf = jc.at("max_pf").get<PolyCoeffs>();
      r.cycles.push_back(c);
    }
    core.rods.push_back(std::move(r));
  }
  core.validate();
  return core;
}

// ---- run configuration ---------------------------------------------------------

void RunConfig::validate() const {
  schedule.validate();
  design.validate();
  if (n_cores < 1 || rods_per_core < 1) throw std::invalid_argument("RunConfig: core sizes");
  if (holdout_core < 0 || holdout_core >= n_cores)
    throw std::invalid_argument("RunConfig: holdout core out of range");
  if (train.cv_folds < 2) throw std::invalid_argument("RunConfig: cv folds must be >= 2");
  if (train.candidates.empty()) throw std::invalid_argument("RunConfig: no candidate kinds");
  train.defaults.validate();
  if (benchmark_repeats < 3 || benchmark_rods < 1)
    throw std::invalid_argument("RunConfig: benchmark settings");
  if (lut_lhgr_grid.size() < 2 || lut_burnup_grid.size() < 2)
    throw std::invalid_argument("RunConfig: LUT grids need >= 2 knots");
}

SimConfig RunConfig::sim_config() const {
  if (sim_config_path.empty()) return SimConfig{};
  return SimConfig::load(sim_config_path);
}

PciRiskEngine RunConfig::risk_engine() const {
  YieldTable y = yield_table_path.empty() ? YieldTable::default_table()
                                          : YieldTable::load_csv(yield_table_path);
  CdiCdf c = cdi_cdf_path.empty() ? CdiCdf::default_table() : CdiCdf::load_csv(cdi_cdf_path);
  return PciRiskEngine(std::move(y), std::move(c));
}

namespace {

json hyper_defaults_to_json(const Hyperparameters& hp) {
  json j;
  j["pls"] = {{"n_components", hp.pls.n_components}};
  j["gp"] = {{"lengthscale", hp.gp.lengthscale},
             {"signal_variance", hp.gp.signal_variance},
             {"noise_variance", hp.gp.noise_variance}};
  j["nn"] = {{"hidden", hp.nn.hidden},
             {"learning_rate", hp.nn.learning_rate},
             {"epochs", hp.nn.epochs},
             {"batch_size", hp.nn.batch_size}};
  j["rf"] = {{"n_trees", hp.rf.n_trees},
             {"max_depth", hp.rf.max_depth},
             {"features_per_split", hp.rf.features_per_split},
             {"min_samples_leaf", hp.rf.min_samples_leaf},
             {"bootstrap", hp.rf.bootstrap}};
  j["gbt"] = {{"n_rounds", hp.gbt.n_rounds},
              {"max_depth", hp.gbt.max_depth},
              {"learning_rate", hp.gbt.learning_rate},
              {"min_samples_leaf", hp.gbt.min_samples_leaf}};
  return j;
}

void hyper_defaults_from_json(const json& j, Hyperparameters& hp) {
  if (j.contains("pls")) hp.pls.n_components = j["pls"].value("n_components", hp.pls.n_components);
  if (j.contains("gp")) {
    hp.gp.lengthscale = j["gp"].value("lengthscale", hp.gp.lengthscale);
    hp.gp.signal_variance = j["gp"].value("signal_variance", hp.gp.signal_variance);
    hp.gp.noise_variance = j["gp"].value("noise_variance", hp.gp.noise_variance);
  }
  if (j.contains("nn")) {
    hp.nn.hidden = j["nn"].value("hidden", hp.nn.hidden);
    hp.nn.learning_rate = j["nn"].value("learning_rate", hp.nn.learning_rate);
    hp.nn.epochs = j["nn"].value("epochs", hp.nn.epochs);
    hp.nn.batch_size = j["nn"].value("batch_size", hp.nn.batch_size);
  }
  if (j.contains("rf")) {
    hp.rf.n_trees = j["rf"].value("n_trees", hp.rf.n_trees);
    hp.rf.max_depth = j["rf"].value("max_depth", hp.rf.max_depth);
    hp.rf.features_per_split = j["rf"].value("features_per_split", hp.rf.features_per_split);
    hp.rf.min_samples_leaf = j["rf"].value("min_samples_leaf", hp.rf.min_samples_leaf);
    hp.rf.bootstrap = j["rf"].value("bootstrap", hp.rf.bootstrap);
  }
  if (j.contains("gbt")) {
    hp.gbt.n_rounds = j["gbt"].value("n_rounds", hp.gbt.n_rounds);
    hp.gbt.max_depth = j["gbt"].value("max_depth", hp.gbt.max_depth);
    hp.gbt.learning_rate = j["gbt"].value("learning_rate", hp.gbt.learning_rate);
    hp.gbt.min_samples_leaf = j["gbt"].value("min_samples_leaf", hp.gbt.min_samples_leaf);
  }
}

}  // namespace

void RunConfig::save(const std::string& path) const {
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["sim_config"] = sim_config_path;
  j["yield_table"] = yield_table_path;
  j["cdi_cdf"] = cdi_cdf_path;
  j["schedule"] = schedule_to_json(schedule);
  j["cores"] = {{"count", n_cores}, {"rods_per_core", rods_per_core},
                {"holdout", holdout_core}, {"ifba_fraction", generation.ifba_fraction}};
  j["design"] = {{"n_clusters", design.n_clusters},
                 {"samples_per_cluster", design.samples_per_cluster},
                 {"maximin_trials", design.maximin_trials},
                 {"kmeans_restarts", design.kmeans_restarts},
                 {"lhgr_cap_kw_m", design.lhgr_cap_kw_m},
                 {"pf_cap", design.pf_cap}};
  j["lut"] = {{"lhgr_grid", lut_lhgr_grid}, {"burnup_grid", lut_burnup_grid}};
  std::vector<std::string> cand;
  for (ModelKind k : train.candidates) cand.push_back(model_kind_name(k));
  j["train"] = {{"cv_folds", train.cv_folds},
                {"candidates", cand},
                {"speed_preference_margin", train.speed_preference_margin},
                {"hyperparameters", hyper_defaults_to_json(train.defaults)}};
  j["benchmark"] = {{"repeats", benchmark_repeats}, {"rods", benchmark_rods}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunConfig: cannot write " + path);
  out << j.dump(2) << "\n";
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("RunConfig: cannot open " + path);
  json j = json::parse(in);
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.sim_config_path = j.value("sim_config", cfg.sim_config_path);
  cfg.yield_table_path = j.value("yield_table", cfg.yield_table_path);
  cfg.cdi_cdf_path = j.value("cdi_cdf", cfg.cdi_cdf_path);
  if (j.contains("schedule")) cfg.schedule = schedule_from_json(j["schedule"]);
  if (j.contains("cores")) {
    cfg.n_cores = j["cores"].value("count", cfg.n_cores);
    cfg.rods_per_core = j["cores"].value("rods_per_core", cfg.rods_per_core);
    cfg.holdout_core = j["cores"].value("holdout", cfg.holdout_core);
    cfg.generation.ifba_fraction = j["cores"].value("ifba_fraction", cfg.generation.ifba_fraction);
  }
  if (j.contains("design")) {
    const json& d = j["design"];
    cfg.design.n_clusters = d.value("n_clusters", cfg.design.n_clusters);
    cfg.design.samples_per_cluster = d.value("samples_per_cluster", cfg.design.samples_per_cluster);
    cfg.design.maximin_trials = d.value("maximin_trials", cfg.design.maximin_trials);
    cfg.design.kmeans_restarts = d.value("kmeans_restarts", cfg.design.kmeans_restarts);
    cfg.design.lhgr_cap_kw_m = d.value("lhgr_cap_kw_m", cfg.design.lhgr_cap_kw_m);
    cfg.design.pf_cap = d.value("pf_cap", cfg.design.pf_cap);
  }
  if (j.contains("lut")) {
    cfg.lut_lhgr_grid = j["lut"].value("lhgr_grid", cfg.lut_lhgr_grid);
    cfg.lut_burnup_grid = j["lut"].value("burnup_grid", cfg.lut_burnup_grid);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    cfg.train.cv_folds = t.value("cv_folds", cfg.train.cv_folds);
    cfg.train.speed_preference_margin =
        t.value("speed_preference_margin", cfg.train.speed_preference_margin);
    if (t.contains("candidates")) {
      cfg.train.candidates.clear();
      for (const auto& name : t["candidates"])
        cfg.train.candidates.push_back(parse_model_kind(name.get<std::string>()));
    }
    if (t.contains("hyperparameters")) hyper_defaults_from_json(t["hyperparameters"], cfg.train.defaults);
  }
  if (j.contains("benchmark")) {
    cfg.benchmark_repeats = j["benchmark"].value("repeats", cfg.benchmark_repeats);
    cfg.benchmark_rods = j["benchmark"].value("rods", cfg.benchmark_rods);
  }
  cfg.validate();
  return cfg;
}

// ---- artifact container ----------------------------------------------------------

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void save_artifact(const std::string& path, const std::string& kind, const std::string& payload) {
  json j;
  j["format"] = "fuelsurr-artifact";
  j["artifact"] = kind;
  j["version"] = 1;
  j["hash"] = fnv1a64(payload);
  j["payload"] = payload;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_artifact: cannot write " + path);
  out << j.dump() << "\n";
}

std::string load_artifact(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_artifact: cannot open " + path);
  json j = json::parse(in);
  if (j.value("format", "") != "fuelsurr-artifact")
    throw std::runtime_error("load_artifact: " + path + " is not an artifact file");
  const int version = j.at("version").get<int>();
  if (version != 1)
    throw std::runtime_error("load_artifact: " + path + ": version " + std::to_string(version) +
                             ", expected 1");
  if (j.at("artifact").get<std::string>() != kind)
    throw std::runtime_error("load_artifact: " + path + ": artifact kind '" +
                             j.at("artifact").get<std::string>() + "', expected '" + kind + "'");
  std::string payload = j.at("payload").get<std::string>();
  if (j.at("hash").get<std::uint64_t>() != fnv1a64(payload))
    throw std::runtime_error("load_artifact: " + path + ": content hash mismatch");
  return payload;
}

// ---- stage plumbing ----------------------------------------------------------------

namespace {

struct Paths {
  fs::path root;
  explicit Paths(const RunConfig& cfg) : root(cfg.out_dir) {}
  fs::path core(int i) const { return root / "cores" / ("core_" + std::to_string(i) + ".json"); }
  fs::path qois(int i) const { return root / "qois" / ("core_" + std::to_string(i) + ".csv"); }
  fs::path lut(QoiId q, bool ifba) const {
    return root / "luts" /
           (std::string(qoi_name(q)) + (ifba ? "_ifba" : "_std") + ".csv");
  }
  fs::path lut_manifest(QoiId q, bool ifba) const {
    return root / "luts" /
           (std::string(qoi_name(q)) + (ifba ? "_ifba" : "_std") + ".manifest.json");
  }
  fs::path features(int i) const {
    return root / "features" / ("core_" + std::to_string(i) + ".csv");
  }
  fs::path feature_schema() const { return root / "features" / "schema.json"; }
  fs::path design_csv() const { return root / "design" / "design.csv"; }
  fs::path design_manifest() const { return root / "design" / "manifest.json"; }
  fs::path train_labels() const { return root / "datasets" / "train_labels.csv"; }
  fs::path model(QoiId q) const { return root / "models" / (std::string(qoi_name(q)) + ".json"); }
  fs::path summary() const { return root / "reports" / "summary.json"; }
  fs::path error_cdf(QoiId q) const {
    return root / "reports" / (std::string(qoi_name(q)) + "_error_cdf.csv");
  }
  fs::path errors(QoiId q) const {
    return root / "reports" / (std::string(qoi_name(q)) + "_errors.csv");
  }
  fs::path runtime() const { return root / "reports" / "runtime.json"; }
};

void ensure_dir(const fs::path& p) { fs::create_directories(p); }

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return Rng(root).child(stream).next_u64();
}

// stage seed streams
constexpr std::uint64_t kSeedCores = 10;
constexpr std::uint64_t kSeedDesign = 20;
constexpr std::uint64_t kSeedTrain = 30;
constexpr std::uint64_t kSeedCv = 40;

CoreDataset load_core(const Paths& paths, int i) {
  return core_from_json(load_artifact(paths.core(i).string(), "core"));
}

std::vector<int> training_core_indices(const RunConfig& cfg) {
  std::vector<int> idx;
  for (int i = 0; i < cfg.n_cores; ++i)
    if (i != cfg.holdout_core) idx.push_back(i);
  return idx;
}

Lut2D load_hoop_lut(const Paths& paths, bool ifba) {
  Lut2D lut = load_lut_csv(paths.lut(QoiId::kMaxHoopStress, ifba).string());
  lut.qoi = QoiId::kMaxHoopStress;
  lut.ifba = ifba;
  return lut;
}

}  // namespace

void stage_generate(const RunConfig& cfg) {
  cfg.validate();
  Paths paths(cfg);
  ensure_dir(paths.root / "cores");
  for (int i = 0; i < cfg.n_cores; ++i) {
    const CoreDataset core =
        generate_synthetic_core(derive_seed(cfg.seed, kSeedCores + i), cfg.rods_per_core,
                                cfg.schedule, cfg.generation, "core_" + std::to_string(i));
    save_artifact(paths.core(i).string(), "core", core_to_json(core));
  }
}

void stage_simulate(const RunConfig& cfg) {
  Paths paths(cfg);
  ensure_dir(paths.root / "qois");
  const SimConfig sim = cfg.sim_config();
  const PciRiskEngine engine = cfg.risk_engine();

  std::vector<std::string> header = {"rod_index", "ifba"};
  for (QoiId q : all_qois()) header.push_back(qoi_name(q));

  for (int i = 0; i < cfg.n_cores; ++i) {
    const CoreDataset core = load_core(paths, i);
    std::vector<std::vector<double>> rows;
    rows.reserve(core.rods.size());
    for (const SyntheticRod& rod : core.rods) {
      const PowerHistory h = materialize_history(rod, core.schedule);
      const RodTrace tr = simulate_rod(default_rod_spec(rod.ifba), h, sim);
      const QoiVector q = extract_qois(tr, engine);
      std::vector<double> row = {static_cast<double>(rod.index), rod.ifba ? 1.0 : 0.0};
      for (QoiId id : all_qois()) row.push_back(q.get(id));
      rows.push_back(std::move(row));
    }
    write_csv(paths.qois(i).string(), header, rows);
  }
}

void stage_build_luts(const RunConfig& cfg, const std::string& qoi_filter) {
  Paths paths(cfg);
  ensure_dir(paths.root / "luts");
  const SimConfig sim = cfg.sim_config();
  const PciRiskEngine engine = cfg.risk_engine();

  for (bool ifba : {false, true}) {
    const RodSpec spec = default_rod_spec(ifba);
    // one constant-power run per level serves every QoI table
    const double hm = heavy_metal_mtu_per_m(spec, sim);
    std::vector<Lut2D> luts;
    for (QoiId q : all_qois()) {
      Lut2D l;
      l.qoi = q;
      l.ifba = ifba;
      l.lhgr_axis = cfg.lut_lhgr_grid;
      l.burnup_axis = cfg.lut_burnup_grid;
      l.values = Matrix(cfg.lut_lhgr_grid.size(), cfg.lut_burnup_grid.size());
      luts.push_back(std::move(l));
    }

    for (std::size_t li = 0; li < cfg.lut_lhgr_grid.size(); ++li) {
      const double q = cfg.lut_lhgr_grid[li];
      const double days = cfg.lut_burnup_grid.back() * hm / (q * 1e-3);
      const std::size_t steps = static_cast<std::size_t>(std::ceil(days)) + 2;
      PowerHistory h;
      h.times_h.resize(steps);
      h.lhgr_kw_m.assign(steps, q);
      h.pf_profiles = Matrix(steps, 1, 1.0);
      h.cycle_starts = {0};
      for (std::size_t s = 0; s < steps; ++s) h.times_h[s] = static_cast<double>(s) * 24.0;
      const RodTrace tr = simulate_rod(spec, h, sim);
      for (std::size_t bj = 0; bj < cfg.lut_burnup_grid.size(); ++bj) {
        auto it = std::lower_bound(tr.burnup_mwd_mtu.begin(), tr.burnup_mwd_mtu.end(),
                                   cfg.lut_burnup_grid[bj]);
        if (it == tr.burnup_mwd_mtu.end())
          throw std::runtime_error("stage_build_luts: burnup grid unreachable at " +
                                   std::to_string(q) + " kW/m");
        const std::size_t cut = static_cast<std::size_t>(it - tr.burnup_mwd_mtu.begin()) + 1;
        const QoiVector qv = extract_qois_prefix(tr, cut, engine);
        for (std::size_t k = 0; k < luts.size(); ++k)
          luts[k].values(li, bj) = qv.get(static_cast<QoiId>(static_cast<int>(k)));
      }
    }

    for (const Lut2D& l : luts) {
      if (!qoi_filter.empty() && qoi_filter != qoi_name(l.qoi)) continue;
      save_lut_csv(paths.lut(l.qoi, ifba).string(), l);
      std::ofstream mf(paths.lut_manifest(l.qoi, ifba));
      mf << lut_manifest_json(l, cfg.seed) << "\n";
    }
  }
}

void stage_extract_features(const RunConfig& cfg) {
  Paths paths(cfg);
  ensure_dir(paths.root / "features");
  const SimConfig sim = cfg.sim_config();
  const Lut2D hoop_std = load_hoop_lut(paths, false);
  const Lut2D hoop_ifba = load_hoop_lut(paths, true);

  const std::vector<std::string> base_names = feature_names(cfg.schedule.n_cycles, false);
  std::vector<std::string> header = {"rod_index"};
  header.insert(header.end(), base_names.begin(), base_names.end());
  header.push_back("lut_feat");

  for (int i = 0; i < cfg.n_cores; ++i) {
    const CoreDataset core = load_core(paths, i);
    std::vector<std::vector<double>> rows;
    rows.reserve(core.rods.size());
    for (const SyntheticRod& rod : core.rods) {
      const PowerHistory h = materialize_history(rod, core.schedule);
      const RodSpec spec = default_rod_spec(rod.ifba);
      const FeatureVector fv = extract_features(h, spec, FeatureVariant::kBase, core.schedule);
      const double lut_feat =
          lut_predict_rod(rod.ifba ? hoop_ifba : hoop_std, h, sim, spec);
      std::vector<double> row = {static_cast<double>(rod.index)};
      row.insert(row.end(), fv.values.begin(), fv.values.end());
      row.push_back(lut_feat);
      rows.push_back(std::move(row));
    }
    write_csv(paths.features(i).string(), header, rows);
  }

  // column semantics for downstream consumers
  json schema;
  schema["n_cycles"] = cfg.schedule.n_cycles;
  schema["columns"] = header;
  schema["coefficient_order"] = "lowest degree first, cycle time normalized to [0,1]";
  schema["rod_type"] = "1 = IFBA, 0 = standard";
  schema["lut_feat"] = "hoop-stress LUT prediction for the rod [MPa]";
  std::ofstream sf(paths.feature_schema());
  sf << schema.dump(2) << "\n";
}

namespace {

Matrix base_feature_matrix(const CsvTable& t, int n_cycles) {
  const std::vector<std::string> names = feature_names(n_cycles, false);
  std::vector<std::size_t> cols;
  for (const std::string& n : names) cols.push_back(t.col(n));
  Matrix m(t.rows.size(), names.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = t.rows[i][cols[j]];
  return m;
}

}  // namespace

void stage_design(const RunConfig& cfg) {
  Paths paths(cfg);
  ensure_dir(paths.root / "design");

  std::vector<Matrix> pools;
  for (int i : training_core_indices(cfg))
    pools.push_back(base_feature_matrix(read_csv(paths.features(i).string()), cfg.schedule.n_cycles));

  DesignConfig dc = cfg.design;
  dc.seed = derive_seed(cfg.seed, kSeedDesign);
  const TrainingDesign td = design(pools, cfg.schedule.n_cycles, cfg.schedule, dc);

  std::vector<std::string> header = td.schema;
  header.push_back("cluster_id");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < td.samples.rows(); ++i) {
    std::vector<double> row = td.samples.row(i);
    row.push_back(static_cast<double>(td.cluster_id[i]));
    rows.push_back(std::move(row));
  }
  write_csv(paths.design_csv().string(), header, rows);
  std::ofstream mf(paths.design_manifest());
  mf << design_manifest_json(td) << "\n";
}

namespace {

const std::vector<ModelKind>& speed_order() {
  // ascending prediction cost (a small dense forward pass beats walking
  // hundreds of boosted trees)
  static const std::vector<ModelKind> order = {ModelKind::kPls, ModelKind::kNn, ModelKind::kGbt,
                                               ModelKind::kRandomForest, ModelKind::kGp};
  return order;
}

}  // namespace

void stage_train(const RunConfig& cfg, const std::string& qoi_filter) {
  Paths paths(cfg);
  ensure_dir(paths.root / "datasets");
  ensure_dir(paths.root / "models");
  const SimConfig sim = cfg.sim_config();
  const PciRiskEngine engine = cfg.risk_engine();
  const Lut2D hoop_std = load_hoop_lut(paths, false);
  const Lut2D hoop_ifba = load_hoop_lut(paths, true);

  // label every retained design sample with one simulator run
  const CsvTable dt = read_csv(paths.design_csv().string());
  const Matrix dx = base_feature_matrix(dt, cfg.schedule.n_cycles);
  const std::vector<std::string> base_names = feature_names(cfg.schedule.n_cycles, false);

  std::vector<std::string> header = base_names;
  header.push_back("lut_feat");
  for (QoiId q : all_qois()) header.push_back(qoi_name(q));

  std::vector<std::vector<double>> rows;
  rows.reserve(dx.rows());
  for (std::size_t i = 0; i < dx.rows(); ++i) {
    const FeatureVector fv = feature_from_row(dx.row(i), cfg.schedule.n_cycles, false);
    const bool ifba = feature_is_ifba(fv);
    const RodSpec spec = default_rod_spec(ifba);
    const ReconstructionResult rec = reconstruct_history(fv, cfg.schedule,
                                                         cfg.design.lhgr_cap_kw_m, cfg.design.pf_cap);
    const RodTrace tr = simulate_rod(spec, rec.history, sim);
    const QoiVector q = extract_qois(tr, engine);
    const double lut_feat = lut_predict_rod(ifba ? hoop_ifba : hoop_std, rec.history, sim, spec);

    std::vector<double> row = dx.row(i);
    row.push_back(lut_feat);
    for (QoiId id : all_qois()) row.push_back(q.get(id));
    rows.push_back(std::move(row));
  }
  write_csv(paths.train_labels().string(), header, rows);

  // per-QoI model selection and fit
  const CsvTable labels = read_csv(paths.train_labels().string());
  const Matrix base_x = base_feature_matrix(labels, cfg.schedule.n_cycles);
  const std::size_t lut_col = labels.col("lut_feat");

  for (QoiId qoi : all_qois()) {
    if (!qoi_filter.empty() && qoi_filter != qoi_name(qoi)) continue;
    const bool with_lut = qoi == QoiId::kMaxHoopStress;
    Dataset ds;
    ds.qoi_id = qoi_name(qoi);
    ds.schema = feature_names(cfg.schedule.n_cycles, with_lut);
    ds.x = Matrix(base_x.rows(), base_x.cols() + (with_lut ? 1 : 0));
    for (std::size_t i = 0; i < base_x.rows(); ++i) {
      for (std::size_t j = 0; j < base_x.cols(); ++j) ds.x(i, j) = base_x(i, j);
      if (with_lut) ds.x(i, base_x.cols()) = labels.rows[i][lut_col];
    }
    const std::size_t y_col = labels.col(qoi_name(qoi));
    ds.y.resize(labels.rows.size());
    for (std::size_t i = 0; i < labels.rows.size(); ++i) ds.y[i] = labels.rows[i][y_col];
    ds.validate();

    const int qoi_idx = static_cast<int>(qoi);
    const std::uint64_t cv_seed = derive_seed(cfg.seed, kSeedCv + qoi_idx);
    std::map<ModelKind, CvResult> cv_results;
    double best_r2 = -std::numeric_limits<double>::infinity();
    for (ModelKind kind : cfg.train.candidates) {
      Hyperparameters hp = cfg.train.defaults;
      hp.kind = kind;
      cv_results[kind] = cross_validate(ds, hp, cfg.train.cv_folds, cv_seed);
      best_r2 = std::max(best_r2, cv_results[kind].r2_mean);
    }
    // fastest kind within the margin wins
    ModelKind selected = cfg.train.candidates.front();
    bool found = false;
    for (ModelKind kind : speed_order()) {
      auto it = cv_results.find(kind);
      if (it == cv_results.end()) continue;
      if (it->second.r2_mean >= best_r2 - cfg.train.speed_preference_margin) {
        selected = kind;
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error("stage_train: no candidate selected for " +
                               std::string(qoi_name(qoi)));

    Hyperparameters hp = cfg.train.defaults;
    hp.kind = selected;
    TrainedSurrogate model = train(ds, hp, derive_seed(cfg.seed, kSeedTrain + qoi_idx));
    model.cv_r2_mean = cv_results[selected].r2_mean;
    model.cv_r2_std = cv_results[selected].r2_std;
    save_artifact(paths.model(qoi).string(), "model", surrogate_to_json(model));
  }
}

namespace {

struct EvalData {
  Matrix base_x;             // holdout base features
  std::vector<double> lut_feat;
  std::map<std::string, std::vector<double>> truth;  // per qoi
  std::vector<int> rod_index;
  std::vector<bool> ifba;
};

EvalData load_eval_data(const RunConfig& cfg, const Paths& paths) {
  EvalData ev;
  const CsvTable ft = read_csv(paths.features(cfg.holdout_core).string());
  ev.base_x = base_feature_matrix(ft, cfg.schedule.n_cycles);
  const std::size_t lut_col = ft.col("lut_feat");
  const std::size_t idx_col = ft.col("rod_index");
  for (const auto& row : ft.rows) {
    ev.lut_feat.push_back(row[lut_col]);
    ev.rod_index.push_back(static_cast<int>(row[idx_col]));
  }
  const CsvTable qt = read_csv(paths.qois(cfg.holdout_core).string());
  if (qt.rows.size() != ft.rows.size())
    throw std::runtime_error("evaluate: feature/truth row counts differ");
  const std::size_t ifba_col = qt.col("ifba");
  for (const auto& row : qt.rows) ev.ifba.push_back(row[ifba_col] > 0.5);
  for (QoiId q : all_qois()) {
    const std::size_t c = qt.col(qoi_name(q));
    std::vector<double>& v = ev.truth[qoi_name(q)];
    for (const auto& row : qt.rows) v.push_back(row[c]);
  }
  return ev;
}

Matrix with_lut_column(const Matrix& base, const std::vector<double>& lut_feat) {
  Matrix x(base.rows(), base.cols() + 1);
  for (std::size_t i = 0; i < base.rows(); ++i) {
    for (std::size_t j = 0; j < base.cols(); ++j) x(i, j) = base(i, j);
    x(i, base.cols()) = lut_feat[i];
  }
  return x;
}

json metric_to_json_obj(const MetricReport& r) { return json::parse(r.to_json()); }

}  // namespace

void stage_evaluate(const RunConfig& cfg) {
  Paths paths(cfg);
  ensure_dir(paths.root / "reports");
  const SimConfig sim = cfg.sim_config();
  const EvalData ev = load_eval_data(cfg, paths);

  // LUT baselines need the rod trajectories
  const CoreDataset holdout = load_core(paths, cfg.holdout_core);
  std::map<std::string, std::vector<double>> lut_pred;
  {
    std::vector<Lut2D> std_luts, ifba_luts;
    for (QoiId q : all_qois()) {
      Lut2D a = load_lut_csv(paths.lut(q, false).string());
      a.qoi = q;
      std_luts.push_back(std::move(a));
      Lut2D b = load_lut_csv(paths.lut(q, true).string());
      b.qoi = q;
      ifba_luts.push_back(std::move(b));
    }
    for (const SyntheticRod& rod : holdout.rods) {
      const PowerHistory h = materialize_history(rod, holdout.schedule);
      const RodSpec spec = default_rod_spec(rod.ifba);
      for (std::size_t k = 0; k < kNumQois; ++k) {
        const Lut2D& lut = rod.ifba ? ifba_luts[k] : std_luts[k];
        lut_pred[qoi_name(static_cast<QoiId>(static_cast<int>(k)))].push_back(
            lut_predict_rod(lut, h, sim, spec));
      }
    }
  }

  json summary;
  summary["holdout_core"] = cfg.holdout_core;
  summary["n_test_rods"] = ev.base_x.rows();
  summary["holdout_pooled_into_design"] = false;
  {
    std::ifstream mf(paths.design_manifest());
    if (mf) summary["design"] = json::parse(mf);
  }

  for (QoiId qoi : all_qois()) {
    const std::string name = qoi_name(qoi);
    const TrainedSurrogate model =
        surrogate_from_json(load_artifact(paths.model(qoi).string(), "model"));
    const bool with_lut = qoi == QoiId::kMaxHoopStress;
    const Matrix x = with_lut ? with_lut_column(ev.base_x, ev.lut_feat) : ev.base_x;
    const std::vector<double> pred = predict(model, x);
    const std::vector<double>& truth = ev.truth.at(name);

    const MetricReport mr = regression_metrics(truth, pred);
    const MetricReport lut_mr = regression_metrics(truth, lut_pred.at(name));

    // probabilities use absolute error curves, engineering QoIs relative
    const bool relative = qoi != QoiId::kSccFailureProbability &&
                          qoi != QoiId::kMpsFailureProbability;
    std::size_t excluded = 0;
    const auto curve = error_cdf_curve(truth, pred, relative, &excluded);
    std::vector<std::vector<double>> curve_rows;
    for (const auto& p : curve) curve_rows.push_back({p.error, p.fraction});
    write_csv(paths.error_cdf(qoi).string(),
              {relative ? "relative_abs_error" : "abs_error", "fraction"}, curve_rows);

    // per-rod residuals, boxplot-ready
    std::vector<std::vector<double>> err_rows;
    for (std::size_t i = 0; i < truth.size(); ++i)
      err_rows.push_back({static_cast<double>(ev.rod_index[i]), truth[i], pred[i],
                          lut_pred.at(name)[i]});
    write_csv(paths.errors(qoi).string(),
              {"rod_index", "truth", "model_prediction", "lut_prediction"}, err_rows);

    json entry;
    entry["model"] = model_kind_name(model.kind);
    entry["cv_r2_mean"] = model.cv_r2_mean;
    entry["cv_r2_std"] = model.cv_r2_std;
    entry["metrics"] = metric_to_json_obj(mr);
    entry["lut_metrics"] = metric_to_json_obj(lut_mr);
    entry["error_cdf_excluded"] = excluded;
    summary["qois"][name] = std::move(entry);
  }

  std::ofstream sf(paths.summary());
  sf << summary.dump(2) << "\n";
}

CombinedSurrogate load_combined_surrogate(const RunConfig& cfg) {
  Paths paths(cfg);
  CombinedSurrogate cs;
  for (QoiId q : all_qois())
    cs.models.emplace(qoi_name(q),
                      surrogate_from_json(load_artifact(paths.model(q).string(), "model")));
  return cs;
}

QoiVector CombinedSurrogate::predict_row(const std::vector<double>& base_features,
                                         double hoop_lut_feature) const {
  QoiVector out;
  for (QoiId q : all_qois()) {
    const TrainedSurrogate& m = models.at(qoi_name(q));
    std::vector<double> row = base_features;
    if (q == QoiId::kMaxHoopStress) row.push_back(hoop_lut_feature);
    Matrix x(1, row.size());
    x.set_row(0, row);
    out.set(q, predict(m, x)[0]);
  }
  return out;
}

void stage_benchmark(const RunConfig& cfg) {
  Paths paths(cfg);
  ensure_dir(paths.root / "reports");
  const SimConfig sim = cfg.sim_config();
  const PciRiskEngine engine = cfg.risk_engine();
  const EvalData ev = load_eval_data(cfg, paths);
  const CombinedSurrogate cs = load_combined_surrogate(cfg);
  const CoreDataset holdout = load_core(paths, cfg.holdout_core);

  const std::size_t n_rods = std::min<std::size_t>(
      {static_cast<std::size_t>(cfg.benchmark_rods), holdout.rods.size(), ev.base_x.rows()});

  // materialize inputs outside the timed passes
  std::vector<PowerHistory> histories;
  std::vector<RodSpec> specs;
  histories.reserve(n_rods);
  for (std::size_t i = 0; i < n_rods; ++i) {
    histories.push_back(materialize_history(holdout.rods[i], holdout.schedule));
    specs.push_back(default_rod_spec(holdout.rods[i].ifba));
  }
  Matrix base(n_rods, ev.base_x.cols());
  std::vector<double> lut_col(n_rods);
  for (std::size_t i = 0; i < n_rods; ++i) {
    base.set_row(i, ev.base_x.row(i));
    lut_col[i] = ev.lut_feat[i];
  }
  const Matrix hoop_x = with_lut_column(base, lut_col);

  volatile double sink = 0.0;  // keep the optimizer honest
  auto surrogate_pass = [&]() {
    double acc = 0.0;
    for (const auto& [name, model] : cs.models) {
      const Matrix& x = name == qoi_name(QoiId::kMaxHoopStress) ? hoop_x : base;
      const std::vector<double> p = predict(model, x);
      for (double v : p) acc += v;
    }
    sink = sink + acc;
  };
  auto simulator_pass = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_rods; ++i) {
      const RodTrace tr = simulate_rod(specs[i], histories[i], sim);
      const QoiVector q = extract_qois(tr, engine);
      for (QoiId id : all_qois()) acc += q.get(id);
    }
    sink = sink + acc;
  };

  const RuntimeReport rep =
      benchmark_runtime(surrogate_pass, simulator_pass, n_rods, cfg.benchmark_repeats);
  std::ofstream rf(paths.runtime());
  rf << rep.to_json() << "\n";
}

PipelineSummary read_summary(const RunConfig& cfg) {
  Paths paths(cfg);
  PipelineSummary out;

  std::ifstream sf(paths.summary());
  if (!sf) throw std::runtime_error("read_summary: no summary at " + paths.summary().string());
  json summary = json::parse(sf);
  if (summary.contains("design") && summary["design"].contains("n_retained"))
    out.design_retained = summary["design"]["n_retained"].get<std::size_t>();

  auto metric_from_json = [](const json& j) {
    MetricReport r;
    // non-finite doubles serialize to null
    r.r2 = j.at("r2").is_null() ? -std::numeric_limits<double>::infinity()
                                : j.at("r2").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.mae = j.at("mae").get<double>();
    if (!j.at("rrmse").is_null()) r.rrmse = j.at("rrmse").get<double>();
    else r.rrmse_valid = false;
    if (!j.at("mape").is_null()) r.mape = j.at("mape").get<double>();
    r.max_error = j.at("max_error").get<double>();
    r.min_error = j.at("min_error").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.relative_excluded = j.at("relative_excluded").get<std::size_t>();
    r.r2_degenerate = j.at("r2_degenerate").get<bool>();
    return r;
  };

  for (QoiId q : all_qois()) {
    const std::string name = qoi_name(q);
    const json& entry = summary.at("qois").at(name);
    out.selected_kind[name] = entry.at("model").get<std::string>();
    out.test_metrics[name] = metric_from_json(entry.at("metrics"));
    out.lut_metrics[name] = metric_from_json(entry.at("lut_metrics"));
  }

  std::ifstream rf(paths.runtime());
  if (rf) {
    json rt = json::parse(rf);
    out.runtime.simulator_ms_per_rod = rt.at("simulator_ms_per_rod").get<double>();
    out.runtime.surrogate_ms_per_rod = rt.at("surrogate_ms_per_rod").get<double>();
    out.runtime.speedup = rt.at("speedup").get<double>();
    out.runtime.repeats = rt.at("repeats").get<int>();
    out.runtime.n_rods = rt.at("n_rods").get<std::size_t>();
  }
  return out;
}

ScreeningResult screen_core(const RunConfig& cfg, const CoreDataset& core) {
  const SimConfig sim = cfg.sim_config();
  const CombinedSurrogate cs = load_combined_surrogate(cfg);
  Paths paths(cfg);
  const Lut2D hoop_std = load_hoop_lut(paths, false);
  const Lut2D hoop_ifba = load_hoop_lut(paths, true);

  ScreeningResult res;
  res.header = {"rod_index", "ifba"};
  for (QoiId q : all_qois()) res.header.push_back(std::string("pred_") + qoi_name(q));
  res.header.push_back("pci_vulnerable");

  for (const SyntheticRod& rod : core.rods) {
    const PowerHistory h = materialize_history(rod, core.schedule);
    const RodSpec spec = default_rod_spec(rod.ifba);
    const FeatureVector fv = extract_features(h, spec, FeatureVariant::kBase, core.schedule);
    const double lut_feat = lut_predict_rod(rod.ifba ? hoop_ifba : hoop_std, h, sim, spec);
    const QoiVector pred = cs.predict_row(fv.values, lut_feat);

    const bool vulnerable = pred.get(QoiId::kSccFailureProbability) > 0.5 ||
                            pred.get(QoiId::kMpsFailureProbability) > 0.5;
    if (vulnerable) ++res.vulnerable;
    std::vector<double> row = {static_cast<double>(rod.index), rod.ifba ? 1.0 : 0.0};
    for (QoiId q : all_qois()) row.push_back(pred.get(q));
    row.push_back(vulnerable ? 1.0 : 0.0);
    res.rows.push_back(std::move(row));
  }
  return res;
}

PipelineSummary run_pipeline(const RunConfig& cfg) {
  stage_generate(cfg);
  stage_simulate(cfg);
  stage_build_luts(cfg);
  stage_extract_features(cfg);
  stage_design(cfg);
  stage_train(cfg);
  stage_evaluate(cfg);
  stage_benchmark(cfg);
  return read_summary(cfg);
}

}  // namespace fuelsurr
