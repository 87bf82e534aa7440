#include <stdexcept>

#include "fuelsurr/ml.hpp"
#include "json.hpp"

namespace fuelsurr {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.data();
  return j;
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols())
    throw std::runtime_error("model json: matrix payload size mismatch");
  m.data() = std::move(data);
  return m;
}

json trees_to_json(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const Tree& t : trees) {
    json jt;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const TreeNode& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    jt["feature"] = feature;
    jt["threshold"] = threshold;
    jt["left"] = left;
    jt["right"] = right;
    jt["value"] = value;
    arr.push_back(std::move(jt));
  }
  return arr;
}

std::vector<Tree> trees_from_json(const json& arr) {
  std::vector<Tree> trees;
  for (const json& jt : arr) {
    Tree t;
    const auto feature = jt.at("feature").get<std::vector<int>>();
    const auto threshold = jt.at("threshold").get<std::vector<double>>();
    const auto left = jt.at("left").get<std::vector<int>>();
    const auto right = jt.at("right").get<std::vector<int>>();
    const auto value = jt.at("value").get<std::vector<double>>();
    for (std::size_t i = 0; i < feature.size(); ++i)
      t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
    trees.push_back(std::move(t));
  }
  return trees;
}

json hyper_to_json(const Hyperparameters& hp) {
  json j;
  j["kind"] = model_kind_name(hp.kind);
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

Hyperparameters hyper_from_json(const json& j) {
  Hyperparameters hp;
  hp.kind = parse_model_kind(j.at("kind").get<std::string>());
  const json& p = j.at("pls");
  hp.pls.n_components = p.at("n_components").get<int>();
  const json& g = j.at("gp");
  hp.gp.lengthscale = g.at("lengthscale").get<double>();
  hp.gp.signal_variance = g.at("signal_variance").get<double>();
  hp.gp.noise_variance = g.at("noise_variance").get<double>();
  const json& n = j.at("nn");
  hp.nn.hidden = n.at("hidden").get<std::vector<int>>();
  hp.nn.learning_rate = n.at("learning_rate").get<double>();
  hp.nn.epochs = n.at("epochs").get<int>();
  hp.nn.batch_size = n.at("batch_size").get<int>();
  const json& r = j.at("rf");
  hp.rf.n_trees = r.at("n_trees").get<int>();
  hp.rf.max_depth = r.at("max_depth").get<int>();
  hp.rf.features_per_split = r.at("features_per_split").get<int>();
  hp.rf.min_samples_leaf = r.at("min_samples_leaf").get<int>();
  hp.rf.bootstrap = r.at("bootstrap").get<bool>();
  const json& b = j.at("gbt");
  hp.gbt.n_rounds = b.at("n_rounds").get<int>();
  hp.gbt.max_depth = b.at("max_depth").get<int>();
  hp.gbt.learning_rate = b.at("learning_rate").get<double>();
  hp.gbt.min_samples_leaf = b.at("min_samples_leaf").get<int>();
  return hp;
}

}  // namespace

std::string surrogate_to_json(const TrainedSurrogate& m) {
  json j;
  j["format"] = "fuelsurr-model";
  j["version"] = 1;
  j["kind"] = model_kind_name(m.kind);
  j["qoi_id"] = m.qoi_id;
  j["schema"] = m.schema;
  j["scale_x"] = m.scale_x;
  j["scaler"] = {{"mean", m.x_scaler.mean},
                 {"std", m.x_scaler.std},
                 {"passthrough", m.x_scaler.passthrough}};
  j["scale_y"] = m.scale_y;
  j["y_mean"] = m.y_mean;
  j["y_std"] = m.y_std;
  j["hyperparameters"] = hyper_to_json(m.hp);
  j["seed"] = m.seed;
  j["cv_r2_mean"] = m.cv_r2_mean;
  j["cv_r2_std"] = m.cv_r2_std;

  json p;
  if (const auto* pls = std::get_if<PlsParams>(&m.params)) {
    p["coef"] = pls->coef;
    p["intercept"] = pls->intercept;
    p["components_used"] = pls->components_used;
  } else if (const auto* gp = std::get_if<GpParams>(&m.params)) {
    p["x_train"] = matrix_to_json(gp->x_train);
    p["chol_lower"] = matrix_to_json(gp->chol_lower);
    p["alpha"] = gp->alpha;
    p["lengthscale"] = gp->lengthscale;
    p["signal_variance"] = gp->signal_variance;
    p["noise_variance"] = gp->noise_variance;
    p["jitter_used"] = gp->jitter_used;
  } else if (const auto* nn = std::get_if<NnParams>(&m.params)) {
    p["layout"] = nn->layout;
    json w = json::array();
    for (const Matrix& wm : nn->weights) w.push_back(matrix_to_json(wm));
    p["weights"] = std::move(w);
    p["biases"] = nn->biases;
    p["loss_history"] = nn->loss_history;
  } else if (const auto* rf = std::get_if<ForestParams>(&m.params)) {
    p["trees"] = trees_to_json(rf->trees);
  } else if (const auto* gbt = std::get_if<GbtParams>(&m.params)) {
    p["base"] = gbt->base;
    p["learning_rate"] = gbt->learning_rate;
    p["trees"] = trees_to_json(gbt->trees);
    p["train_mse"] = gbt->train_mse;
  }
  j["params"] = std::move(p);
  return j.dump();
}

TrainedSurrogate surrogate_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format").get<std::string>() != "fuelsurr-model")
    throw std::runtime_error("model json: unexpected format tag");
  const int version = j.at("version").get<int>();
  if (version != 1)
    throw std::runtime_error("model json: version " + std::to_string(version) +
                             " unsupported (expected 1)");

  TrainedSurrogate m;
  m.kind = parse_model_kind(j.at("kind").get<std::string>());
  m.qoi_id = j.at("qoi_id").get<std::string>();
  m.schema = j.at("schema").get<std::vector<std::string>>();
  m.scale_x = j.at("scale_x").get<bool>();
  m.x_scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  m.x_scaler.std = j.at("scaler").at("std").get<std::vector<double>>();
  m.x_scaler.passthrough = j.at("scaler").at("passthrough").get<std::vector<std::uint8_t>>();
  m.scale_y = j.at("scale_y").get<bool>();
  m.y_mean = j.at("y_mean").get<double>();
  m.y_std = j.at("y_std").get<double>();
  m.hp = hyper_from_json(j.at("hyperparameters"));
  m.seed = j.at("seed").get<std::uint64_t>();
  m.cv_r2_mean = j.at("cv_r2_mean").get<double>();
  m.cv_r2_std = j.at("cv_r2_std").get<double>();

  const json& p = j.at("params");
  switch (m.kind) {
    case ModelKind::kPls: {
      PlsParams pls;
      pls.coef = p.at("coef").get<std::vector<double>>();
      pls.intercept = p.at("intercept").get<double>();
      pls.components_used = p.at("components_used").get<int>();
      m.params = std::move(pls);
      break;
    }
    case ModelKind::kGp: {
      GpParams gp;
      gp.x_train = matrix_from_json(p.at("x_train"));
      gp.chol_lower = matrix_from_json(p.at("chol_lower"));
      gp.alpha = p.at("alpha").get<std::vector<double>>();
      gp.lengthscale = p.at("lengthscale").get<double>();
      gp.signal_variance = p.at("signal_variance").get<double>();
      gp.noise_variance = p.at("noise_variance").get<double>();
      gp.jitter_used = p.at("jitter_used").get<double>();
      m.params = std::move(gp);
      break;
    }
    case ModelKind::kNn: {
      NnParams nn;
      nn.layout = p.at("layout").get<std::vector<int>>();
      for (const json& wj : p.at("weights")) nn.weights.push_back(matrix_from_json(wj));
      nn.biases = p.at("biases").get<std::vector<std::vector<double>>>();
      nn.loss_history = p.at("loss_history").get<std::vector<double>>();
      m.params = std::move(nn);
      break;
    }
    case ModelKind::kRandomForest: {
      ForestParams rf;
      rf.trees = trees_from_json(p.at("trees"));
      m.params = std::move(rf);
      break;
    }
    case ModelKind::kGbt: {
      GbtParams gbt;
      gbt.base = p.at("base").get<double>();
      gbt.learning_rate = p.at("learning_rate").get<double>();
      gbt.trees = trees_from_json(p.at("trees"));
      gbt.train_mse = p.at("train_mse").get<std::vector<double>>();
      m.params = std::move(gbt);
      break;
    }
  }
  return m;
}

}  // namespace fuelsurr
