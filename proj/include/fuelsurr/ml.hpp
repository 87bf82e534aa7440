#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fuelsurr/linalg.hpp"

namespace fuelsurr {

struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> schema;
  std::string qoi_id;

  std::size_t n() const { return x.rows(); }
  std::size_t d() const { return x.cols(); }
  void validate() const;  // sizes, schema width, no NaN
};

enum class ModelKind { kPls, kGp, kNn, kRandomForest, kGbt };
const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& name);

// ---- hyperparameters ----------------------------------------------------

struct PlsHyper {
  int n_components = 4;
};

struct GpHyper {
  double lengthscale = 0.0;   // 0 -> median pairwise-distance heuristic
  double signal_variance = 1.0;
  double noise_variance = 1e-6;  // on standardized targets
};

struct NnHyper {
  std::vector<int> hidden = {32, 32};
  double learning_rate = 1e-2;
  int epochs = 300;
  int batch_size = 32;
};

struct RfHyper {
  int n_trees = 100;
  int max_depth = 0;       // 0 = unlimited
  int features_per_split = 0;  // 0 = all
  int min_samples_leaf = 1;
  bool bootstrap = true;
};

struct GbtHyper {
  int n_rounds = 300;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 2;
};

struct Hyperparameters {
  ModelKind kind = ModelKind::kGbt;
  PlsHyper pls;
  GpHyper gp;
  NnHyper nn;
  RfHyper rf;
  GbtHyper gbt;

  void validate() const;
};

// ---- learned parameters ---------------------------------------------------

struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::uint8_t> passthrough;  // zero-variance columns left unscaled
};

Scaler fit_scaler(const Matrix& x);
Matrix apply_scaler(const Scaler& s, const Matrix& x);
std::vector<double> apply_scaler_row(const Scaler& s, const std::vector<double>& row);

struct PlsParams {
  std::vector<double> coef;  // on scaled inputs
  double intercept = 0.0;
  int components_used = 0;
};

struct GpParams {
  Matrix x_train;  // scaled
  Matrix chol_lower;
  std::vector<double> alpha;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.0;
  double jitter_used = 0.0;
};

struct NnParams {
  std::vector<int> layout;           // input, hidden..., 1
  std::vector<Matrix> weights;       // out x in per layer
  std::vector<std::vector<double>> biases;
  std::vector<double> loss_history;  // mean batch MSE per epoch
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const double* row) const;
};

struct ForestParams {
  std::vector<Tree> trees;
};

struct GbtParams {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> train_mse;  // after each round
};

struct TrainedSurrogate {
  ModelKind kind = ModelKind::kGbt;
  std::string qoi_id;
  std::vector<std::string> schema;
  bool scale_x = false;
  Scaler x_scaler;
  bool scale_y = false;
  double y_mean = 0.0;
  double y_std = 1.0;
  Hyperparameters hp;
  std::uint64_t seed = 0;
  std::variant<PlsParams, GpParams, NnParams, ForestParams, GbtParams> params;
  double cv_r2_mean = 0.0;
  double cv_r2_std = 0.0;
};

// ---- training -------------------------------------------------------------

TrainedSurrogate train_pls(const Dataset& ds, const PlsHyper& hp);
TrainedSurrogate train_gp(const Dataset& ds, const GpHyper& hp);
TrainedSurrogate train_nn(const Dataset& ds, const NnHyper& hp, std::uint64_t seed);
TrainedSurrogate train_random_forest(const Dataset& ds, const RfHyper& hp, std::uint64_t seed);
TrainedSurrogate train_gbt(const Dataset& ds, const GbtHyper& hp, std::uint64_t seed);
TrainedSurrogate train(const Dataset& ds, const Hyperparameters& hp, std::uint64_t seed);

std::vector<double> predict(const TrainedSurrogate& m, const Matrix& x);

struct GpPrediction {
  std::vector<double> mean;
  std::vector<double> variance;
};
GpPrediction predict_with_variance(const TrainedSurrogate& m, const Matrix& x);

// ---- cross-validation -------------------------------------------------------

struct CvResult {
  std::vector<double> fold_r2;
  std::vector<double> fold_rmse;
  double r2_mean = 0.0;
  double r2_std = 0.0;
  double rmse_mean = 0.0;
};

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);
CvResult cross_validate(const Dataset& ds, const Hyperparameters& hp, int k, std::uint64_t seed);

// ---- persistence ------------------------------------------------------------

std::string surrogate_to_json(const TrainedSurrogate& m);
TrainedSurrogate surrogate_from_json(const std::string& text);

// ---- internals exposed for gradient verification ----------------------------

namespace nn_detail {

// flat parameter order: per layer weights row-major, then biases
std::size_t parameter_count(const NnParams& p);
std::vector<double> get_parameters(const NnParams& p);
void set_parameters(NnParams& p, const std::vector<double>& flat);

double forward_one(const NnParams& p, const double* row);
std::vector<double> forward_batch(const NnParams& p, const Matrix& x);
// mean squared error over the batch and its gradient in flat parameter order
double loss_and_gradient(const NnParams& p, const Matrix& x, const std::vector<double>& y,
                         std::vector<double>* grad);

NnParams init_network(int input_dim, const std::vector<int>& hidden, std::uint64_t seed);

}  // namespace nn_detail

}  // namespace fuelsurr
