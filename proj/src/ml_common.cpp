#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fuelsurr/ml.hpp"
#include "fuelsurr/rng.hpp"

namespace fuelsurr {

void Dataset::validate() const {
  if (x.rows() == 0) throw std::invalid_argument("Dataset: empty");
  if (y.size() != x.rows()) throw std::invalid_argument("Dataset: y length mismatch");
  if (!schema.empty() && schema.size() != x.cols())
    throw std::invalid_argument("Dataset: schema width mismatch");
  for (double v : x.data())
    if (std::isnan(v)) throw std::invalid_argument("Dataset: NaN feature value");
  for (double v : y)
    if (std::isnan(v)) throw std::invalid_argument("Dataset: NaN target value");
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kPls: return "pls";
    case ModelKind::kGp: return "gp";
    case ModelKind::kNn: return "nn";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kGbt: return "gbt";
  }
  throw std::invalid_argument("model_kind_name: unknown kind");
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "pls") return ModelKind::kPls;
  if (name == "gp") return ModelKind::kGp;
  if (name == "nn") return ModelKind::kNn;
  if (name == "random_forest") return ModelKind::kRandomForest;
  if (name == "gbt") return ModelKind::kGbt;
  throw std::invalid_argument("parse_model_kind: unknown kind '" + name + "'");
}

void Hyperparameters::validate() const {
  if (pls.n_components < 1) throw std::invalid_argument("PlsHyper: n_components must be >= 1");
  if (gp.lengthscale < 0.0 || !(gp.signal_variance > 0.0) || gp.noise_variance < 0.0)
    throw std::invalid_argument("GpHyper: bad kernel settings");
  if (nn.hidden.empty()) throw std::invalid_argument("NnHyper: need >= 1 hidden layer");
  for (int w : nn.hidden)
    if (w < 1) throw std::invalid_argument("NnHyper: widths must be >= 1");
  if (!(nn.learning_rate > 0.0) || nn.epochs < 1 || nn.batch_size < 1)
    throw std::invalid_argument("NnHyper: bad training settings");
  if (rf.n_trees < 1 || rf.max_depth < 0 || rf.features_per_split < 0 || rf.min_samples_leaf < 1)
    throw std::invalid_argument("RfHyper: bad settings");
  if (gbt.n_rounds < 1 || gbt.max_depth < 1 || !(gbt.learning_rate > 0.0) ||
      gbt.min_samples_leaf < 1)
    throw std::invalid_argument("GbtHyper: bad settings");
}

Scaler fit_scaler(const Matrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("fit_scaler: empty matrix");
  const std::size_t n = x.rows(), d = x.cols();
  Scaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 1.0);
  s.passthrough.assign(d, 0);
  for (std::size_t j = 0; j < d; ++j) s.mean[j] = column_mean(x, j);
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x(i, j) - s.mean[j];
      acc += v * v;
    }
    const double sd = std::sqrt(acc / static_cast<double>(n));
    if (sd > 0.0) {
      s.std[j] = sd;
    } else {
      // constant column: leave untouched, flag it
      s.mean[j] = 0.0;
      s.std[j] = 1.0;
      s.passthrough[j] = 1;
    }
  }
  return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& x) {
  if (x.cols() != s.mean.size()) throw std::invalid_argument("apply_scaler: width mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      out(i, j) = (x(i, j) - s.mean[j]) / s.std[j];
  return out;
}

std::vector<double> apply_scaler_row(const Scaler& s, const std::vector<double>& row) {
  if (row.size() != s.mean.size()) throw std::invalid_argument("apply_scaler_row: width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - s.mean[j]) / s.std[j];
  return out;
}

double Tree::predict(const double* row) const {
  int i = 0;
  while (nodes[i].feature >= 0)
    i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

TrainedSurrogate train(const Dataset& ds, const Hyperparameters& hp, std::uint64_t seed) {
  hp.validate();
  TrainedSurrogate m;
  switch (hp.kind) {
    case ModelKind::kPls: m = train_pls(ds, hp.pls); break;
    case ModelKind::kGp: m = train_gp(ds, hp.gp); break;
    case ModelKind::kNn: m = train_nn(ds, hp.nn, seed); break;
    case ModelKind::kRandomForest: m = train_random_forest(ds, hp.rf, seed); break;
    case ModelKind::kGbt: m = train_gbt(ds, hp.gbt, seed); break;
  }
  m.hp = hp;
  m.seed = seed;
  return m;
}

namespace {

void check_schema(const TrainedSurrogate& m, const Matrix& x) {
  std::size_t want = 0;
  if (!m.schema.empty()) want = m.schema.size();
  else if (m.scale_x) want = m.x_scaler.mean.size();
  if (want != 0 && x.cols() != want)
    throw std::invalid_argument("predict: input width does not match the trained schema");
}

}  // namespace

std::vector<double> predict(const TrainedSurrogate& m, const Matrix& x) {
  check_schema(m, x);
  const Matrix* in = &x;
  Matrix scaled;
  if (m.scale_x) {
    scaled = apply_scaler(m.x_scaler, x);
    in = &scaled;
  }

  std::vector<double> out(x.rows(), 0.0);
  if (const auto* pls = std::get_if<PlsParams>(&m.params)) {
    for (std::size_t i = 0; i < in->rows(); ++i) {
      double v = pls->intercept;
      const double* row = in->row_ptr(i);
      for (std::size_t j = 0; j < in->cols(); ++j) v += pls->coef[j] * row[j];
      out[i] = v;
    }
  } else if (std::get_if<GpParams>(&m.params)) {
    out = predict_with_variance(m, x).mean;
    return out;  // already unscaled
  } else if (const auto* nn = std::get_if<NnParams>(&m.params)) {
    out = nn_detail::forward_batch(*nn, *in);
  } else if (const auto* rf = std::get_if<ForestParams>(&m.params)) {
    for (std::size_t i = 0; i < in->rows(); ++i) {
      double s = 0.0;
      for (const Tree& t : rf->trees) s += t.predict(in->row_ptr(i));
      out[i] = s / static_cast<double>(rf->trees.size());
    }
  } else if (const auto* gbt = std::get_if<GbtParams>(&m.params)) {
    for (std::size_t i = 0; i < in->rows(); ++i) {
      double s = gbt->base;
      for (const Tree& t : gbt->trees) s += gbt->learning_rate * t.predict(in->row_ptr(i));
      out[i] = s;
    }
  }

  if (m.scale_y)
    for (double& v : out) v = v * m.y_std + m.y_mean;
  return out;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_indices: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("kfold_indices: k exceeds n");
  Rng rng(seed);
  std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + len);
    pos += len;
  }
  return folds;
}

CvResult cross_validate(const Dataset& ds, const Hyperparameters& hp, int k, std::uint64_t seed) {
  ds.validate();
  const auto folds = kfold_indices(ds.n(), k, seed);
  Rng rng(seed);

  CvResult res;
  for (int f = 0; f < k; ++f) {
    std::vector<std::uint8_t> held(ds.n(), 0);
    for (std::size_t i : folds[f]) held[i] = 1;

    Dataset train_ds;
    train_ds.schema = ds.schema;
    train_ds.qoi_id = ds.qoi_id;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (held[i]) continue;
      rows.push_back(ds.x.row(i));
      train_ds.y.push_back(ds.y[i]);
    }
    train_ds.x = Matrix::from_rows(rows);

    const TrainedSurrogate m = train(train_ds, hp, rng.child(1000 + f).next_u64());

    Matrix xh(folds[f].size(), ds.d());
    std::vector<double> yh(folds[f].size());
    for (std::size_t i = 0; i < folds[f].size(); ++i) {
      xh.set_row(i, ds.x.row(folds[f][i]));
      yh[i] = ds.y[folds[f][i]];
    }
    const std::vector<double> pred = predict(m, xh);

    double mean = 0.0;
    for (double v : yh) mean += v;
    mean /= static_cast<double>(yh.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < yh.size(); ++i) {
      ss_res += (pred[i] - yh[i]) * (pred[i] - yh[i]);
      ss_tot += (yh[i] - mean) * (yh[i] - mean);
    }
    res.fold_r2.push_back(ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0));
    res.fold_rmse.push_back(std::sqrt(ss_res / static_cast<double>(yh.size())));
  }

  for (double v : res.fold_r2) res.r2_mean += v;
  res.r2_mean /= static_cast<double>(k);
  double var = 0.0;
  for (double v : res.fold_r2) var += (v - res.r2_mean) * (v - res.r2_mean);
  res.r2_std = std::sqrt(var / static_cast<double>(k));
  for (double v : res.fold_rmse) res.rmse_mean += v;
  res.rmse_mean /= static_cast<double>(k);
  return res;
}

}  // namespace fuelsurr
