#include <cmath>
#include <stdexcept>

#include "fuelsurr/ml.hpp"
#include "fuelsurr/rng.hpp"

namespace fuelsurr {
namespace nn_detail {

NnParams init_network(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (input_dim < 1) throw std::invalid_argument("init_network: input_dim must be >= 1");
  NnParams p;
  p.layout.push_back(input_dim);
  for (int w : hidden) p.layout.push_back(w);
  p.layout.push_back(1);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < p.layout.size(); ++l) {
    const int fan_in = p.layout[l];
    const int fan_out = p.layout[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  return p;
}

std::size_t parameter_count(const NnParams& p) {
  std::size_t c = 0;
  for (std::size_t l = 0; l < p.weights.size(); ++l)
    c += p.weights[l].data().size() + p.biases[l].size();
  return c;
}

std::vector<double> get_parameters(const NnParams& p) {
  std::vector<double> flat;
  flat.reserve(parameter_count(p));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto& w = p.weights[l].data();
    flat.insert(flat.end(), w.begin(), w.end());
    flat.insert(flat.end(), p.biases[l].begin(), p.biases[l].end());
  }
  return flat;
}

void set_parameters(NnParams& p, const std::vector<double>& flat) {
  if (flat.size() != parameter_count(p))
    throw std::invalid_argument("set_parameters: size mismatch");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l].data();
    std::copy(flat.begin() + pos, flat.begin() + pos + w.size(), w.begin());
    pos += w.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + p.biases[l].size(), p.biases[l].begin());
    pos += p.biases[l].size();
  }
}

namespace {

// activations per layer for one sample; returns the scalar output
double forward_store(const NnParams& p, const double* row,
                     std::vector<std::vector<double>>& acts) {
  const std::size_t layers = p.weights.size();
  acts.resize(layers + 1);
  acts[0].assign(row, row + p.layout[0]);
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = p.weights[l];
    std::vector<double>& out = acts[l + 1];
    out.assign(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double* wr = w.row_ptr(r);
      double s = p.biases[l][r];
      for (std::size_t c = 0; c < w.cols(); ++c) s += wr[c] * acts[l][c];
      out[r] = l + 1 < layers ? std::tanh(s) : s;  // linear output layer
    }
  }
  return acts[layers][0];
}

}  // namespace

double forward_one(const NnParams& p, const double* row) {
  std::vector<std::vector<double>> acts;
  return forward_store(p, row, acts);
}

std::vector<double> forward_batch(const NnParams& p, const Matrix& x) {
  const std::size_t layers = p.weights.size();
  std::vector<double> cur, next;
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    cur.assign(x.row_ptr(i), x.row_ptr(i) + x.cols());
    for (std::size_t l = 0; l < layers; ++l) {
      const Matrix& w = p.weights[l];
      next.resize(w.rows());
      for (std::size_t r = 0; r < w.rows(); ++r) {
        const double* wr = w.row_ptr(r);
        double s = p.biases[l][r];
        for (std::size_t c = 0; c < w.cols(); ++c) s += wr[c] * cur[c];
        next[r] = l + 1 < layers ? std::tanh(s) : s;
      }
      cur.swap(next);
    }
    out[i] = cur[0];
  }
  return out;
}

double loss_and_gradient(const NnParams& p, const Matrix& x, const std::vector<double>& y,
                         std::vector<double>* grad) {
  const std::size_t n = x.rows();
  if (n == 0 || y.size() != n) throw std::invalid_argument("loss_and_gradient: bad batch");
  const std::size_t layers = p.weights.size();

  std::vector<Matrix> gw(layers);
  std::vector<std::vector<double>> gb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    gw[l] = Matrix(p.weights[l].rows(), p.weights[l].cols(), 0.0);
    gb[l].assign(p.biases[l].size(), 0.0);
  }

  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, delta_prev;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = forward_store(p, x.row_ptr(i), acts);
    const double err = pred - y[i];
    loss += err * err;

    // backpropagate d(err^2/n)/d(pred)
    delta.assign(1, 2.0 * err / static_cast<double>(n));
    for (std::size_t l = layers; l-- > 0;) {
      const Matrix& w = p.weights[l];
      for (std::size_t r = 0; r < w.rows(); ++r) {
        gb[l][r] += delta[r];
        double* gr = gw[l].row_ptr(r);
        for (std::size_t c = 0; c < w.cols(); ++c) gr[c] += delta[r] * acts[l][c];
      }
      if (l == 0) break;
      delta_prev.assign(w.cols(), 0.0);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        const double* wr = w.row_ptr(r);
        for (std::size_t c = 0; c < w.cols(); ++c) delta_prev[c] += wr[c] * delta[r];
      }
      // tanh'(z) = 1 - a^2 with a the stored activation
      for (std::size_t c = 0; c < w.cols(); ++c)
        delta_prev[c] *= 1.0 - acts[l][c] * acts[l][c];
      delta.swap(delta_prev);
    }
  }
  loss /= static_cast<double>(n);

  if (grad != nullptr) {
    grad->clear();
    grad->reserve(parameter_count(p));
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& w = gw[l].data();
      grad->insert(grad->end(), w.begin(), w.end());
      grad->insert(grad->end(), gb[l].begin(), gb[l].end());
    }
  }
  return loss;
}

}  // namespace nn_detail

TrainedSurrogate train_nn(const Dataset& ds, const NnHyper& hp, std::uint64_t seed) {
  ds.validate();
  if (hp.hidden.empty()) throw std::invalid_argument("train_nn: need >= 1 hidden layer");
  if (hp.epochs < 1 || hp.batch_size < 1 || !(hp.learning_rate > 0.0))
    throw std::invalid_argument("train_nn: bad training settings");

  const std::size_t n = ds.n();
  TrainedSurrogate m;
  m.kind = ModelKind::kNn;
  m.qoi_id = ds.qoi_id;
  m.schema = ds.schema;
  m.scale_x = true;
  m.x_scaler = fit_scaler(ds.x);
  const Matrix x = apply_scaler(m.x_scaler, ds.x);

  double y_mean = 0.0;
  for (double v : ds.y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double y_var = 0.0;
  for (double v : ds.y) y_var += (v - y_mean) * (v - y_mean);
  double y_std = std::sqrt(y_var / static_cast<double>(n));
  if (y_std <= 0.0) y_std = 1.0;
  m.scale_y = true;
  m.y_mean = y_mean;
  m.y_std = y_std;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (ds.y[i] - y_mean) / y_std;

  Rng rng(seed);
  NnParams p = nn_detail::init_network(static_cast<int>(ds.d()), hp.hidden,
                                       rng.child(1).next_u64());

  // Adam state over the flat parameter vector
  std::vector<double> theta = nn_detail::get_parameters(p);
  std::vector<double> mom(theta.size(), 0.0), vel(theta.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double beta1_t = 1.0, beta2_t = 1.0;

  Rng shuffle_rng = rng.child(2);
  const std::size_t batch = std::min<std::size_t>(hp.batch_size, n);
  std::vector<double> grad;
  Matrix bx(batch, ds.d());
  std::vector<double> by(batch);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffle_rng.permutation(n);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Matrix* bxp = &bx;
      Matrix small;
      if (len != batch) {
        small = Matrix(len, ds.d());
        bxp = &small;
      }
      for (std::size_t i = 0; i < len; ++i) {
        bxp->set_row(i, x.row(order[start + i]));
        by[i] = y[order[start + i]];
      }
      std::vector<double> by_cut(by.begin(), by.begin() + len);

      const double loss = nn_detail::loss_and_gradient(p, *bxp, by_cut, &grad);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_nn: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss;
      ++batches;

      beta1_t *= beta1;
      beta2_t *= beta2;
      for (std::size_t t = 0; t < theta.size(); ++t) {
        mom[t] = beta1 * mom[t] + (1.0 - beta1) * grad[t];
        vel[t] = beta2 * vel[t] + (1.0 - beta2) * grad[t] * grad[t];
        const double mhat = mom[t] / (1.0 - beta1_t);
        const double vhat = vel[t] / (1.0 - beta2_t);
        theta[t] -= hp.learning_rate * mhat / (std::sqrt(vhat) + eps);
      }
      nn_detail::set_parameters(p, theta);
    }
    p.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }

  m.params = std::move(p);
  return m;
}

}  // namespace fuelsurr
