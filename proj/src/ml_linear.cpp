#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fuelsurr/ml.hpp"

namespace fuelsurr {

namespace {

struct TargetScaling {
  bool active = false;
  double mean = 0.0;
  double std = 1.0;
};

// Standardize targets unless degenerate (n < 2 or zero spread); the
// degenerate case keeps raw targets so a zero prior mean stays meaningful.
TargetScaling fit_target_scaling(const std::vector<double>& y) {
  TargetScaling t;
  if (y.size() < 2) return t;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(y.size()));
  if (sd <= 0.0) return t;
  t.active = true;
  t.mean = mean;
  t.std = sd;
  return t;
}

}  // namespace

TrainedSurrogate train_pls(const Dataset& ds, const PlsHyper& hp) {
  ds.validate();
  if (hp.n_components < 1) throw std::invalid_argument("train_pls: n_components must be >= 1");
  const std::size_t n = ds.n(), d = ds.d();

  TrainedSurrogate m;
  m.kind = ModelKind::kPls;
  m.qoi_id = ds.qoi_id;
  m.schema = ds.schema;
  m.scale_x = true;
  m.x_scaler = fit_scaler(ds.x);
  Matrix x = apply_scaler(m.x_scaler, ds.x);

  // center always (the linear predictor needs it), scale only when spreading
  const TargetScaling ts = fit_target_scaling(ds.y);
  double y_mean = 0.0;
  for (double v : ds.y) y_mean += v;
  y_mean /= static_cast<double>(n);
  m.scale_y = true;
  m.y_mean = y_mean;
  m.y_std = ts.active ? ts.std : 1.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (ds.y[i] - m.y_mean) / m.y_std;

  // latent factors by successive power steps on the cross-covariance,
  // deflating x and y after each extracted component
  std::vector<std::vector<double>> w_list, p_list;
  std::vector<double> q_list;
  const double tol = 1e-12;
  double x_norm0 = 0.0;
  for (double v : x.data()) x_norm0 += v * v;
  const double y_norm0 = std::sqrt(dot(y, y));

  for (int comp = 0; comp < hp.n_components; ++comp) {
    // a fully explained (or constant) target ends the extraction early
    if (std::sqrt(dot(y, y)) <= tol * std::max(1.0, y_norm0)) break;

    // asking for more components than the deflated predictors can supply
    double x_norm = 0.0;
    for (double v : x.data()) x_norm += v * v;
    if (x_norm <= 1e-20 * std::max(1.0, x_norm0))
      throw std::invalid_argument("train_pls: n_components exceeds the rank of the data");

    // w = X^T y, normalized (converged direction for a single response)
    std::vector<double> w(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) w[j] += row[j] * y[i];
    }
    double wn = std::sqrt(dot(w, w));
    if (wn < tol * std::max(1.0, y_norm0)) break;  // residual orthogonal to the predictors
    for (double& v : w) v /= wn;

    std::vector<double> t = matvec(x, w);
    const double tt = dot(t, t);
    if (tt < tol)
      throw std::invalid_argument("train_pls: n_components exceeds the rank of the data");

    std::vector<double> p(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) p[j] += row[j] * t[i];
    }
    for (double& v : p) v /= tt;
    const double q = dot(y, t) / tt;

    // deflate
    for (std::size_t i = 0; i < n; ++i) {
      double* row = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) row[j] -= t[i] * p[j];
      y[i] -= q * t[i];
    }

    w_list.push_back(std::move(w));
    p_list.push_back(std::move(p));
    q_list.push_back(q);
  }

  // closed-form predictor: beta = W (P^T W)^{-1} q, solved without inverting
  const int a = static_cast<int>(w_list.size());
  Matrix ptw(a, a);
  for (int r = 0; r < a; ++r)
    for (int c = 0; c < a; ++c) ptw(r, c) = dot(p_list[r], w_list[c]);
  // Gaussian elimination with partial pivoting on the small a x a system
  std::vector<double> rhs = q_list;
  {
    Matrix g = ptw;
    std::vector<int> piv(a);
    for (int c = 0; c < a; ++c) piv[c] = c;
    for (int c = 0; c < a; ++c) {
      int best = c;
      for (int r = c + 1; r < a; ++r)
        if (std::abs(g(r, c)) > std::abs(g(best, c))) best = r;
      if (std::abs(g(best, c)) < tol)
        throw std::invalid_argument("train_pls: singular latent system");
      if (best != c) {
        for (int j = 0; j < a; ++j) std::swap(g(c, j), g(best, j));
        std::swap(rhs[c], rhs[best]);
      }
      for (int r = c + 1; r < a; ++r) {
        const double f = g(r, c) / g(c, c);
        for (int j = c; j < a; ++j) g(r, j) -= f * g(c, j);
        rhs[r] -= f * rhs[c];
      }
    }
    for (int c = a - 1; c >= 0; --c) {
      for (int j = c + 1; j < a; ++j) rhs[c] -= g(c, j) * rhs[j];
      rhs[c] /= g(c, c);
    }
  }

  PlsParams params;
  params.components_used = a;
  params.coef.assign(d, 0.0);
  for (int c = 0; c < a; ++c)
    for (std::size_t j = 0; j < d; ++j) params.coef[j] += w_list[c][j] * rhs[c];
  params.intercept = 0.0;  // x is centered by the scaler, y by the target scaling
  m.params = std::move(params);
  return m;
}

namespace {

double rbf(const double* a, const double* b, std::size_t d, double inv_two_l2) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return std::exp(-s * inv_two_l2);
}

double median_pairwise_distance(const Matrix& x) {
  const std::size_t n = x.rows();
  if (n < 2) return 1.0;
  // cap the pair count with a deterministic stride
  std::size_t stride = 1;
  while ((n / stride) * (n / stride) > 500000) ++stride;
  std::vector<double> dists;
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = i + stride; j < n; j += stride) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      dists.push_back(std::sqrt(s));
    }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

}  // namespace

TrainedSurrogate train_gp(const Dataset& ds, const GpHyper& hp) {
  ds.validate();
  const std::size_t n = ds.n(), d = ds.d();
  if (n > 20000) throw std::invalid_argument("train_gp: n exceeds the dense-solver guard (20000)");

  TrainedSurrogate m;
  m.kind = ModelKind::kGp;
  m.qoi_id = ds.qoi_id;
  m.schema = ds.schema;
  m.scale_x = true;
  m.x_scaler = fit_scaler(ds.x);

  GpParams p;
  p.x_train = apply_scaler(m.x_scaler, ds.x);
  p.signal_variance = hp.signal_variance;
  p.noise_variance = hp.noise_variance;
  p.lengthscale = hp.lengthscale > 0.0 ? hp.lengthscale : median_pairwise_distance(p.x_train);

  const TargetScaling ts = fit_target_scaling(ds.y);
  m.scale_y = ts.active;
  m.y_mean = ts.active ? ts.mean : 0.0;
  m.y_std = ts.active ? ts.std : 1.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ts.active ? (ds.y[i] - ts.mean) / ts.std : ds.y[i];

  const double inv_two_l2 = 1.0 / (2.0 * p.lengthscale * p.lengthscale);
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v =
          p.signal_variance * rbf(p.x_train.row_ptr(i), p.x_train.row_ptr(j), d, inv_two_l2);
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += p.noise_variance;
  }

  // jitter escalation relative to the signal variance
  double jitter = 1e-10 * p.signal_variance;
  const double jitter_max = 1e-4 * p.signal_variance;
  bool done = false;
  while (true) {
    Matrix l = k;
    for (std::size_t i = 0; i < n; ++i) l(i, i) += jitter;
    if (cholesky_lower(l)) {
      p.chol_lower = std::move(l);
      p.jitter_used = jitter;
      done = true;
      break;
    }
    if (jitter >= jitter_max) break;
    jitter = std::min(jitter * 10.0, jitter_max);
  }
  if (!done)
    throw std::runtime_error("train_gp: kernel matrix not positive definite after jitter escalation");

  p.alpha = y;
  forward_substitute(p.chol_lower, p.alpha);
  backward_substitute(p.chol_lower, p.alpha);
  m.params = std::move(p);
  return m;
}

GpPrediction predict_with_variance(const TrainedSurrogate& m, const Matrix& x) {
  const auto* p = std::get_if<GpParams>(&m.params);
  if (p == nullptr) throw std::invalid_argument("predict_with_variance: not a GP model");
  if (!m.schema.empty() && x.cols() != m.schema.size())
    throw std::invalid_argument("predict: input width does not match the trained schema");
  const Matrix q = apply_scaler(m.x_scaler, x);

  const std::size_t n = p->x_train.rows(), d = p->x_train.cols();
  const double inv_two_l2 = 1.0 / (2.0 * p->lengthscale * p->lengthscale);
  GpPrediction out;
  out.mean.resize(q.rows());
  out.variance.resize(q.rows());
  std::vector<double> ks(n);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t t = 0; t < n; ++t)
      ks[t] = p->signal_variance * rbf(q.row_ptr(i), p->x_train.row_ptr(t), d, inv_two_l2);
    double mean = dot(ks, p->alpha);
    forward_substitute(p->chol_lower, ks);
    double var = p->signal_variance - dot(ks, ks);
    var = std::max(0.0, var);
    if (m.scale_y) {
      mean = mean * m.y_std + m.y_mean;
      var *= m.y_std * m.y_std;
    }
    out.mean[i] = mean;
    out.variance[i] = var;
  }
  return out;
}

}  // namespace fuelsurr
