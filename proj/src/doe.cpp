#include "fuelsurr/doe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fuelsurr/rng.hpp"
#include "json.hpp"

namespace fuelsurr {

void DesignConfig::validate() const {
  if (n_clusters < 1) throw std::invalid_argument("DesignConfig: need >= 1 cluster");
  if (samples_per_cluster < 1) throw std::invalid_argument("DesignConfig: need >= 1 sample per cluster");
  if (maximin_trials < 1) throw std::invalid_argument("DesignConfig: need >= 1 trial");
  if (kmeans_restarts < 1) throw std::invalid_argument("DesignConfig: need >= 1 restart");
  if (!(lhgr_cap_kw_m > 0.0) || !(pf_cap > 0.0))
    throw std::invalid_argument("DesignConfig: bounds must be positive");
}

namespace {

double sq_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

ClusterResult kmeans_once(const Matrix& x, int k, Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  ClusterResult res;
  res.centroids = Matrix(k, d);

  // spread initialization: first centre uniform, then proportional to the
  // squared distance to the nearest chosen centre
  std::vector<double> dist2(n, std::numeric_limits<double>::max());
  std::size_t first = rng.index(n);
  res.centroids.set_row(0, x.row(first));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], sq_distance(x.row_ptr(i), res.centroids.row_ptr(c - 1), d));
      total += dist2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.u01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);
    }
    res.centroids.set_row(c, x.row(pick));
  }

  res.assignment.assign(n, -1);
  std::vector<double> sums(static_cast<std::size_t>(k) * d);
  std::vector<std::size_t> counts(k);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_distance(x.row_ptr(i), res.centroids.row_ptr(0), d);
      for (int c = 1; c < k; ++c) {
        const double dd = sq_distance(x.row_ptr(i), res.centroids.row_ptr(c), d);
        if (dd < best_d) {  // ties keep the lowest index
          best_d = dd;
          best = c;
        }
      }
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = res.assignment[i];
      counts[c]++;
      const double* r = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) sums[static_cast<std::size_t>(c) * d + j] += r[j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed an empty cluster at the point farthest from its centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dd =
              sq_distance(x.row_ptr(i), res.centroids.row_ptr(res.assignment[i]), d);
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        res.centroids.set_row(c, x.row(far));
        continue;
      }
      for (std::size_t j = 0; j < d; ++j)
        res.centroids(c, j) = sums[static_cast<std::size_t>(c) * d + j] / counts[c];
    }
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res.inertia += sq_distance(x.row_ptr(i), res.centroids.row_ptr(res.assignment[i]), d);
  return res;
}

}  // namespace

ClusterResult cluster_features(const Matrix& x, int k, std::uint64_t seed, int restarts) {
  if (k < 1) throw std::invalid_argument("cluster_features: k must be >= 1");
  if (x.rows() < static_cast<std::size_t>(k))
    throw std::invalid_argument("cluster_features: fewer samples than clusters");
  Rng rng(seed);
  ClusterResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    Rng run = rng.child(static_cast<std::uint64_t>(r));
    ClusterResult cand = kmeans_once(x, k, run);
    if (!have || cand.inertia < best.inertia) {
      best = std::move(cand);
      have = true;
    }
  }
  return best;
}

EmpiricalMarginal::EmpiricalMarginal(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw std::invalid_argument("EmpiricalMarginal: no samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMarginal::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  const std::size_t m = sorted_.size();
  // order statistic i sits at probability (i + 0.5) / m
  const double pos = q * static_cast<double>(m) - 0.5;
  if (pos <= 0.0) return sorted_.front();
  if (pos >= static_cast<double>(m - 1)) return sorted_.back();
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(lo);
  return sorted_[lo] + w * (sorted_[lo + 1] - sorted_[lo]);
}

std::vector<EmpiricalMarginal> fit_marginals(const Matrix& x, const std::vector<std::size_t>& rows) {
  if (x.rows() == 0) throw std::invalid_argument("fit_marginals: empty sample");
  std::vector<EmpiricalMarginal> out;
  out.reserve(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::vector<double> col;
    if (rows.empty()) {
      col.resize(x.rows());
      for (std::size_t i = 0; i < x.rows(); ++i) col[i] = x(i, j);
    } else {
      col.reserve(rows.size());
      for (std::size_t i : rows) col.push_back(x(i, j));
    }
    out.emplace_back(std::move(col));
  }
  return out;
}

LhsResult maximin_lhs(const std::vector<EmpiricalMarginal>& marginals, int n, int trials,
                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("maximin_lhs: need n >= 1");
  if (trials < 1) throw std::invalid_argument("maximin_lhs: need >= 1 trial");
  if (marginals.empty()) throw std::invalid_argument("maximin_lhs: no marginals");
  const std::size_t d = marginals.size();
  Rng rng(seed);

  LhsResult best;
  double best_score = -1.0;
  for (int t = 0; t < trials; ++t) {
    Rng trial_rng = rng.child(static_cast<std::uint64_t>(t));
    Matrix unit(n, d);
    for (std::size_t j = 0; j < d; ++j) {
      const std::vector<std::size_t> strata = trial_rng.permutation(n);
      for (int i = 0; i < n; ++i)
        unit(i, j) = (static_cast<double>(strata[i]) + trial_rng.u01()) / n;
    }
    double min_d2 = std::numeric_limits<double>::max();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        min_d2 = std::min(min_d2, sq_distance(unit.row_ptr(a), unit.row_ptr(b), d));
    const double score = n > 1 ? std::sqrt(min_d2) : std::numeric_limits<double>::max();
    if (score > best_score) {
      best_score = score;
      best.unit = std::move(unit);
    }
  }

  best.min_pairwise_distance = n > 1 ? best_score : 0.0;
  best.values = Matrix(n, d);
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      best.values(i, j) = marginals[j].quantile(best.unit(i, j));
  return best;
}

std::vector<bool> filter_physical(const Matrix& samples, int n_cycles,
                                  const ScheduleTemplate& tmpl, double lhgr_cap, double pf_cap) {
  std::vector<bool> keep(samples.rows(), false);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    FeatureVector fv = feature_from_row(samples.row(i), n_cycles, false);
    const ReconstructionResult rec = reconstruct_history(fv, tmpl, lhgr_cap, pf_cap);
    keep[i] = rec.physical();
  }
  return keep;
}

TrainingDesign design(const std::vector<Matrix>& core_features, int n_cycles,
                      const ScheduleTemplate& tmpl, const DesignConfig& cfg) {
  cfg.validate();
  if (core_features.empty()) throw std::invalid_argument("design: need >= 1 core dataset");

  // pool rows across cores
  std::size_t total = 0;
  const std::size_t d = core_features.front().cols();
  for (const Matrix& m : core_features) {
    if (m.cols() != d) throw std::invalid_argument("design: feature width differs across cores");
    total += m.rows();
  }
  Matrix pooled(total, d);
  std::size_t r = 0;
  for (const Matrix& m : core_features)
    for (std::size_t i = 0; i < m.rows(); ++i) pooled.set_row(r++, m.row(i));

  // standardize for clustering only; marginals and reconstruction stay raw
  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) mu[j] = column_mean(pooled, j);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      const double v = pooled(i, j) - mu[j];
      s += v * v;
    }
    sd[j] = std::sqrt(s / static_cast<double>(total));
    if (sd[j] <= 0.0) sd[j] = 1.0;
  }
  Matrix z(total, d);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < d; ++j) z(i, j) = (pooled(i, j) - mu[j]) / sd[j];

  Rng rng(cfg.seed);
  const ClusterResult clusters =
      cluster_features(z, cfg.n_clusters, rng.child(1).next_u64(), cfg.kmeans_restarts);

  // per-cluster marginals and LHS draws
  Matrix candidates(static_cast<std::size_t>(cfg.n_clusters) * cfg.samples_per_cluster, d);
  std::vector<int> cand_cluster(candidates.rows());
  std::size_t out_row = 0;
  for (int c = 0; c < cfg.n_clusters; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < total; ++i)
      if (clusters.assignment[i] == c) rows.push_back(i);
    if (rows.empty())
      throw std::runtime_error("design: cluster " + std::to_string(c) + " is empty");
    const auto marginals = fit_marginals(pooled, rows);
    const LhsResult lhs = maximin_lhs(marginals, cfg.samples_per_cluster, cfg.maximin_trials,
                                      rng.child(100 + static_cast<std::uint64_t>(c)).next_u64());
    for (int i = 0; i < cfg.samples_per_cluster; ++i) {
      candidates.set_row(out_row, lhs.values.row(i));
      cand_cluster[out_row] = c;
      ++out_row;
    }
  }

  const std::vector<bool> keep =
      filter_physical(candidates, n_cycles, tmpl, cfg.lhgr_cap_kw_m, cfg.pf_cap);

  TrainingDesign out;
  out.config = cfg;
  out.n_cycles = n_cycles;
  out.schema = feature_names(n_cycles, false);
  out.n_candidates = candidates.rows();
  std::size_t kept = 0;
  for (bool k : keep) kept += k ? 1 : 0;
  out.n_retained = kept;
  out.samples = Matrix(kept, d);
  out.cluster_id.reserve(kept);
  std::size_t w = 0;
  for (std::size_t i = 0; i < candidates.rows(); ++i) {
    if (!keep[i]) continue;
    out.samples.set_row(w++, candidates.row(i));
    out.cluster_id.push_back(cand_cluster[i]);
  }
  return out;
}

std::string design_manifest_json(const TrainingDesign& d) {
  nlohmann::json j;
  j["seed"] = d.config.seed;
  j["n_clusters"] = d.config.n_clusters;
  j["samples_per_cluster"] = d.config.samples_per_cluster;
  j["maximin_trials"] = d.config.maximin_trials;
  j["lhgr_cap_kw_m"] = d.config.lhgr_cap_kw_m;
  j["pf_cap"] = d.config.pf_cap;
  j["n_candidates"] = d.n_candidates;
  j["n_retained"] = d.n_retained;
  j["n_cycles"] = d.n_cycles;
  std::vector<std::size_t> per_cluster(d.config.n_clusters, 0);
  for (int c : d.cluster_id) per_cluster[c]++;
  j["retained_per_cluster"] = per_cluster;
  return j.dump(2);
}

}  // namespace fuelsurr
