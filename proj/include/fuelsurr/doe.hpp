#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuelsurr/features.hpp"
#include "fuelsurr/linalg.hpp"

namespace fuelsurr {

struct DesignConfig {
  int n_clusters = 3;
  int samples_per_cluster = 200;
  int maximin_trials = 50;
  int kmeans_restarts = 10;
  double lhgr_cap_kw_m = 30.0;
  double pf_cap = 1.6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ClusterResult {
  std::vector<int> assignment;  // per row
  Matrix centroids;             // k x d
  double inertia = 0.0;         // total within-cluster squared distance
};

// Seeded k-means with spread (k-means++ style) initialization; best of
// `restarts` runs by inertia. Deterministic for a fixed seed.
ClusterResult cluster_features(const Matrix& x, int k, std::uint64_t seed, int restarts = 10);

// Empirical quantile function of one feature: linear interpolation between
// order statistics at midpoint positions (i + 0.5)/m.
class EmpiricalMarginal {
 public:
  explicit EmpiricalMarginal(std::vector<double> values);
  double quantile(double q) const;  // q clamped to [0,1]
  std::size_t count() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

// Per-feature marginals of the selected rows (all rows when subset empty).
std::vector<EmpiricalMarginal> fit_marginals(const Matrix& x,
                                             const std::vector<std::size_t>& rows = {});

struct LhsResult {
  Matrix unit;    // n x d stratified coordinates in [0,1)^d
  Matrix values;  // unit mapped through the marginal quantile functions
  double min_pairwise_distance = 0.0;  // in unit-cube coordinates
};

// Best-of-`trials` maximin Latin Hypercube draw through the marginals.
LhsResult maximin_lhs(const std::vector<EmpiricalMarginal>& marginals, int n, int trials,
                      std::uint64_t seed);

// Keep samples whose reconstructed history stays inside the physical bounds.
std::vector<bool> filter_physical(const Matrix& samples, int n_cycles,
                                  const ScheduleTemplate& tmpl, double lhgr_cap, double pf_cap);

struct TrainingDesign {
  Matrix samples;  // retained feature rows (base layout, no LUT column)
  std::vector<std::string> schema;
  std::vector<int> cluster_id;
  std::size_t n_candidates = 0;  // before filtering
  std::size_t n_retained = 0;
  DesignConfig config;
  int n_cycles = 0;
};

// Algorithm: pool features across cores, standardize, cluster, fit per-cluster
// marginals (raw scale), draw maximin LHS per cluster, union, filter.
TrainingDesign design(const std::vector<Matrix>& core_features, int n_cycles,
                      const ScheduleTemplate& tmpl, const DesignConfig& cfg);

std::string design_manifest_json(const TrainingDesign& d);

}  // namespace fuelsurr
