#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fuelsurr/ml.hpp"
#include "fuelsurr/rng.hpp"

namespace fuelsurr {

namespace {

struct TreeSettings {
  int max_depth = 0;           // 0 = unlimited
  int features_per_split = 0;  // 0 = all
  int min_samples_leaf = 1;
};

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<double>& y, const TreeSettings& settings,
              Rng* feature_rng)
      : x_(x), y_(y), settings_(settings), feature_rng_(feature_rng) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree t;
    grow(t, std::move(rows), 0);
    return t;
  }

 private:
  int grow(Tree& t, std::vector<std::size_t> rows, int depth) {
    const int node_id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();

    double sum = 0.0;
    for (std::size_t r : rows) sum += y_[r];
    const double mean = sum / static_cast<double>(rows.size());
    t.nodes[node_id].value = mean;

    double sse = 0.0;
    for (std::size_t r : rows) sse += (y_[r] - mean) * (y_[r] - mean);

    const bool depth_ok = settings_.max_depth == 0 || depth < settings_.max_depth;
    if (!depth_ok || sse <= 1e-24 ||
        rows.size() < static_cast<std::size_t>(2 * settings_.min_samples_leaf))
      return node_id;

    const SplitChoice split = best_split(rows, sse);
    if (!split.found) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      if (x_(r, split.feature) <= split.threshold) left.push_back(r);
      else right.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    t.nodes[node_id].feature = split.feature;
    t.nodes[node_id].threshold = split.threshold;
    const int l = grow(t, std::move(left), depth + 1);
    const int r = grow(t, std::move(right), depth + 1);
    t.nodes[node_id].left = l;
    t.nodes[node_id].right = r;
    return node_id;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows, double parent_sse) {
    const std::size_t d = x_.cols();
    std::vector<int> features;
    if (settings_.features_per_split > 0 &&
        settings_.features_per_split < static_cast<int>(d) && feature_rng_ != nullptr) {
      std::vector<int> all(d);
      for (std::size_t j = 0; j < d; ++j) all[j] = static_cast<int>(j);
      feature_rng_->shuffle(all);
      features.assign(all.begin(), all.begin() + settings_.features_per_split);
      std::sort(features.begin(), features.end());  // ties resolve by feature index
    } else {
      features.resize(d);
      for (std::size_t j = 0; j < d; ++j) features[j] = static_cast<int>(j);
    }

    SplitChoice best;
    std::vector<std::pair<double, double>> vals(rows.size());  // (x, y)
    const std::size_t min_leaf = settings_.min_samples_leaf;

    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(vals.begin(), vals.end());

      double left_sum = 0.0, left_sq = 0.0;
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& v : vals) {
        total_sum += v.second;
        total_sq += v.second * v.second;
      }

      const std::size_t n = vals.size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += vals[i].second;
        left_sq += vals[i].second * vals[i].second;
        if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
        const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
        const double gain = parent_sse - sse_l - sse_r;
        const double threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        // scan order is ascending in (feature, threshold), so keeping only
        // strict improvements breaks ties toward the lowest feature index
        // and the lowest threshold
        if ((!best.found && gain > 0.0) || (best.found && gain > best.gain)) {
          best.found = true;
          best.feature = f;
          best.threshold = threshold;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const std::vector<double>& y_;
  TreeSettings settings_;
  Rng* feature_rng_;
};

}  // namespace

TrainedSurrogate train_random_forest(const Dataset& ds, const RfHyper& hp, std::uint64_t seed) {
  ds.validate();
  if (ds.n() < 2) throw std::invalid_argument("train_random_forest: need >= 2 samples");
  if (hp.n_trees < 1) throw std::invalid_argument("train_random_forest: need >= 1 tree");

  TrainedSurrogate m;
  m.kind = ModelKind::kRandomForest;
  m.qoi_id = ds.qoi_id;
  m.schema = ds.schema;
  m.scale_x = false;
  m.scale_y = false;

  TreeSettings settings;
  settings.max_depth = hp.max_depth;
  settings.features_per_split = hp.features_per_split;
  settings.min_samples_leaf = hp.min_samples_leaf;

  ForestParams forest;
  Rng rng(seed);
  const std::size_t n = ds.n();
  for (int t = 0; t < hp.n_trees; ++t) {
    // seed streams fixed per tree so concurrent growth stays reproducible
    Rng tree_rng = rng.child(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    if (hp.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows[i] = tree_rng.index(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    }
    Rng split_rng = tree_rng.child(0xfeed);
    TreeBuilder builder(ds.x, ds.y, settings, &split_rng);
    forest.trees.push_back(builder.build(std::move(rows)));
  }
  m.params = std::move(forest);
  return m;
}

TrainedSurrogate train_gbt(const Dataset& ds, const GbtHyper& hp, std::uint64_t seed) {
  ds.validate();
  if (ds.n() < 2) throw std::invalid_argument("train_gbt: need >= 2 samples");
  if (hp.n_rounds < 1) throw std::invalid_argument("train_gbt: need >= 1 round");

  TrainedSurrogate m;
  m.kind = ModelKind::kGbt;
  m.qoi_id = ds.qoi_id;
  m.schema = ds.schema;
  m.scale_x = false;
  m.scale_y = false;
  m.seed = seed;

  const std::size_t n = ds.n();
  GbtParams gbt;
  gbt.learning_rate = hp.learning_rate;
  double base = 0.0;
  for (double v : ds.y) base += v;
  gbt.base = base / static_cast<double>(n);

  TreeSettings settings;
  settings.max_depth = hp.max_depth;
  settings.min_samples_leaf = hp.min_samples_leaf;

  std::vector<double> residual(n);
  std::vector<double> current(n, gbt.base);
  for (std::size_t i = 0; i < n; ++i) residual[i] = ds.y[i] - current[i];

  std::vector<std::size_t> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

  for (int round = 0; round < hp.n_rounds; ++round) {
    TreeBuilder builder(ds.x, residual, settings, nullptr);
    Tree tree = builder.build(all_rows);
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      current[i] += hp.learning_rate * tree.predict(ds.x.row_ptr(i));
      residual[i] = ds.y[i] - current[i];
      mse += residual[i] * residual[i];
    }
    gbt.train_mse.push_back(mse / static_cast<double>(n));
    gbt.trees.push_back(std::move(tree));
  }
  m.params = std::move(gbt);
  return m;
}

}  // namespace fuelsurr
