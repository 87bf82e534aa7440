#include "fuelsurr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fuelsurr {

MetricReport regression_metrics(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("regression_metrics: length mismatch");
  if (y.empty()) throw std::invalid_argument("regression_metrics: empty input");
  const std::size_t n = y.size();

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);

  MetricReport r;
  r.n = n;
  double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
  double rel_sq = 0.0, rel_abs = 0.0;
  std::size_t rel_n = 0;
  r.max_error = -std::numeric_limits<double>::infinity();
  r.min_error = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y_hat[i] - y[i];
    ss_res += e * e;
    ss_tot += (y[i] - mean) * (y[i] - mean);
    abs_sum += std::abs(e);
    r.max_error = std::max(r.max_error, e);
    r.min_error = std::min(r.min_error, e);
    if (y[i] != 0.0) {
      const double rel = e / y[i];
      rel_sq += rel * rel;
      rel_abs += std::abs(rel);
      ++rel_n;
    }
  }
  r.rmse = std::sqrt(ss_res / static_cast<double>(n));
  r.mae = abs_sum / static_cast<double>(n);
  r.relative_excluded = n - rel_n;
  if (rel_n > 0) {
    r.rrmse = std::sqrt(rel_sq / static_cast<double>(rel_n));
    r.mape = rel_abs / static_cast<double>(rel_n);
  } else {
    r.rrmse_valid = false;
    r.rrmse = std::numeric_limits<double>::quiet_NaN();
    r.mape = std::numeric_limits<double>::quiet_NaN();
  }
  if (ss_tot > 0.0) {
    r.r2 = 1.0 - ss_res / ss_tot;
  } else {
    // constant targets: perfect fit scores 1, anything else is flagged -inf
    r.r2_degenerate = true;
    r.r2 = ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return r;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["r2"] = r2;
  j["rmse"] = rmse;
  j["mae"] = mae;
  j["rrmse"] = rrmse_valid ? nlohmann::json(rrmse) : nlohmann::json(nullptr);
  j["mape"] = rrmse_valid ? nlohmann::json(mape) : nlohmann::json(nullptr);
  j["max_error"] = max_error;
  j["min_error"] = min_error;
  j["n"] = n;
  j["relative_excluded"] = relative_excluded;
  j["r2_degenerate"] = r2_degenerate;
  return j.dump();
}

std::vector<ErrorCdfPoint> error_cdf_curve(const std::vector<double>& y,
                                           const std::vector<double>& y_hat, bool relative,
                                           std::size_t* excluded) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("error_cdf_curve: length mismatch");
  if (y.empty()) throw std::invalid_argument("error_cdf_curve: empty input");
  std::vector<double> errors;
  errors.reserve(y.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (relative) {
      if (y[i] == 0.0) {
        ++dropped;
        continue;
      }
      errors.push_back(std::abs((y_hat[i] - y[i]) / y[i]));
    } else {
      errors.push_back(std::abs(y_hat[i] - y[i]));
    }
  }
  if (excluded != nullptr) *excluded = dropped;
  if (errors.empty())
    throw std::invalid_argument("error_cdf_curve: all targets are zero in relative mode");
  std::sort(errors.begin(), errors.end());
  std::vector<ErrorCdfPoint> curve(errors.size());
  const double n = static_cast<double>(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k)
    curve[k] = {errors[k], static_cast<double>(k + 1) / n};
  return curve;
}

namespace {

double median_ms(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double time_pass_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

RuntimeReport benchmark_runtime(const std::function<void()>& surrogate_pass,
                                const std::function<void()>& simulator_pass, std::size_t n_rods,
                                int repeats) {
  if (repeats < 3) throw std::invalid_argument("benchmark_runtime: need >= 3 repeats");
  if (n_rods == 0) throw std::invalid_argument("benchmark_runtime: need >= 1 rod");

  // warm-up passes excluded from the medians
  time_pass_ms(surrogate_pass);
  time_pass_ms(simulator_pass);

  std::vector<double> sur_ms, sim_ms;
  for (int r = 0; r < repeats; ++r) {
    sur_ms.push_back(time_pass_ms(surrogate_pass));
    sim_ms.push_back(time_pass_ms(simulator_pass));
  }

  RuntimeReport rep;
  rep.repeats = repeats;
  rep.n_rods = n_rods;
  rep.surrogate_ms_per_rod = median_ms(sur_ms) / static_cast<double>(n_rods);
  rep.simulator_ms_per_rod = median_ms(sim_ms) / static_cast<double>(n_rods);
  rep.speedup = rep.surrogate_ms_per_rod > 0.0
                    ? rep.simulator_ms_per_rod / rep.surrogate_ms_per_rod
                    : std::numeric_limits<double>::infinity();
  return rep;
}

std::string RuntimeReport::to_json() const {
  nlohmann::json j;
  j["simulator_ms_per_rod"] = simulator_ms_per_rod;
  j["surrogate_ms_per_rod"] = surrogate_ms_per_rod;
  j["speedup"] = speedup;
  j["repeats"] = repeats;
  j["n_rods"] = n_rods;
  return j.dump(2);
}

}  // namespace fuelsurr
