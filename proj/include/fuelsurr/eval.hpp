#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fuelsurr {

struct MetricReport {
  double r2 = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double rrmse = 0.0;
  double mape = 0.0;
  double max_error = 0.0;  // signed
  double min_error = 0.0;  // signed
  std::size_t n = 0;
  bool rrmse_valid = true;        // false when zero targets forced exclusion of all entries
  std::size_t relative_excluded = 0;  // zero-target entries left out of rRMSE/MAPE
  bool r2_degenerate = false;     // constant targets; r2 carries the 1/-inf convention

  std::string to_json() const;
};

MetricReport regression_metrics(const std::vector<double>& y, const std::vector<double>& y_hat);

struct ErrorCdfPoint {
  double error = 0.0;
  double fraction = 0.0;
};

// Sorted (|error|, cumulative fraction) curve; relative errors exclude
// zero-target entries and report how many were dropped.
std::vector<ErrorCdfPoint> error_cdf_curve(const std::vector<double>& y,
                                           const std::vector<double>& y_hat, bool relative,
                                           std::size_t* excluded = nullptr);

struct RuntimeReport {
  double simulator_ms_per_rod = 0.0;
  double surrogate_ms_per_rod = 0.0;
  double speedup = 0.0;
  int repeats = 0;
  std::size_t n_rods = 0;

  std::string to_json() const;
};

// Wall-clock medians over `repeats` passes with one discarded warm-up pass.
// Each callable must process all n_rods.
RuntimeReport benchmark_runtime(const std::function<void()>& surrogate_pass,
                                const std::function<void()>& simulator_pass, std::size_t n_rods,
                                int repeats);

}  // namespace fuelsurr
