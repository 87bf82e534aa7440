#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fuelsurr/lut.hpp"
#include "fuelsurr/rodsim.hpp"

namespace fuelsurr {

// Canonical operating schedule: per cycle a 144 h stepwise startup ramp
// followed by steady operation, with 15-day shutdowns between cycles.
struct ScheduleTemplate {
  int n_cycles = 2;
  double cycle_days = 500.0;     // at-power calendar days per cycle, ramp included
  double shutdown_days = 15.0;
  double ramp_dt_h = 6.0;
  double steady_dt_h = 24.0;
  int axial_nodes = 12;
  double pf_shape_width = 0.92;  // chopped-cosine axial shape parameter

  void validate() const;
  // normalized axial power shape, mean exactly 1, peak at mid-core
  std::vector<double> axial_shape() const;
};

// Quartic coefficients in normalized cycle time, lowest degree first.
using PolyCoeffs = std::array<double, 5>;

double poly_eval(const PolyCoeffs& c, double u);

// Per-cycle description of a rod in coefficient space.
struct CycleCoeffs {
  PolyCoeffs lhgr;    // kW/m over the steady window, u in [0,1]
  PolyCoeffs max_pf;  // peak axial PF over the steady window
};

// Flat feature layout: per cycle 5 LHGR + 5 max-PF coefficients, then the
// rod-type indicator, then (optionally) the hoop-stress LUT prediction.
struct FeatureVector {
  std::vector<double> values;
  int n_cycles = 0;
  bool has_lut_feature = false;

  std::size_t size() const { return values.size(); }
  static std::size_t expected_size(int n_cycles, bool with_lut) {
    return static_cast<std::size_t>(10 * n_cycles + 1 + (with_lut ? 1 : 0));
  }
};

std::vector<std::string> feature_names(int n_cycles, bool with_lut);

enum class FeatureVariant { kBase, kHoopStress };

// Row maximum per timestep; throws on an empty profile matrix.
std::vector<double> reduce_pf(const Matrix& pf_profiles);

// Least-squares quartic over series[window_begin, window_end) with time
// normalized to [0,1] across the window. Needs >= 5 distinct times.
PolyCoeffs fit_cycle_polynomial(const std::vector<double>& series,
                                const std::vector<double>& times_h,
                                std::size_t window_begin, std::size_t window_end);

// Steady-window index ranges per cycle (ramp and shutdown samples excluded).
std::vector<std::pair<std::size_t, std::size_t>> steady_windows(const PowerHistory& history,
                                                                double ramp_hours = kStartupRampHours);

// Coefficient features for one rod. The hoop-stress variant appends the LUT
// prediction and requires the matching rod-type table.
FeatureVector extract_features(const PowerHistory& history, const RodSpec& spec,
                               FeatureVariant variant, const ScheduleTemplate& tmpl = {},
                               const Lut2D* hoop_lut = nullptr,
                               const SimConfig* cfg = nullptr);

FeatureVector pack_features(const std::vector<CycleCoeffs>& cycles, bool ifba,
                            std::optional<double> lut_feature = std::nullopt);
std::vector<CycleCoeffs> unpack_cycles(const FeatureVector& fv);
bool feature_is_ifba(const FeatureVector& fv);
FeatureVector feature_from_row(const std::vector<double>& row, int n_cycles, bool with_lut);

struct ReconstructionResult {
  PowerHistory history;
  bool lhgr_below_zero = false;  // negative samples were clipped to 0
  bool lhgr_above_cap = false;
  bool pf_above_cap = false;
  double lhgr_min = 0.0;
  double lhgr_max = 0.0;
  double pf_max = 0.0;

  bool physical() const { return !lhgr_below_zero && !lhgr_above_cap && !pf_above_cap; }
};

// Rebuild an operating history from coefficient features: quartics over the
// steady windows, scaled through the startup ramp, 15-day shutdowns between
// cycles, and the template axial shape rescaled to the max-PF series.
ReconstructionResult reconstruct_history(const FeatureVector& fv, const ScheduleTemplate& tmpl,
                                         double lhgr_cap = 30.0, double pf_cap = 1.6);

// Same path used by the synthetic-core generator.
ReconstructionResult build_history_from_coeffs(const std::vector<CycleCoeffs>& cycles,
                                               const ScheduleTemplate& tmpl,
                                               double lhgr_cap = 30.0, double pf_cap = 1.6);

}  // namespace fuelsurr
