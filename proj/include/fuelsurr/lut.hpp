#pragma once

#include <string>
#include <vector>

#include "fuelsurr/linalg.hpp"
#include "fuelsurr/qoi.hpp"
#include "fuelsurr/rodsim.hpp"

namespace fuelsurr {

// 2D table of one QoI over (limiting-node LHGR, rod-average burnup), built
// from constant-power runs of the simulator. Entry (i,j) holds the QoI of
// the run at lhgr_axis[i] truncated once burnup reaches burnup_axis[j].
struct Lut2D {
  QoiId qoi = QoiId::kMaxFuelTemperature;
  bool ifba = false;
  std::vector<double> lhgr_axis;    // kW/m, strictly increasing
  std::vector<double> burnup_axis;  // MWd/MTU, strictly increasing
  Matrix values;                    // lhgr x burnup

  void validate() const;
};

struct LutQuery {
  double value = 0.0;
  bool clamped = false;  // one or both coordinates fell outside the grid
};

// How a rod-level prediction walks the table.
enum class LutPredictMode {
  kMaxOverTrajectory,  // max of per-step queries along (lhgr*maxPF, burnup)
  kFinalBurnup,        // single query at the trajectory end point
};

LutPredictMode default_lut_mode(QoiId qoi);

// One constant-power run per lhgr level, sampled at each burnup grid point.
// Throws if the deepest burnup is unreachable within max_days at some level.
Lut2D build_lut(QoiId qoi, const std::vector<double>& lhgr_grid,
                const std::vector<double>& burnup_grid, const RodSpec& spec,
                const SimConfig& cfg, const PciRiskEngine& engine,
                double step_hours = 24.0, double max_days = 40000.0);

// Bilinear interpolation; out-of-grid coordinates clamp to the boundary.
LutQuery lut_query(const Lut2D& lut, double lhgr, double burnup);

// Rod-level prediction from an operating history.
double lut_predict_rod(const Lut2D& lut, const PowerHistory& history,
                       const SimConfig& cfg, const RodSpec& spec,
                       LutPredictMode mode);
double lut_predict_rod(const Lut2D& lut, const PowerHistory& history,
                       const SimConfig& cfg, const RodSpec& spec);

// grid defaults: 2..30 kW/m by 2, 0..75 GWd/MTU by 2.5
std::vector<double> default_lhgr_grid();
std::vector<double> default_burnup_grid();

void save_lut_csv(const std::string& path, const Lut2D& lut);
Lut2D load_lut_csv(const std::string& path);
std::string lut_manifest_json(const Lut2D& lut, std::uint64_t seed);

}  // namespace fuelsurr
