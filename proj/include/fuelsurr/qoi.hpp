#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fuelsurr {

// The eight per-rod safety responses tracked by the toolkit.
enum class QoiId : int {
  kMaxFuelTemperature = 0,
  kMaxPlenumPressure,
  kMaxOxideThickness,
  kMaxHydrogen,
  kMaxHoopStress,
  kMaxHoopStrain,
  kSccFailureProbability,
  kMpsFailureProbability,
};

inline constexpr std::size_t kNumQois = 8;

inline constexpr std::array<QoiId, kNumQois> all_qois() {
  return {QoiId::kMaxFuelTemperature, QoiId::kMaxPlenumPressure,
          QoiId::kMaxOxideThickness,  QoiId::kMaxHydrogen,
          QoiId::kMaxHoopStress,      QoiId::kMaxHoopStrain,
          QoiId::kSccFailureProbability, QoiId::kMpsFailureProbability};
}

inline const char* qoi_name(QoiId id) {
  switch (id) {
    case QoiId::kMaxFuelTemperature: return "max_fuel_temperature_k";
    case QoiId::kMaxPlenumPressure: return "max_plenum_pressure_mpa";
    case QoiId::kMaxOxideThickness: return "max_oxide_thickness_um";
    case QoiId::kMaxHydrogen: return "max_hydrogen_ppm";
    case QoiId::kMaxHoopStress: return "max_hoop_stress_mpa";
    case QoiId::kMaxHoopStrain: return "max_hoop_strain";
    case QoiId::kSccFailureProbability: return "scc_failure_probability";
    case QoiId::kMpsFailureProbability: return "mps_failure_probability";
  }
  throw std::invalid_argument("qoi_name: unknown id");
}

inline QoiId parse_qoi(const std::string& name) {
  for (QoiId id : all_qois())
    if (name == qoi_name(id)) return id;
  throw std::invalid_argument("parse_qoi: unknown QoI '" + name + "'");
}

// All eight responses for one rod.
struct QoiVector {
  std::array<double, kNumQois> values{};

  double get(QoiId id) const { return values[static_cast<std::size_t>(id)]; }
  void set(QoiId id, double v) { values[static_cast<std::size_t>(id)] = v; }
};

}  // namespace fuelsurr
