#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fuelsurr {

enum class CladAlloy { kZr2, kZr4 };
enum class PciMode { kScc, kMps };

inline const char* alloy_name(CladAlloy a) { return a == CladAlloy::kZr2 ? "zr2" : "zr4"; }

// Cladding yield stress vs temperature, linearly interpolated between knots.
// The shipped default is a declared stand-in and can be replaced wholesale
// from a CSV knot file.
struct YieldTable {
  std::vector<double> temperature_k;  // strictly increasing
  std::vector<double> yield_mpa;      // > 0

  void validate() const;
  double yield_at(double t_k) const;  // throws outside the knot range
  double t_min() const { return temperature_k.front(); }
  double t_max() const { return temperature_k.back(); }

  static YieldTable default_table();
  static YieldTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

// Piecewise-linear CDF mapping a cumulative damage index to failure
// probability. Clamps to 0 below the first knot and 1 above the last.
struct CdiCdf {
  std::vector<double> cdi;   // strictly increasing
  std::vector<double> prob;  // non-decreasing, first 0, last 1

  void validate() const;

  static CdiCdf default_table();
  static CdiCdf load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

// One damage-accumulation window: aligned series of cladding state.
// dt_s[i] is the duration covered by step i (first step may be 0).
struct CdiInputs {
  std::vector<double> hoop_stress_mpa;
  std::vector<double> burnup_mwd_mtu;
  std::vector<double> temperature_k;
  std::vector<double> dt_s;
  CladAlloy alloy = CladAlloy::kZr4;

  void validate() const;
};

// Threshold stress [MPa]; only defined above 5000 MWd/MTU.
double threshold_stress(double burnup_mwd_mtu, CladAlloy alloy);

// Time-to-failure [s] at the given concentrated hoop stress.
double time_to_failure(double stress_mpa, double burnup_mwd_mtu, double temperature_k,
                       CladAlloy alloy, const YieldTable& yield);

// Stress concentration factor mapping R-Z hoop stress to the local R-theta
// stress; floored at 1.0 (the linear fits dip below 1 at high stress).
double concentration_factor(double stress_mpa, PciMode mode);

// Damage integral over one window: sum of dt / t_f over steps where the
// concentrated stress exceeds the threshold stress and burnup exceeds
// 5000 MWd/MTU. Accumulation stops 1000 s after the (first) peak of the
// concentrated stress series.
double accumulate_cdi(const CdiInputs& in, const YieldTable& yield, PciMode mode);

inline constexpr double kPostPeakWindowSeconds = 1000.0;

// Failure probability for a given damage index.
double failure_risk(double cdi, const CdiCdf& cdf);

struct PciRiskResult {
  double cdi_scc = 0.0;
  double cdi_mps = 0.0;
  double risk_scc = 0.0;
  double risk_mps = 0.0;
};

// Bundles the yield table, the CDI CDF and the cladding temperature closure.
// Damage windows are evaluated per power cycle and summed before the CDF map.
class PciRiskEngine {
 public:
  PciRiskEngine() : PciRiskEngine(YieldTable::default_table(), CdiCdf::default_table()) {}
  PciRiskEngine(YieldTable yield, CdiCdf cdf, double clad_temperature_k = 600.0);

  PciRiskResult assess(const std::vector<double>& hoop_stress_mpa,
                       const std::vector<double>& burnup_mwd_mtu,
                       const std::vector<double>& dt_s,
                       const std::vector<std::size_t>& cycle_starts,
                       CladAlloy alloy) const;

  const YieldTable& yield() const { return yield_; }
  const CdiCdf& cdf() const { return cdf_; }
  double clad_temperature_k() const { return clad_temperature_k_; }

 private:
  YieldTable yield_;
  CdiCdf cdf_;
  double clad_temperature_k_;
};

}  // namespace fuelsurr
