#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fuelsurr/linalg.hpp"
#include "fuelsurr/pci_risk.hpp"
#include "fuelsurr/qoi.hpp"

namespace fuelsurr {

// As-fabricated rod description. Defaults follow a generic 17x17 PWR rod.
struct RodSpec {
  bool is_ifba = false;
  double fill_pressure_mpa = 2.41;
  double clad_thickness_mm = 0.5715;
  double rod_outer_diameter_mm = 9.50;
  double gap_thickness_um = 82.55;  // diametral
  double fuel_stack_length_cm = 365.76;
  double plenum_length_cm = 17.5;
  double enrichment = 0.048;
  CladAlloy alloy = CladAlloy::kZr4;

  void validate() const;
};

// IFBA rods ship with a lower helium fill (0.7 MPa vs 2.41 MPa).
RodSpec default_rod_spec(bool ifba);

// Per-rod operating history: core-average linear power plus the axial
// peaking-factor profile at every timestep. times_h[0] == 0 marks the
// initial state; step i covers (times_h[i-1], times_h[i]].
struct PowerHistory {
  std::vector<double> times_h;
  std::vector<double> lhgr_kw_m;
  Matrix pf_profiles;                     // steps x axial nodes, mean ~ 1 per row
  std::vector<std::size_t> cycle_starts;  // first index of each power cycle

  std::size_t steps() const { return times_h.size(); }
  std::vector<double> step_hours() const;  // dt per step; dt[0] = 0
  std::vector<double> max_pf() const;      // row max of pf_profiles
  void validate() const;
};

// CSV form: time_h, lhgr_kw_m, pf_node_1..N (cycle starts are re-inferred
// from zero-power gaps on load). The JSON form is lossless.
void write_history_csv(const std::string& path, const PowerHistory& h);
PowerHistory read_history_csv(const std::string& path);
std::string history_to_json(const PowerHistory& h);
PowerHistory history_from_json(const std::string& text);

// Infer cycle boundaries from shutdown gaps (runs of zero power at least
// min_gap_h long delimit cycles).
std::vector<std::size_t> infer_cycle_starts(const std::vector<double>& times_h,
                                            const std::vector<double>& lhgr_kw_m,
                                            double min_gap_h = 72.0);

// Closure constants for the reduced-order model. These are tunable artifact
// parameters, not measured physics; the shipped defaults are calibrated to
// land in realistic PWR ranges.
struct SimConfig {
  double coolant_temperature_k = 565.7;
  double coolant_pressure_mpa = 15.51;
  int axial_nodes = 12;

  // lumped radial thermal resistances [K·m/kW]
  double film_resistance = 0.5;
  double clad_resistance = 1.2;
  double fuel_resistance = 28.0;

  // gap conductance closure: R_gap = gap_um * gap_resistance_per_um / k_rel
  // with k_rel the gas-mixture conductivity relative to fresh helium,
  // plus a floor contact resistance once the gap is closed.
  double gap_resistance_per_um = 0.13;
  double contact_resistance = 0.3;
  double fission_gas_conductivity_rel = 0.05;  // Xe/Kr vs He
  double gas_conductivity_temp_exp = 0.7;

  // fission gas release fraction vs peak fuel temperature [K]
  std::vector<double> fgr_temperature_k = {0.0, 800.0, 1100.0, 1400.0, 1700.0, 2000.0, 2500.0};
  std::vector<double> fgr_fraction = {0.01, 0.01, 0.02, 0.05, 0.12, 0.25, 0.40};
  // gas produced per rod per unit burnup [mol per MWd/MTU]
  double fgr_yield_mol_per_mwd = 2.4e-6;

  // helium inventory released linearly over the first cycle's at-power time
  double ifba_helium_mol = 0.008;

  // waterside corrosion: d(oxide)/dt = A * exp(-Q / T_surface) [um/day]
  double oxide_prefactor_um_per_day = 7.3e6;
  double oxide_activation_temperature_k = 11000.0;
  double hydrogen_pickup_fraction = 0.15;
  double hydrogen_per_oxide_ppm_per_um = 80.0;

  // mechanics closures
  double clad_creep_down_um_per_mwd = 0.0005;   // inward, per MWd/MTU
  double fuel_swelling_um_per_mwd = 0.0007;     // per MWd/MTU
  double thermal_expansion_um_per_k = 0.02;     // vs (T_fuel - T_coolant)
  double contact_stiffness_mpa_per_um = 6.0;    // hoop stress per um interference
  double clad_elastic_modulus_gpa = 80.0;

  // plenum gas state
  double plenum_temp_rise_k_per_kw_m = 0.8;
  double fill_temperature_k = 293.0;

  // fuel column mass
  double fuel_td_g_cm3 = 10.96;
  double fuel_density_frac_td = 0.957;
  double heavy_metal_fraction = 0.8815;

  void validate() const;
  static SimConfig load(const std::string& path);  // key = value file
  void save(const std::string& path) const;
};

// Simulated state series at the limiting axial node.
struct RodTrace {
  std::vector<double> times_h;
  std::vector<double> fuel_temperature_k;  // hottest-node value
  std::vector<double> plenum_pressure_mpa;
  std::vector<double> oxide_um;
  std::vector<double> hydrogen_ppm;
  std::vector<double> hoop_stress_mpa;
  std::vector<double> hoop_strain;
  std::vector<double> burnup_mwd_mtu;  // rod average
  std::vector<double> gap_um;          // residual radial gap
  std::vector<std::size_t> cycle_starts;
  CladAlloy alloy = CladAlloy::kZr4;

  std::size_t steps() const { return times_h.size(); }
  std::vector<double> step_hours() const;
};

// The stepwise startup schedule: 0 -> 30% over 10 h, hold 50 h, -> 80% over
// 30 h, hold 20 h, -> 90% over 10 h, hold 10 h, -> 100% over 14 h.
double startup_ramp_fraction(double t_h);
inline constexpr double kStartupRampHours = 144.0;

struct PowerSegment {
  std::vector<double> times_h;
  std::vector<double> lhgr_kw_m;
};

// Sampled ramp from zero to full_power_lhgr; dt must resolve the shortest
// (10 h) ramp segment.
PowerSegment make_startup_ramp(double full_power_lhgr, double dt_h);

// Heavy-metal loading of the fuel column [MTU per m].
double heavy_metal_mtu_per_m(const RodSpec& spec, const SimConfig& cfg);

RodTrace simulate_rod(const RodSpec& spec, const PowerHistory& history, const SimConfig& cfg);

// Maxima over the trace plus the two PCI failure probabilities.
QoiVector extract_qois(const RodTrace& trace, const PciRiskEngine& engine);

// QoIs of the trace truncated after `count` leading steps (used when tabling
// responses against burnup).
QoiVector extract_qois_prefix(const RodTrace& trace, std::size_t count,
                              const PciRiskEngine& engine);

}  // namespace fuelsurr
