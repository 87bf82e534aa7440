#include "fuelsurr/rodsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fuelsurr/csv.hpp"
#include "json.hpp"

namespace fuelsurr {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGasConstant = 8.314462618;  // J/(mol K)
}  // namespace

void RodSpec::validate() const {
  if (!(fill_pressure_mpa > 0.0)) throw std::invalid_argument("RodSpec: fill pressure must be > 0");
  if (!(gap_thickness_um > 0.0)) throw std::invalid_argument("RodSpec: gap thickness must be > 0");
  if (!(clad_thickness_mm > 0.0)) throw std::invalid_argument("RodSpec: clad thickness must be > 0");
  if (!(rod_outer_diameter_mm > 2.0 * clad_thickness_mm))
    throw std::invalid_argument("RodSpec: outer diameter too small for clad thickness");
  if (!(fuel_stack_length_cm > 0.0) || !(plenum_length_cm > 0.0))
    throw std::invalid_argument("RodSpec: stack and plenum lengths must be > 0");
  if (!(enrichment > 0.0 && enrichment < 1.0))
    throw std::invalid_argument("RodSpec: enrichment must be a fraction in (0,1)");
}

RodSpec default_rod_spec(bool ifba) {
  RodSpec s;
  s.is_ifba = ifba;
  s.fill_pressure_mpa = ifba ? 0.7 : 2.41;
  return s;
}

std::vector<double> PowerHistory::step_hours() const {
  std::vector<double> dt(times_h.size(), 0.0);
  for (std::size_t i = 1; i < times_h.size(); ++i) dt[i] = times_h[i] - times_h[i - 1];
  return dt;
}

std::vector<double> PowerHistory::max_pf() const {
  std::vector<double> m(pf_profiles.rows());
  for (std::size_t i = 0; i < pf_profiles.rows(); ++i) {
    const double* r = pf_profiles.row_ptr(i);
    double v = r[0];
    for (std::size_t j = 1; j < pf_profiles.cols(); ++j) v = std::max(v, r[j]);
    m[i] = v;
  }
  return m;
}

void PowerHistory::validate() const {
  const std::size_t n = times_h.size();
  if (n == 0) throw std::invalid_argument("PowerHistory: empty");
  if (lhgr_kw_m.size() != n) throw std::invalid_argument("PowerHistory: lhgr length mismatch");
  if (pf_profiles.rows() != n || pf_profiles.cols() == 0)
    throw std::invalid_argument("PowerHistory: pf profile shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(times_h[i] > times_h[i - 1]))
      throw std::invalid_argument("PowerHistory: times must be strictly increasing");
    if (lhgr_kw_m[i] < 0.0) throw std::invalid_argument("PowerHistory: lhgr must be >= 0");
    double mean = 0.0;
    const double* r = pf_profiles.row_ptr(i);
    for (std::size_t j = 0; j < pf_profiles.cols(); ++j) mean += r[j];
    mean /= static_cast<double>(pf_profiles.cols());
    if (mean < 0.99 || mean > 1.01)
      throw std::invalid_argument("PowerHistory: pf profile mean off unity at step " +
                                  std::to_string(i));
  }
  for (std::size_t k = 0; k < cycle_starts.size(); ++k) {
    if (cycle_starts[k] >= n)
      throw std::invalid_argument("PowerHistory: cycle start out of range");
    if (k > 0 && cycle_starts[k] <= cycle_starts[k - 1])
      throw std::invalid_argument("PowerHistory: cycle starts must be sorted");
  }
}

void write_history_csv(const std::string& path, const PowerHistory& h) {
  std::vector<std::string> header = {"time_h", "lhgr_kw_m"};
  for (std::size_t j = 0; j < h.pf_profiles.cols(); ++j)
    header.push_back("pf_node_" + std::to_string(j + 1));
  std::vector<std::vector<double>> rows;
  rows.reserve(h.steps());
  for (std::size_t i = 0; i < h.steps(); ++i) {
    std::vector<double> row = {h.times_h[i], h.lhgr_kw_m[i]};
    const double* r = h.pf_profiles.row_ptr(i);
    row.insert(row.end(), r, r + h.pf_profiles.cols());
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

std::vector<std::size_t> infer_cycle_starts(const std::vector<double>& times_h,
                                            const std::vector<double>& lhgr_kw_m,
                                            double min_gap_h) {
  // A long run of zero power delimits cycles; the run's final zero sample is
  // the new cycle's ramp start (the canonical builder places it there).
  std::vector<std::size_t> starts = {0};
  std::size_t i = 1;
  const std::size_t n = times_h.size();
  while (i < n) {
    if (lhgr_kw_m[i] == 0.0) {
      std::size_t j = i;
      while (j < n && lhgr_kw_m[j] == 0.0) ++j;
      if (j < n && j >= 2 && times_h[j - 1] - times_h[i - 1] >= min_gap_h)
        starts.push_back(j - 1);
      i = j;
    } else {
      ++i;
    }
  }
  return starts;
}

PowerHistory read_history_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const std::size_t jt = t.col("time_h");
  const std::size_t jl = t.col("lhgr_kw_m");
  std::vector<std::size_t> pf_cols;
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (t.header[j].rfind("pf_node_", 0) == 0) pf_cols.push_back(j);
  if (pf_cols.empty()) throw std::runtime_error("history csv: no pf_node_* columns in " + path);

  PowerHistory h;
  h.pf_profiles = Matrix(t.rows.size(), pf_cols.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    h.times_h.push_back(t.rows[i][jt]);
    h.lhgr_kw_m.push_back(t.rows[i][jl]);
    for (std::size_t j = 0; j < pf_cols.size(); ++j)
      h.pf_profiles(i, j) = t.rows[i][pf_cols[j]];
  }
  h.cycle_starts = infer_cycle_starts(h.times_h, h.lhgr_kw_m);
  h.validate();
  return h;
}

std::string history_to_json(const PowerHistory& h) {
  nlohmann::json j;
  j["times_h"] = h.times_h;
  j["lhgr_kw_m"] = h.lhgr_kw_m;
  j["axial_nodes"] = h.pf_profiles.cols();
  j["pf_profiles"] = h.pf_profiles.data();
  j["cycle_starts"] = h.cycle_starts;
  return j.dump();
}

PowerHistory history_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PowerHistory h;
  h.times_h = j.at("times_h").get<std::vector<double>>();
  h.lhgr_kw_m = j.at("lhgr_kw_m").get<std::vector<double>>();
  const std::size_t nodes = j.at("axial_nodes").get<std::size_t>();
  std::vector<double> flat = j.at("pf_profiles").get<std::vector<double>>();
  if (nodes == 0 || flat.size() != h.times_h.size() * nodes)
    throw std::runtime_error("history json: pf_profiles shape mismatch");
  h.pf_profiles = Matrix(h.times_h.size(), nodes);
  h.pf_profiles.data() = std::move(flat);
  h.cycle_starts = j.at("cycle_starts").get<std::vector<std::size_t>>();
  h.validate();
  return h;
}

void SimConfig::validate() const {
  if (!(coolant_pressure_mpa > 0.0)) throw std::invalid_argument("SimConfig: coolant pressure must be > 0");
  if (!(coolant_temperature_k > 0.0)) throw std::invalid_argument("SimConfig: coolant temperature must be > 0");
  if (axial_nodes < 1) throw std::invalid_argument("SimConfig: need >= 1 axial node");
  const double rates[] = {film_resistance, clad_resistance, fuel_resistance,
                          gap_resistance_per_um, contact_resistance,
                          fission_gas_conductivity_rel, fgr_yield_mol_per_mwd,
                          ifba_helium_mol, oxide_prefactor_um_per_day,
                          hydrogen_pickup_fraction, hydrogen_per_oxide_ppm_per_um,
                          clad_creep_down_um_per_mwd, fuel_swelling_um_per_mwd,
                          thermal_expansion_um_per_k, contact_stiffness_mpa_per_um,
                          plenum_temp_rise_k_per_kw_m};
  for (double r : rates)
    if (r < 0.0) throw std::invalid_argument("SimConfig: rates must be >= 0");
  if (fgr_temperature_k.size() != fgr_fraction.size() || fgr_temperature_k.size() < 2)
    throw std::invalid_argument("SimConfig: FGR table needs >= 2 aligned knots");
  for (std::size_t i = 1; i < fgr_temperature_k.size(); ++i)
    if (!(fgr_temperature_k[i] > fgr_temperature_k[i - 1]))
      throw std::invalid_argument("SimConfig: FGR temperatures must increase");
  if (!(fill_temperature_k > 0.0)) throw std::invalid_argument("SimConfig: fill temperature must be > 0");
  if (!(clad_elastic_modulus_gpa > 0.0)) throw std::invalid_argument("SimConfig: modulus must be > 0");
}

namespace {

std::string table_to_string(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    os << format_double(xs[i]) << ":" << format_double(ys[i]);
  }
  return os.str();
}

void parse_table(const std::string& s, std::vector<double>& xs, std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto c = item.find(':');
    if (c == std::string::npos) throw std::runtime_error("SimConfig: bad table entry '" + item + "'");
    xs.push_back(std::stod(item.substr(0, c)));
    ys.push_back(std::stod(item.substr(c + 1)));
  }
}

}  // namespace

void SimConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("SimConfig: cannot write " + path);
  out << "# reduced-order rod simulator closures (key = value)\n";
  out << "coolant_temperature_k = " << format_double(coolant_temperature_k) << "\n";
  out << "coolant_pressure_mpa = " << format_double(coolant_pressure_mpa) << "\n";
  out << "axial_nodes = " << axial_nodes << "\n";
  out << "film_resistance = " << format_double(film_resistance) << "\n";
  out << "clad_resistance = " << format_double(clad_resistance) << "\n";
  out << "fuel_resistance = " << format_double(fuel_resistance) << "\n";
  out << "gap_resistance_per_um = " << format_double(gap_resistance_per_um) << "\n";
  out << "contact_resistance = " << format_double(contact_resistance) << "\n";
  out << "fission_gas_conductivity_rel = " << format_double(fission_gas_conductivity_rel) << "\n";
  out << "gas_conductivity_temp_exp = " << format_double(gas_conductivity_temp_exp) << "\n";
  out << "fgr_table = " << table_to_string(fgr_temperature_k, fgr_fraction) << "\n";
  out << "fgr_yield_mol_per_mwd = " << format_double(fgr_yield_mol_per_mwd) << "\n";
  out << "ifba_helium_mol = " << format_double(ifba_helium_mol) << "\n";
  out << "oxide_prefactor_um_per_day = " << format_double(oxide_prefactor_um_per_day) << "\n";
  out << "oxide_activation_temperature_k = " << format_double(oxide_activation_temperature_k) << "\n";
  out << "hydrogen_pickup_fraction = " << format_double(hydrogen_pickup_fraction) << "\n";
  out << "hydrogen_per_oxide_ppm_per_um = " << format_double(hydrogen_per_oxide_ppm_per_um) << "\n";
  out << "clad_creep_down_um_per_mwd = " << format_double(clad_creep_down_um_per_mwd) << "\n";
  out << "fuel_swelling_um_per_mwd = " << format_double(fuel_swelling_um_per_mwd) << "\n";
  out << "thermal_expansion_um_per_k = " << format_double(thermal_expansion_um_per_k) << "\n";
  out << "contact_stiffness_mpa_per_um = " << format_double(contact_stiffness_mpa_per_um) << "\n";
  out << "clad_elastic_modulus_gpa = " << format_double(clad_elastic_modulus_gpa) << "\n";
  out << "plenum_temp_rise_k_per_kw_m = " << format_double(plenum_temp_rise_k_per_kw_m) << "\n";
  out << "fill_temperature_k = " << format_double(fill_temperature_k) << "\n";
  out << "fuel_td_g_cm3 = " << format_double(fuel_td_g_cm3) << "\n";
  out << "fuel_density_frac_td = " << format_double(fuel_density_frac_td) << "\n";
  out << "heavy_metal_fraction = " << format_double(heavy_metal_fraction) << "\n";
}

SimConfig SimConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("SimConfig: cannot open " + path);
  SimConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      std::size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    try {
      if (key == "coolant_temperature_k") cfg.coolant_temperature_k = std::stod(val);
      else if (key == "coolant_pressure_mpa") cfg.coolant_pressure_mpa = std::stod(val);
      else if (key == "axial_nodes") cfg.axial_nodes = std::stoi(val);
      else if (key == "film_resistance") cfg.film_resistance = std::stod(val);
      else if (key == "clad_resistance") cfg.clad_resistance = std::stod(val);
      else if (key == "fuel_resistance") cfg.fuel_resistance = std::stod(val);
      else if (key == "gap_resistance_per_um") cfg.gap_resistance_per_um = std::stod(val);
      else if (key == "contact_resistance") cfg.contact_resistance = std::stod(val);
      else if (key == "fission_gas_conductivity_rel") cfg.fission_gas_conductivity_rel = std::stod(val);
      else if (key == "gas_conductivity_temp_exp") cfg.gas_conductivity_temp_exp = std::stod(val);
      else if (key == "fgr_table") parse_table(val, cfg.fgr_temperature_k, cfg.fgr_fraction);
      else if (key == "fgr_yield_mol_per_mwd") cfg.fgr_yield_mol_per_mwd = std::stod(val);
      else if (key == "ifba_helium_mol") cfg.ifba_helium_mol = std::stod(val);
      else if (key == "oxide_prefactor_um_per_day") cfg.oxide_prefactor_um_per_day = std::stod(val);
      else if (key == "oxide_activation_temperature_k") cfg.oxide_activation_temperature_k = std::stod(val);
      else if (key == "hydrogen_pickup_fraction") cfg.hydrogen_pickup_fraction = std::stod(val);
      else if (key == "hydrogen_per_oxide_ppm_per_um") cfg.hydrogen_per_oxide_ppm_per_um = std::stod(val);
      else if (key == "clad_creep_down_um_per_mwd") cfg.clad_creep_down_um_per_mwd = std::stod(val);
      else if (key == "fuel_swelling_um_per_mwd") cfg.fuel_swelling_um_per_mwd = std::stod(val);
      else if (key == "thermal_expansion_um_per_k") cfg.thermal_expansion_um_per_k = std::stod(val);
      else if (key == "contact_stiffness_mpa_per_um") cfg.contact_stiffness_mpa_per_um = std::stod(val);
      else if (key == "clad_elastic_modulus_gpa") cfg.clad_elastic_modulus_gpa = std::stod(val);
      else if (key == "plenum_temp_rise_k_per_kw_m") cfg.plenum_temp_rise_k_per_kw_m = std::stod(val);
      else if (key == "fill_temperature_k") cfg.fill_temperature_k = std::stod(val);
      else if (key == "fuel_td_g_cm3") cfg.fuel_td_g_cm3 = std::stod(val);
      else if (key == "fuel_density_frac_td") cfg.fuel_density_frac_td = std::stod(val);
      else if (key == "heavy_metal_fraction") cfg.heavy_metal_fraction = std::stod(val);
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::exception& e) {
      throw std::runtime_error("SimConfig: " + path + " line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<double> RodTrace::step_hours() const {
  std::vector<double> dt(times_h.size(), 0.0);
  for (std::size_t i = 1; i < times_h.size(); ++i) dt[i] = times_h[i] - times_h[i - 1];
  return dt;
}

double startup_ramp_fraction(double t_h) {
  if (t_h <= 0.0) return 0.0;
  if (t_h < 10.0) return 0.30 * t_h / 10.0;
  if (t_h < 60.0) return 0.30;
  if (t_h < 90.0) return 0.30 + 0.50 * (t_h - 60.0) / 30.0;
  if (t_h < 110.0) return 0.80;
  if (t_h < 120.0) return 0.80 + 0.10 * (t_h - 110.0) / 10.0;
  if (t_h < 130.0) return 0.90;
  if (t_h < 144.0) return 0.90 + 0.10 * (t_h - 130.0) / 14.0;
  return 1.0;
}

PowerSegment make_startup_ramp(double full_power_lhgr, double dt_h) {
  if (!(full_power_lhgr > 0.0)) throw std::invalid_argument("make_startup_ramp: power must be > 0");
  if (!(dt_h > 0.0)) throw std::invalid_argument("make_startup_ramp: dt must be > 0");
  if (dt_h > 10.0)
    throw std::invalid_argument("make_startup_ramp: dt > 10 h cannot resolve the shortest segment");
  PowerSegment seg;
  double t = 0.0;
  while (t < kStartupRampHours - 1e-9) {
    seg.times_h.push_back(t);
    seg.lhgr_kw_m.push_back(full_power_lhgr * startup_ramp_fraction(t));
    t += dt_h;
  }
  seg.times_h.push_back(kStartupRampHours);
  seg.lhgr_kw_m.push_back(full_power_lhgr);
  return seg;
}

double heavy_metal_mtu_per_m(const RodSpec& spec, const SimConfig& cfg) {
  const double r_pellet_m =
      (spec.rod_outer_diameter_mm / 2.0 - spec.clad_thickness_mm) * 1e-3 -
      spec.gap_thickness_um / 2.0 * 1e-6;
  if (!(r_pellet_m > 0.0)) throw std::invalid_argument("heavy_metal_mtu_per_m: no fuel radius left");
  const double area_m2 = kPi * r_pellet_m * r_pellet_m;
  const double rho_kg_m3 = cfg.fuel_td_g_cm3 * cfg.fuel_density_frac_td * 1000.0;
  return area_m2 * rho_kg_m3 * cfg.heavy_metal_fraction * 1e-3;  // kg -> MTU
}

namespace {

double interp_clamped(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

}  // namespace

RodTrace simulate_rod(const RodSpec& spec, const PowerHistory& history, const SimConfig& cfg) {
  spec.validate();
  history.validate();
  cfg.validate();

  const std::size_t n = history.steps();
  const std::vector<double> dt_h = history.step_hours();
  const std::vector<double> maxpf = history.max_pf();

  // fixed geometry
  const double r_mid_mm = spec.rod_outer_diameter_mm / 2.0 - spec.clad_thickness_mm / 2.0;
  const double r_inner_m = (spec.rod_outer_diameter_mm / 2.0 - spec.clad_thickness_mm) * 1e-3;
  const double gap0_um = spec.gap_thickness_um / 2.0;  // radial
  const double shell_ratio = r_mid_mm / spec.clad_thickness_mm;
  const double plenum_volume_m3 = spec.plenum_length_cm * 1e-2 * kPi * r_inner_m * r_inner_m;
  const double hm_mtu_per_m = heavy_metal_mtu_per_m(spec, cfg);
  const double fill_mol = spec.fill_pressure_mpa * 1e6 * plenum_volume_m3 /
                          (kGasConstant * cfg.fill_temperature_k);
  const double modulus_mpa = cfg.clad_elastic_modulus_gpa * 1000.0;

  // IFBA helium release fraction per step: linear in at-power time over cycle 1
  std::vector<double> he_fraction(n, spec.is_ifba ? 1.0 : 0.0);
  if (spec.is_ifba) {
    const std::size_t c1_end = history.cycle_starts.size() > 1 ? history.cycle_starts[1] : n;
    double c1_power_hours = 0.0;
    for (std::size_t i = 0; i < c1_end; ++i)
      if (history.lhgr_kw_m[i] > 0.0) c1_power_hours += dt_h[i];
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < c1_end && history.lhgr_kw_m[i] > 0.0) acc += dt_h[i];
      he_fraction[i] = c1_power_hours > 0.0 ? std::min(1.0, acc / c1_power_hours)
                                            : (i >= c1_end ? 1.0 : 0.0);
    }
  }

  RodTrace tr;
  tr.times_h = history.times_h;
  tr.cycle_starts = history.cycle_starts;
  tr.alloy = spec.alloy;
  tr.fuel_temperature_k.resize(n);
  tr.plenum_pressure_mpa.resize(n);
  tr.oxide_um.resize(n);
  tr.hydrogen_ppm.resize(n);
  tr.hoop_stress_mpa.resize(n);
  tr.hoop_strain.resize(n);
  tr.burnup_mwd_mtu.resize(n);
  tr.gap_um.resize(n);

  double burnup = 0.0;        // MWd/MTU
  double oxide = 0.0;         // um
  double released_mol = 0.0;  // cumulative fission gas in the free volume
  const double t_cool = cfg.coolant_temperature_k;

  for (std::size_t i = 0; i < n; ++i) {
    const double q = history.lhgr_kw_m[i] * maxpf[i];  // limiting-node linear power

    // rod-average burnup, trapezoidal in the core-average LHGR
    if (i > 0) {
      const double mwd_per_m =
          0.5 * (history.lhgr_kw_m[i - 1] + history.lhgr_kw_m[i]) * 1e-3 * dt_h[i] / 24.0;
      burnup += mwd_per_m / hm_mtu_per_m;
    }

    const double produced_mol = cfg.fgr_yield_mol_per_mwd * burnup;
    const double he_mol = spec.is_ifba ? cfg.ifba_helium_mol * he_fraction[i] : 0.0;
    const double perm_closure_um =
        (cfg.fuel_swelling_um_per_mwd + cfg.clad_creep_down_um_per_mwd) * burnup;

    // fuel temperature <-> gap conductance <-> gas release fixed point
    double t_fuel = t_cool + q * (cfg.film_resistance + cfg.clad_resistance + cfg.fuel_resistance);
    double released_new = released_mol;
    double gap_signed = gap0_um;
    for (int iter = 0; iter < 200; ++iter) {
      gap_signed = gap0_um - cfg.thermal_expansion_um_per_k * (t_fuel - t_cool) - perm_closure_um;
      const double gap_open = std::max(0.0, gap_signed);
      const double n_total = fill_mol + he_mol + released_new;
      const double x_fg = n_total > 0.0 ? released_new / n_total : 0.0;
      const double t_gas = 0.5 * (t_fuel + t_cool);
      const double k_rel = ((1.0 - x_fg) + x_fg * cfg.fission_gas_conductivity_rel) *
                           std::pow(t_gas / 565.7, cfg.gas_conductivity_temp_exp);
      const double r_gap = gap_open * cfg.gap_resistance_per_um / k_rel + cfg.contact_resistance;
      const double t_new =
          t_cool + q * (cfg.film_resistance + cfg.clad_resistance + r_gap + cfg.fuel_resistance);
      const double frac = interp_clamped(cfg.fgr_temperature_k, cfg.fgr_fraction, t_new);
      released_new = std::max(released_mol, frac * produced_mol);
      if (std::abs(t_new - t_fuel) < 1e-9) {
        t_fuel = t_new;
        break;
      }
      t_fuel = t_fuel + 0.7 * (t_new - t_fuel);
    }
    released_mol = released_new;

    // corrosion at the clad outer surface (explicit in dt)
    if (i > 0 && dt_h[i] > 0.0) {
      const double t_ox = t_cool + q * cfg.film_resistance;
      oxide += cfg.oxide_prefactor_um_per_day *
               std::exp(-cfg.oxide_activation_temperature_k / t_ox) * dt_h[i] / 24.0;
    }

    const double n_total = fill_mol + he_mol + released_mol;
    const double t_plenum = t_cool + cfg.plenum_temp_rise_k_per_kw_m * q;
    const double p_plenum = n_total * kGasConstant * t_plenum / plenum_volume_m3 * 1e-6;  // MPa

    const double interference_um = std::max(0.0, -gap_signed);
    const double sigma =
        (p_plenum - cfg.coolant_pressure_mpa) * shell_ratio +
        cfg.contact_stiffness_mpa_per_um * interference_um;
    // clad mid-wall displacement: inward creep until contact, then the pellet
    // surface dictates the position (continuous across closure)
    const double creep_disp_um = cfg.clad_creep_down_um_per_mwd * burnup;
    const double strain =
        sigma / modulus_mpa + (interference_um - creep_disp_um) / (r_mid_mm * 1000.0);

    tr.fuel_temperature_k[i] = t_fuel;
    tr.plenum_pressure_mpa[i] = p_plenum;
    tr.oxide_um[i] = oxide;
    tr.hydrogen_ppm[i] = cfg.hydrogen_pickup_fraction * cfg.hydrogen_per_oxide_ppm_per_um * oxide;
    tr.hoop_stress_mpa[i] = sigma;
    tr.hoop_strain[i] = strain;
    tr.burnup_mwd_mtu[i] = burnup;
    tr.gap_um[i] = std::max(0.0, gap_signed);
  }
  return tr;
}

QoiVector extract_qois_prefix(const RodTrace& trace, std::size_t count,
                              const PciRiskEngine& engine) {
  if (count == 0 || trace.steps() == 0)
    throw std::invalid_argument("extract_qois: empty trace");
  count = std::min(count, trace.steps());

  auto running_max = [count](const std::vector<double>& v) {
    double m = v[0];
    for (std::size_t i = 1; i < count; ++i) m = std::max(m, v[i]);
    return m;
  };

  QoiVector q;
  q.set(QoiId::kMaxFuelTemperature, running_max(trace.fuel_temperature_k));
  q.set(QoiId::kMaxPlenumPressure, running_max(trace.plenum_pressure_mpa));
  q.set(QoiId::kMaxOxideThickness, running_max(trace.oxide_um));
  q.set(QoiId::kMaxHydrogen, running_max(trace.hydrogen_ppm));
  q.set(QoiId::kMaxHoopStress, running_max(trace.hoop_stress_mpa));
  q.set(QoiId::kMaxHoopStrain, running_max(trace.hoop_strain));

  std::vector<double> sigma(trace.hoop_stress_mpa.begin(), trace.hoop_stress_mpa.begin() + count);
  std::vector<double> bu(trace.burnup_mwd_mtu.begin(), trace.burnup_mwd_mtu.begin() + count);
  std::vector<double> dt_s = trace.step_hours();
  dt_s.resize(count);
  for (double& d : dt_s) d *= 3600.0;
  std::vector<std::size_t> cycles;
  for (std::size_t s : trace.cycle_starts)
    if (s < count) cycles.push_back(s);
  PciRiskResult r = engine.assess(sigma, bu, dt_s, cycles, trace.alloy);
  q.set(QoiId::kSccFailureProbability, r.risk_scc);
  q.set(QoiId::kMpsFailureProbability, r.risk_mps);
  return q;
}

QoiVector extract_qois(const RodTrace& trace, const PciRiskEngine& engine) {
  return extract_qois_prefix(trace, trace.steps(), engine);
}

}  // namespace fuelsurr
