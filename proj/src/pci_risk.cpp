#include "fuelsurr/pci_risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fuelsurr/csv.hpp"

namespace fuelsurr {

void YieldTable::validate() const {
  if (temperature_k.size() != yield_mpa.size() || temperature_k.size() < 2)
    throw std::invalid_argument("YieldTable: need >= 2 aligned knots");
  for (std::size_t i = 0; i < temperature_k.size(); ++i) {
    if (i > 0 && !(temperature_k[i] > temperature_k[i - 1]))
      throw std::invalid_argument("YieldTable: temperatures must be strictly increasing");
    if (!(yield_mpa[i] > 0.0))
      throw std::invalid_argument("YieldTable: yield stress must be positive");
  }
}

double YieldTable::yield_at(double t_k) const {
  if (t_k < temperature_k.front() || t_k > temperature_k.back())
    throw std::domain_error("YieldTable: temperature " + std::to_string(t_k) +
                            " K outside table range");
  auto it = std::upper_bound(temperature_k.begin(), temperature_k.end(), t_k);
  if (it == temperature_k.end()) return yield_mpa.back();
  std::size_t hi = static_cast<std::size_t>(it - temperature_k.begin());
  if (hi == 0) return yield_mpa.front();
  std::size_t lo = hi - 1;
  const double w = (t_k - temperature_k[lo]) / (temperature_k[hi] - temperature_k[lo]);
  return yield_mpa[lo] + w * (yield_mpa[hi] - yield_mpa[lo]);
}

YieldTable YieldTable::default_table() {
  // Declared stand-in for Zircaloy cladding; replace via CSV for real studies.
  YieldTable t;
  t.temperature_k = {293.0, 400.0, 500.0, 600.0, 700.0, 800.0, 1000.0, 1200.0, 1400.0};
  t.yield_mpa = {620.0, 540.0, 450.0, 380.0, 310.0, 230.0, 110.0, 50.0, 30.0};
  t.validate();
  return t;
}

YieldTable YieldTable::load_csv(const std::string& path) {
  CsvTable csv = read_csv(path);
  const std::size_t jt = csv.col("temperature_k");
  const std::size_t jy = csv.col("yield_stress_mpa");
  YieldTable t;
  for (const auto& row : csv.rows) {
    t.temperature_k.push_back(row[jt]);
    t.yield_mpa.push_back(row[jy]);
  }
  t.validate();
  return t;
}

void YieldTable::save_csv(const std::string& path) const {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < temperature_k.size(); ++i)
    rows.push_back({temperature_k[i], yield_mpa[i]});
  write_csv(path, {"temperature_k", "yield_stress_mpa"}, rows);
}

void CdiCdf::validate() const {
  if (cdi.size() != prob.size() || cdi.size() < 2)
    throw std::invalid_argument("CdiCdf: need >= 2 aligned knots");
  if (prob.front() != 0.0 || prob.back() != 1.0)
    throw std::invalid_argument("CdiCdf: probability must start at 0 and end at 1");
  for (std::size_t i = 0; i < cdi.size(); ++i) {
    if (i > 0 && !(cdi[i] > cdi[i - 1]))
      throw std::invalid_argument("CdiCdf: CDI knots must be strictly increasing");
    if (i > 0 && prob[i] < prob[i - 1])
      throw std::invalid_argument("CdiCdf: probabilities must be non-decreasing");
    if (prob[i] < 0.0 || prob[i] > 1.0)
      throw std::invalid_argument("CdiCdf: probabilities must lie in [0,1]");
  }
}

CdiCdf CdiCdf::default_table() {
  // Declared approximation; the knots are configuration, not physics.
  CdiCdf c;
  c.cdi = {0.0, 1e-3, 1e-2, 0.05, 0.2, 1.0, 5.0, 20.0, 100.0, 1000.0};
  c.prob = {0.0, 0.02, 0.08, 0.18, 0.32, 0.50, 0.68, 0.82, 0.93, 1.0};
  c.validate();
  return c;
}

CdiCdf CdiCdf::load_csv(const std::string& path) {
  CsvTable csv = read_csv(path);
  const std::size_t jc = csv.col("cdi");
  const std::size_t jp = csv.col("probability");
  CdiCdf c;
  for (const auto& row : csv.rows) {
    c.cdi.push_back(row[jc]);
    c.prob.push_back(row[jp]);
  }
  c.validate();
  return c;
}

void CdiCdf::save_csv(const std::string& path) const {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cdi.size(); ++i) rows.push_back({cdi[i], prob[i]});
  write_csv(path, {"cdi", "probability"}, rows);
}

void CdiInputs::validate() const {
  const std::size_t n = hoop_stress_mpa.size();
  if (burnup_mwd_mtu.size() != n || temperature_k.size() != n || dt_s.size() != n)
    throw std::invalid_argument("CdiInputs: series lengths differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(temperature_k[i] > 0.0)) throw std::invalid_argument("CdiInputs: T must be > 0 K");
    if (burnup_mwd_mtu[i] < 0.0) throw std::invalid_argument("CdiInputs: burnup must be >= 0");
    if (dt_s[i] < 0.0) throw std::invalid_argument("CdiInputs: dt must be >= 0");
  }
}

double threshold_stress(double burnup_mwd_mtu, CladAlloy alloy) {
  if (!(burnup_mwd_mtu > 5000.0))
    throw std::domain_error("threshold_stress: inactive below 5000 MWd/MTU");
  const double d = burnup_mwd_mtu - 5000.0;
  return alloy == CladAlloy::kZr2 ? 336.476 * std::pow(d, -0.07262)
                                  : 310.275 * std::pow(d, -0.04400);
}

double time_to_failure(double stress_mpa, double burnup_mwd_mtu, double temperature_k,
                       CladAlloy alloy, const YieldTable& yield) {
  if (!(burnup_mwd_mtu > 5000.0))
    throw std::domain_error("time_to_failure: inactive below 5000 MWd/MTU");
  const double base = 1.13e-4 * burnup_mwd_mtu - 0.13;
  if (base <= 0.0)
    throw std::domain_error("time_to_failure: burnup outside correlation domain");
  const double sigma_y = yield.yield_at(temperature_k);
  const double sigma_ref = threshold_stress(burnup_mwd_mtu, alloy);
  const double t_bar = 5.0e5 * std::pow(base, -0.75) *
                       std::exp(-30.0 * (1.0 - 611.0 / temperature_k));
  return t_bar * std::exp((1.015 * sigma_y + 1.74 * sigma_ref - 2.755 * stress_mpa) * 1e-2);
}

double concentration_factor(double stress_mpa, PciMode mode) {
  const double cf = mode == PciMode::kScc ? -0.0042 * stress_mpa + 2.3773
                                          : -0.0115 * stress_mpa + 4.3099;
  return std::max(1.0, cf);
}

double accumulate_cdi(const CdiInputs& in, const YieldTable& yield, PciMode mode) {
  in.validate();
  const std::size_t n = in.hoop_stress_mpa.size();
  if (n == 0) return 0.0;

  // concentrated stress and (first) peak location
  std::vector<double> conc(n);
  for (std::size_t i = 0; i < n; ++i)
    conc[i] = concentration_factor(in.hoop_stress_mpa[i], mode) * in.hoop_stress_mpa[i];
  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (conc[i] > conc[peak]) peak = i;

  // step i ends at t[i]; accumulation allowed up to t[peak] + 1000 s
  std::vector<double> t_end(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += in.dt_s[i];
    t_end[i] = t;
  }
  const double window_end = t_end[peak] + kPostPeakWindowSeconds;

  double cdi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in.burnup_mwd_mtu[i] > 5000.0)) continue;
    if (conc[i] <= threshold_stress(in.burnup_mwd_mtu[i], in.alloy)) continue;
    const double step_start = t_end[i] - in.dt_s[i];
    const double dur = std::min(t_end[i], window_end) - step_start;
    if (dur <= 0.0) continue;
    cdi += dur / time_to_failure(conc[i], in.burnup_mwd_mtu[i], in.temperature_k[i],
                                 in.alloy, yield);
  }
  return cdi;
}

double failure_risk(double cdi, const CdiCdf& cdf) {
  if (!(cdi >= 0.0)) throw std::invalid_argument("failure_risk: cdi must be >= 0");
  if (cdi <= cdf.cdi.front()) return cdf.prob.front();
  if (cdi >= cdf.cdi.back()) return cdf.prob.back();
  auto it = std::upper_bound(cdf.cdi.begin(), cdf.cdi.end(), cdi);
  std::size_t hi = static_cast<std::size_t>(it - cdf.cdi.begin());
  std::size_t lo = hi - 1;
  if (cdi == cdf.cdi[lo]) return cdf.prob[lo];
  const double w = (cdi - cdf.cdi[lo]) / (cdf.cdi[hi] - cdf.cdi[lo]);
  return cdf.prob[lo] + w * (cdf.prob[hi] - cdf.prob[lo]);
}

PciRiskEngine::PciRiskEngine(YieldTable yield, CdiCdf cdf, double clad_temperature_k)
    : yield_(std::move(yield)), cdf_(std::move(cdf)), clad_temperature_k_(clad_temperature_k) {
  yield_.validate();
  cdf_.validate();
  if (!(clad_temperature_k_ > 0.0))
    throw std::invalid_argument("PciRiskEngine: clad temperature must be > 0 K");
}

PciRiskResult PciRiskEngine::assess(const std::vector<double>& hoop_stress_mpa,
                                    const std::vector<double>& burnup_mwd_mtu,
                                    const std::vector<double>& dt_s,
                                    const std::vector<std::size_t>& cycle_starts,
                                    CladAlloy alloy) const {
  const std::size_t n = hoop_stress_mpa.size();
  if (burnup_mwd_mtu.size() != n || dt_s.size() != n)
    throw std::invalid_argument("PciRiskEngine: series lengths differ");

  // cycle extents: [start_k, start_{k+1}) with an implicit final boundary
  std::vector<std::size_t> bounds = cycle_starts;
  if (bounds.empty() || bounds.front() != 0) bounds.insert(bounds.begin(), 0);
  bounds.push_back(n);

  PciRiskResult r;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const std::size_t b = bounds[k], e = std::min(bounds[k + 1], n);
    if (b >= e) continue;
    CdiInputs in;
    in.alloy = alloy;
    in.hoop_stress_mpa.assign(hoop_stress_mpa.begin() + b, hoop_stress_mpa.begin() + e);
    in.burnup_mwd_mtu.assign(burnup_mwd_mtu.begin() + b, burnup_mwd_mtu.begin() + e);
    in.dt_s.assign(dt_s.begin() + b, dt_s.begin() + e);
    in.temperature_k.assign(e - b, clad_temperature_k_);
    r.cdi_scc += accumulate_cdi(in, yield_, PciMode::kScc);
    r.cdi_mps += accumulate_cdi(in, yield_, PciMode::kMps);
  }
  r.risk_scc = failure_risk(r.cdi_scc, cdf_);
  r.risk_mps = failure_risk(r.cdi_mps, cdf_);
  return r;
}

}  // namespace fuelsurr
