#include "fuelsurr/lut.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fuelsurr/csv.hpp"
#include "json.hpp"

namespace fuelsurr {

void Lut2D::validate() const {
  if (lhgr_axis.size() < 2 || burnup_axis.size() < 2)
    throw std::invalid_argument("Lut2D: each axis needs >= 2 knots");
  for (std::size_t i = 1; i < lhgr_axis.size(); ++i)
    if (!(lhgr_axis[i] > lhgr_axis[i - 1]))
      throw std::invalid_argument("Lut2D: lhgr axis must be strictly increasing");
  for (std::size_t j = 1; j < burnup_axis.size(); ++j)
    if (!(burnup_axis[j] > burnup_axis[j - 1]))
      throw std::invalid_argument("Lut2D: burnup axis must be strictly increasing");
  if (values.rows() != lhgr_axis.size() || values.cols() != burnup_axis.size())
    throw std::invalid_argument("Lut2D: value matrix does not match axes");
}

LutPredictMode default_lut_mode(QoiId qoi) {
  switch (qoi) {
    // monotone accumulators and pressure: the end point carries the answer
    case QoiId::kMaxPlenumPressure:
    case QoiId::kMaxOxideThickness:
    case QoiId::kMaxHydrogen:
      return LutPredictMode::kFinalBurnup;
    default:
      return LutPredictMode::kMaxOverTrajectory;
  }
}

std::vector<double> default_lhgr_grid() {
  std::vector<double> g;
  for (double v = 2.0; v <= 30.0 + 1e-9; v += 2.0) g.push_back(v);
  return g;
}

std::vector<double> default_burnup_grid() {
  std::vector<double> g;
  for (double v = 0.0; v <= 75000.0 + 1e-6; v += 2500.0) g.push_back(v);
  return g;
}

Lut2D build_lut(QoiId qoi, const std::vector<double>& lhgr_grid,
                const std::vector<double>& burnup_grid, const RodSpec& spec,
                const SimConfig& cfg, const PciRiskEngine& engine,
                double step_hours, double max_days) {
  Lut2D lut;
  lut.qoi = qoi;
  lut.ifba = spec.is_ifba;
  lut.lhgr_axis = lhgr_grid;
  lut.burnup_axis = burnup_grid;
  lut.values = Matrix(lhgr_grid.size(), burnup_grid.size());
  lut.validate();

  const double hm = heavy_metal_mtu_per_m(spec, cfg);
  const double bu_target = burnup_grid.back();

  for (std::size_t i = 0; i < lhgr_grid.size(); ++i) {
    const double q = lhgr_grid[i];
    if (!(q > 0.0)) throw std::invalid_argument("build_lut: lhgr levels must be > 0");

    // constant-power history long enough to reach the deepest burnup
    const double days_needed = bu_target * hm / (q * 1e-3);
    if (days_needed > max_days)
      throw std::runtime_error("build_lut: burnup " + std::to_string(bu_target) +
                               " MWd/MTU unreachable at " + std::to_string(q) +
                               " kW/m within " + std::to_string(max_days) + " days");
    const std::size_t steps =
        static_cast<std::size_t>(std::ceil(days_needed * 24.0 / step_hours)) + 2;

    PowerHistory h;
    h.times_h.resize(steps);
    h.lhgr_kw_m.assign(steps, q);
    h.pf_profiles = Matrix(steps, 1, 1.0);  // flat profile: node power == lhgr
    h.cycle_starts = {0};
    for (std::size_t s = 0; s < steps; ++s) h.times_h[s] = static_cast<double>(s) * step_hours;

    const RodTrace tr = simulate_rod(spec, h, cfg);

    // first step index at which each burnup grid point is reached
    for (std::size_t j = 0; j < burnup_grid.size(); ++j) {
      auto it = std::lower_bound(tr.burnup_mwd_mtu.begin(), tr.burnup_mwd_mtu.end(),
                                 burnup_grid[j]);
      if (it == tr.burnup_mwd_mtu.end())
        throw std::runtime_error("build_lut: cell (" + std::to_string(q) + " kW/m, " +
                                 std::to_string(burnup_grid[j]) + " MWd/MTU) not reached");
      const std::size_t cut = static_cast<std::size_t>(it - tr.burnup_mwd_mtu.begin()) + 1;
      lut.values(i, j) = extract_qois_prefix(tr, cut, engine).get(qoi);
    }
  }
  return lut;
}

namespace {

// index of the cell [axis[k], axis[k+1]] containing x, with clamping
std::size_t bracket(const std::vector<double>& axis, double x, bool& clamped) {
  if (x <= axis.front()) {
    clamped = clamped || x < axis.front();
    return 0;
  }
  if (x >= axis.back()) {
    clamped = clamped || x > axis.back();
    return axis.size() - 2;
  }
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  return static_cast<std::size_t>(it - axis.begin()) - 1;
}

}  // namespace

LutQuery lut_query(const Lut2D& lut, double lhgr, double burnup) {
  if (std::isnan(lhgr) || std::isnan(burnup))
    throw std::invalid_argument("lut_query: NaN coordinate");
  LutQuery out;
  const std::size_t i = bracket(lut.lhgr_axis, lhgr, out.clamped);
  const std::size_t j = bracket(lut.burnup_axis, burnup, out.clamped);
  const double x = std::clamp(lhgr, lut.lhgr_axis.front(), lut.lhgr_axis.back());
  const double y = std::clamp(burnup, lut.burnup_axis.front(), lut.burnup_axis.back());
  const double tx = (x - lut.lhgr_axis[i]) / (lut.lhgr_axis[i + 1] - lut.lhgr_axis[i]);
  const double ty = (y - lut.burnup_axis[j]) / (lut.burnup_axis[j + 1] - lut.burnup_axis[j]);
  out.value = (1.0 - tx) * (1.0 - ty) * lut.values(i, j) +
              tx * (1.0 - ty) * lut.values(i + 1, j) +
              (1.0 - tx) * ty * lut.values(i, j + 1) +
              tx * ty * lut.values(i + 1, j + 1);
  return out;
}

double lut_predict_rod(const Lut2D& lut, const PowerHistory& history, const SimConfig& cfg,
                       const RodSpec& spec, LutPredictMode mode) {
  history.validate();
  const std::vector<double> maxpf = history.max_pf();
  const double hm = heavy_metal_mtu_per_m(spec, cfg);

  // shutdown states are not operating points of the table; skip them unless
  // the whole history is at zero power (then clamp to the low-power boundary)
  bool any_power = false;
  for (double l : history.lhgr_kw_m)
    if (l > 0.0) {
      any_power = true;
      break;
    }

  double burnup = 0.0;
  double best = 0.0;
  double last = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < history.steps(); ++i) {
    if (i > 0) {
      const double dt_h = history.times_h[i] - history.times_h[i - 1];
      burnup += 0.5 * (history.lhgr_kw_m[i - 1] + history.lhgr_kw_m[i]) * 1e-3 * dt_h / 24.0 / hm;
    }
    if (any_power && history.lhgr_kw_m[i] == 0.0) continue;
    const double v = lut_query(lut, history.lhgr_kw_m[i] * maxpf[i], burnup).value;
    last = v;
    if (first || v > best) best = v;
    first = false;
  }
  return mode == LutPredictMode::kFinalBurnup ? last : best;
}

double lut_predict_rod(const Lut2D& lut, const PowerHistory& history, const SimConfig& cfg,
                       const RodSpec& spec) {
  return lut_predict_rod(lut, history, cfg, spec, default_lut_mode(lut.qoi));
}

void save_lut_csv(const std::string& path, const Lut2D& lut) {
  // header: burnup axis; first column: lhgr axis
  std::vector<std::string> header = {"lhgr_kw_m"};
  for (double b : lut.burnup_axis) header.push_back("bu_" + format_double(b));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < lut.lhgr_axis.size(); ++i) {
    std::vector<double> row = {lut.lhgr_axis[i]};
    for (std::size_t j = 0; j < lut.burnup_axis.size(); ++j) row.push_back(lut.values(i, j));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

Lut2D load_lut_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  Lut2D lut;
  if (t.header.empty() || t.header.front() != "lhgr_kw_m")
    throw std::runtime_error("lut csv: first column must be lhgr_kw_m");
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    if (t.header[j].rfind("bu_", 0) != 0)
      throw std::runtime_error("lut csv: bad burnup column '" + t.header[j] + "'");
    lut.burnup_axis.push_back(std::stod(t.header[j].substr(3)));
  }
  lut.values = Matrix(t.rows.size(), lut.burnup_axis.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    lut.lhgr_axis.push_back(t.rows[i][0]);
    for (std::size_t j = 0; j < lut.burnup_axis.size(); ++j)
      lut.values(i, j) = t.rows[i][j + 1];
  }
  lut.validate();
  return lut;
}

std::string lut_manifest_json(const Lut2D& lut, std::uint64_t seed) {
  nlohmann::json j;
  j["qoi"] = qoi_name(lut.qoi);
  j["rod_type"] = lut.ifba ? "ifba" : "standard";
  j["lhgr_levels"] = lut.lhgr_axis.size();
  j["burnup_levels"] = lut.burnup_axis.size();
  j["lhgr_range_kw_m"] = {lut.lhgr_axis.front(), lut.lhgr_axis.back()};
  j["burnup_range_mwd_mtu"] = {lut.burnup_axis.front(), lut.burnup_axis.back()};
  j["build_seed"] = seed;
  return j.dump(2);
}

}  // namespace fuelsurr
