#include "fuelsurr/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fuelsurr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ScheduleTemplate::validate() const {
  if (n_cycles < 1) throw std::invalid_argument("ScheduleTemplate: need >= 1 cycle");
  if (!(cycle_days * 24.0 > kStartupRampHours + 5.0 * steady_dt_h))
    throw std::invalid_argument("ScheduleTemplate: cycle too short for ramp plus fit window");
  if (!(shutdown_days >= 0.0)) throw std::invalid_argument("ScheduleTemplate: negative shutdown");
  if (!(ramp_dt_h > 0.0) || ramp_dt_h > 10.0)
    throw std::invalid_argument("ScheduleTemplate: ramp dt must be in (0, 10] h");
  if (!(steady_dt_h > 0.0)) throw std::invalid_argument("ScheduleTemplate: steady dt must be > 0");
  if (axial_nodes < 1) throw std::invalid_argument("ScheduleTemplate: need >= 1 axial node");
}

std::vector<double> ScheduleTemplate::axial_shape() const {
  std::vector<double> s(axial_nodes);
  double mean = 0.0;
  for (int i = 0; i < axial_nodes; ++i) {
    const double z = (i + 0.5) / axial_nodes;
    s[i] = std::cos(kPi * (z - 0.5) * pf_shape_width);
    mean += s[i];
  }
  mean /= axial_nodes;
  for (double& v : s) v /= mean;
  return s;
}

double poly_eval(const PolyCoeffs& c, double u) {
  return c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * c[4])));
}

std::vector<std::string> feature_names(int n_cycles, bool with_lut) {
  std::vector<std::string> names;
  for (int c = 1; c <= n_cycles; ++c) {
    for (int k = 0; k < 5; ++k)
      names.push_back("c" + std::to_string(c) + "_lhgr_a" + std::to_string(k));
    for (int k = 0; k < 5; ++k)
      names.push_back("c" + std::to_string(c) + "_pf_a" + std::to_string(k));
  }
  names.push_back("rod_type");
  if (with_lut) names.push_back("lut_feat");
  return names;
}

std::vector<double> reduce_pf(const Matrix& pf_profiles) {
  if (pf_profiles.rows() == 0 || pf_profiles.cols() == 0)
    throw std::invalid_argument("reduce_pf: empty profile matrix");
  std::vector<double> out(pf_profiles.rows());
  for (std::size_t i = 0; i < pf_profiles.rows(); ++i) {
    const double* r = pf_profiles.row_ptr(i);
    double m = r[0];
    for (std::size_t j = 1; j < pf_profiles.cols(); ++j) m = std::max(m, r[j]);
    out[i] = m;
  }
  return out;
}

PolyCoeffs fit_cycle_polynomial(const std::vector<double>& series,
                                const std::vector<double>& times_h,
                                std::size_t window_begin, std::size_t window_end) {
  if (series.size() != times_h.size())
    throw std::invalid_argument("fit_cycle_polynomial: series/time length mismatch");
  if (window_end > series.size() || window_begin >= window_end)
    throw std::invalid_argument("fit_cycle_polynomial: bad window");
  const std::size_t n = window_end - window_begin;
  if (n < 5) throw std::invalid_argument("fit_cycle_polynomial: need >= 5 points in window");

  const double t0 = times_h[window_begin];
  const double t1 = times_h[window_end - 1];
  if (!(t1 > t0)) throw std::invalid_argument("fit_cycle_polynomial: degenerate time window");

  // normal equations for the quartic in u = (t - t0)/(t1 - t0)
  Matrix g(5, 5, 0.0);
  std::vector<double> rhs(5, 0.0);
  for (std::size_t i = window_begin; i < window_end; ++i) {
    const double u = (times_h[i] - t0) / (t1 - t0);
    double p[5];
    p[0] = 1.0;
    for (int k = 1; k < 5; ++k) p[k] = p[k - 1] * u;
    for (int a = 0; a < 5; ++a) {
      rhs[a] += p[a] * series[i];
      for (int b = 0; b < 5; ++b) g(a, b) += p[a] * p[b];
    }
  }
  Matrix l = g;
  if (!cholesky_lower(l))
    throw std::invalid_argument("fit_cycle_polynomial: rank-deficient window (duplicate times?)");
  forward_substitute(l, rhs);
  backward_substitute(l, rhs);
  return {rhs[0], rhs[1], rhs[2], rhs[3], rhs[4]};
}

std::vector<std::pair<std::size_t, std::size_t>> steady_windows(const PowerHistory& history,
                                                                double ramp_hours) {
  history.validate();
  const std::size_t n = history.steps();
  std::vector<std::size_t> bounds = history.cycle_starts;
  if (bounds.empty() || bounds.front() != 0) bounds.insert(bounds.begin(), 0);
  bounds.push_back(n);

  std::vector<std::pair<std::size_t, std::size_t>> windows;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const std::size_t b = bounds[k], e = bounds[k + 1];
    const double t_cycle = history.times_h[b];
    std::size_t wb = e, we = b;
    for (std::size_t i = b; i < e; ++i) {
      if (history.lhgr_kw_m[i] <= 0.0) continue;                     // shutdown
      if (history.times_h[i] - t_cycle < ramp_hours - 1e-9) continue;  // startup ramp
      wb = std::min(wb, i);
      we = i + 1;
    }
    if (wb >= we)
      throw std::invalid_argument("steady_windows: cycle " + std::to_string(k + 1) +
                                  " has no steady samples");
    windows.emplace_back(wb, we);
  }
  return windows;
}

FeatureVector pack_features(const std::vector<CycleCoeffs>& cycles, bool ifba,
                            std::optional<double> lut_feature) {
  FeatureVector fv;
  fv.n_cycles = static_cast<int>(cycles.size());
  fv.has_lut_feature = lut_feature.has_value();
  for (const CycleCoeffs& c : cycles) {
    fv.values.insert(fv.values.end(), c.lhgr.begin(), c.lhgr.end());
    fv.values.insert(fv.values.end(), c.max_pf.begin(), c.max_pf.end());
  }
  fv.values.push_back(ifba ? 1.0 : 0.0);
  if (lut_feature) fv.values.push_back(*lut_feature);
  return fv;
}

std::vector<CycleCoeffs> unpack_cycles(const FeatureVector& fv) {
  if (fv.values.size() != FeatureVector::expected_size(fv.n_cycles, fv.has_lut_feature))
    throw std::invalid_argument("FeatureVector: length does not match layout");
  std::vector<CycleCoeffs> cycles(fv.n_cycles);
  std::size_t p = 0;
  for (int c = 0; c < fv.n_cycles; ++c) {
    for (int k = 0; k < 5; ++k) cycles[c].lhgr[k] = fv.values[p++];
    for (int k = 0; k < 5; ++k) cycles[c].max_pf[k] = fv.values[p++];
  }
  return cycles;
}

bool feature_is_ifba(const FeatureVector& fv) {
  const std::size_t idx = static_cast<std::size_t>(10 * fv.n_cycles);
  return fv.values.at(idx) > 0.5;
}

FeatureVector feature_from_row(const std::vector<double>& row, int n_cycles, bool with_lut) {
  FeatureVector fv;
  fv.n_cycles = n_cycles;
  fv.has_lut_feature = with_lut;
  fv.values = row;
  if (fv.values.size() != FeatureVector::expected_size(n_cycles, with_lut))
    throw std::invalid_argument("feature_from_row: row width does not match layout");
  return fv;
}

FeatureVector extract_features(const PowerHistory& history, const RodSpec& spec,
                               FeatureVariant variant, const ScheduleTemplate& tmpl,
                               const Lut2D* hoop_lut, const SimConfig* cfg) {
  const auto windows = steady_windows(history);
  const std::vector<double> maxpf = reduce_pf(history.pf_profiles);

  std::vector<CycleCoeffs> cycles;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    try {
      CycleCoeffs c;
      c.lhgr = fit_cycle_polynomial(history.lhgr_kw_m, history.times_h, windows[k].first,
                                    windows[k].second);
      c.max_pf = fit_cycle_polynomial(maxpf, history.times_h, windows[k].first,
                                      windows[k].second);
      cycles.push_back(c);
    } catch (const std::exception& e) {
      throw std::invalid_argument("extract_features: cycle " + std::to_string(k + 1) + ": " +
                                  e.what());
    }
  }

  std::optional<double> lut_feature;
  if (variant == FeatureVariant::kHoopStress) {
    if (hoop_lut == nullptr || cfg == nullptr)
      throw std::invalid_argument("extract_features: hoop-stress variant needs a LUT and SimConfig");
    lut_feature = lut_predict_rod(*hoop_lut, history, *cfg, spec);
  }
  (void)tmpl;
  return pack_features(cycles, spec.is_ifba, lut_feature);
}

ReconstructionResult build_history_from_coeffs(const std::vector<CycleCoeffs>& cycles,
                                               const ScheduleTemplate& tmpl, double lhgr_cap,
                                               double pf_cap) {
  tmpl.validate();
  if (cycles.empty()) throw std::invalid_argument("build_history: no cycles");

  const std::vector<double> shape = tmpl.axial_shape();
  const double shape_peak = *std::max_element(shape.begin(), shape.end());
  ReconstructionResult out;
  PowerHistory& h = out.history;
  h.pf_profiles = Matrix();

  std::vector<double> lhgr_series, pf_series;  // pf = target peak PF
  std::vector<double> times;
  double t = 0.0;
  const double cycle_hours = tmpl.cycle_days * 24.0;

  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const double t_cycle = t;
    h.cycle_starts.push_back(times.size());

    // startup ramp sampled at ramp_dt, scaled to the cycle's entry power
    const double entry_power = poly_eval(cycles[c].lhgr, 0.0);
    const double entry_pf = poly_eval(cycles[c].max_pf, 0.0);
    for (double tr = 0.0; tr < kStartupRampHours - 1e-9; tr += tmpl.ramp_dt_h) {
      times.push_back(t_cycle + tr);
      lhgr_series.push_back(entry_power * startup_ramp_fraction(tr));
      pf_series.push_back(entry_pf);
    }

    // steady window: quartics in u over [ramp end, cycle end]
    const double w0 = kStartupRampHours, w1 = cycle_hours;
    for (double tw = w0; tw < w1 + 1e-9; tw += tmpl.steady_dt_h) {
      const double u = (tw - w0) / (w1 - w0);
      times.push_back(t_cycle + tw);
      lhgr_series.push_back(poly_eval(cycles[c].lhgr, u));
      pf_series.push_back(poly_eval(cycles[c].max_pf, u));
    }
    t = t_cycle + cycle_hours;

    // inter-cycle shutdown; the sample at its end is the next cycle's ramp start
    if (c + 1 < cycles.size() && tmpl.shutdown_days > 0.0) {
      const double sd_hours = tmpl.shutdown_days * 24.0;
      const double exit_pf = poly_eval(cycles[c].max_pf, 1.0);
      for (double ts = tmpl.steady_dt_h; ts < sd_hours - 1e-9; ts += tmpl.steady_dt_h) {
        times.push_back(t + ts);
        lhgr_series.push_back(0.0);
        pf_series.push_back(exit_pf);
      }
      t += sd_hours;
    }
  }

  // bound checks before clipping
  out.lhgr_min = *std::min_element(lhgr_series.begin(), lhgr_series.end());
  out.lhgr_max = *std::max_element(lhgr_series.begin(), lhgr_series.end());
  out.pf_max = *std::max_element(pf_series.begin(), pf_series.end());
  out.lhgr_below_zero = out.lhgr_min < 0.0;
  out.lhgr_above_cap = out.lhgr_max > lhgr_cap;
  out.pf_above_cap = out.pf_max > pf_cap;

  const std::size_t n = times.size();
  h.times_h = std::move(times);
  h.lhgr_kw_m.resize(n);
  h.pf_profiles = Matrix(n, shape.size());
  for (std::size_t i = 0; i < n; ++i) {
    h.lhgr_kw_m[i] = std::max(0.0, lhgr_series[i]);
    // rescale the template shape about its unit mean so its peak matches the
    // target peak PF; a sub-unity target degenerates to a flat profile
    const double beta = std::max(0.0, (pf_series[i] - 1.0) / (shape_peak - 1.0));
    for (std::size_t j = 0; j < shape.size(); ++j)
      h.pf_profiles(i, j) = 1.0 + (shape[j] - 1.0) * beta;
  }
  h.validate();
  return out;
}

ReconstructionResult reconstruct_history(const FeatureVector& fv, const ScheduleTemplate& tmpl,
                                         double lhgr_cap, double pf_cap) {
  return build_history_from_coeffs(unpack_cycles(fv), tmpl, lhgr_cap, pf_cap);
}

}  // namespace fuelsurr
