#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "doctest.h"
#include "fuelsurr/features.hpp"
#include "fuelsurr/rng.hpp"
#include "fuelsurr/rodsim.hpp"

using namespace fuelsurr;

namespace {

PowerHistory constant_history(double lhgr, double days, double dt_h = 24.0, int nodes = 1) {
  PowerHistory h;
  const std::size_t steps = static_cast<std::size_t>(days * 24.0 / dt_h) + 1;
  for (std::size_t i = 0; i < steps; ++i) {
    h.times_h.push_back(static_cast<double>(i) * dt_h);
    h.lhgr_kw_m.push_back(lhgr);
  }
  h.pf_profiles = Matrix(steps, nodes, 1.0);
  h.cycle_starts = {0};
  return h;
}

PowerHistory two_cycle_history(double level1, double level2, double pf) {
  ScheduleTemplate tmpl;
  tmpl.cycle_days = 120.0;  // shortened, still ramp + steady + shutdown
  std::vector<CycleCoeffs> cycles(2);
  cycles[0].lhgr = {level1, 0, 0, 0, 0};
  cycles[0].max_pf = {pf, 0, 0, 0, 0};
  cycles[1].lhgr = {level2, 0, 0, 0, 0};
  cycles[1].max_pf = {pf, 0, 0, 0, 0};
  return build_history_from_coeffs(cycles, tmpl).history;
}

std::size_t closure_step(const RodTrace& tr) {
  for (std::size_t i = 0; i < tr.steps(); ++i)
    if (tr.gap_um[i] == 0.0) return i;
  return tr.steps();
}

}  // namespace

TEST_CASE("startup ramp shape") {
  CHECK(startup_ramp_fraction(0.0) == 0.0);
  CHECK(startup_ramp_fraction(10.0) == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(startup_ramp_fraction(60.0) == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(startup_ramp_fraction(90.0) == doctest::Approx(0.80).epsilon(1e-15));
  CHECK(startup_ramp_fraction(120.0) == doctest::Approx(0.90).epsilon(1e-15));
  CHECK(startup_ramp_fraction(144.0) == 1.0);
  CHECK(startup_ramp_fraction(500.0) == 1.0);

  const PowerSegment seg = make_startup_ramp(19.70, 2.0);
  CHECK(seg.times_h.front() == 0.0);
  CHECK(seg.lhgr_kw_m.front() == 0.0);
  CHECK(seg.times_h.back() == 144.0);  // 10+50+30+20+10+10+14
  CHECK(seg.lhgr_kw_m.back() == doctest::Approx(19.70));
  // t = 10 h sits on the 30% plateau entry
  for (std::size_t i = 0; i < seg.times_h.size(); ++i)
    if (seg.times_h[i] == 10.0) CHECK(seg.lhgr_kw_m[i] == doctest::Approx(0.30 * 19.70));

  CHECK_THROWS_AS(make_startup_ramp(19.70, 12.0), std::invalid_argument);
  CHECK_THROWS_AS(make_startup_ramp(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_startup_ramp(19.70, -1.0), std::invalid_argument);
}

TEST_CASE("zero power fixpoint") {
  const SimConfig cfg;
  const RodSpec spec = default_rod_spec(false);
  PowerHistory h = constant_history(0.0, 30.0);
  const RodTrace tr = simulate_rod(spec, h, cfg);

  for (double t : tr.fuel_temperature_k) CHECK(t == 565.7);
  for (double b : tr.burnup_mwd_mtu) CHECK(b == 0.0);

  // thin shell on the fill-derived pressure
  const double r_mid = 9.50 / 2.0 - 0.5715 / 2.0;
  const double p_fill_hot = 2.41 * 565.7 / 293.0;
  const double expected = (p_fill_hot - 15.51) * r_mid / 0.5715;
  CHECK(tr.hoop_stress_mpa.front() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(tr.hoop_stress_mpa.front() < 0.0);
}

TEST_CASE("burnup integrates the power history") {
  const SimConfig cfg;
  const RodSpec spec = default_rod_spec(false);
  const double days = 200.0;
  const RodTrace tr = simulate_rod(spec, constant_history(19.70, days), cfg);

  // hand integration: q' * T / heavy-metal mass per length
  const double hm = heavy_metal_mtu_per_m(spec, cfg);
  const double expected = 19.70 * 1e-3 * days / hm;
  CHECK(tr.burnup_mwd_mtu.back() == doctest::Approx(expected).epsilon(1e-12));
  // sanity: a PWR-like specific power, so hundreds of days gives GWd/MTU scale
  CHECK(tr.burnup_mwd_mtu.back() > 5000.0);
}

TEST_CASE("ifba helium raises end-of-cycle-1 plenum pressure") {
  SimConfig cfg;
  const PowerHistory h = two_cycle_history(20.0, 18.0, 1.2);
  const RodSpec ifba = default_rod_spec(true);

  const RodTrace with_he = simulate_rod(ifba, h, cfg);
  SimConfig no_he = cfg;
  no_he.ifba_helium_mol = 0.0;
  const RodTrace without = simulate_rod(ifba, h, no_he);

  const std::size_t c1_end = h.cycle_starts[1];
  CHECK(with_he.plenum_pressure_mpa[c1_end - 1] > without.plenum_pressure_mpa[c1_end - 1]);
}

TEST_CASE("determinism: identical inputs give identical traces") {
  const SimConfig cfg;
  const PowerHistory h = two_cycle_history(22.0, 19.0, 1.3);
  const RodSpec spec = default_rod_spec(false);
  const RodTrace a = simulate_rod(spec, h, cfg);
  const RodTrace b = simulate_rod(spec, h, cfg);
  REQUIRE(a.steps() == b.steps());
  for (std::size_t i = 0; i < a.steps(); ++i) {
    CHECK(a.fuel_temperature_k[i] == b.fuel_temperature_k[i]);
    CHECK(a.plenum_pressure_mpa[i] == b.plenum_pressure_mpa[i]);
    CHECK(a.hoop_stress_mpa[i] == b.hoop_stress_mpa[i]);
    CHECK(a.gap_um[i] == b.gap_um[i]);
  }
}

TEST_CASE("monotone accumulation") {
  const SimConfig cfg;
  const PowerHistory h = two_cycle_history(24.0, 17.0, 1.4);
  const RodTrace tr = simulate_rod(default_rod_spec(false), h, cfg);
  for (std::size_t i = 1; i < tr.steps(); ++i) {
    CHECK(tr.burnup_mwd_mtu[i] >= tr.burnup_mwd_mtu[i - 1]);
    CHECK(tr.oxide_um[i] >= tr.oxide_um[i - 1]);
    CHECK(tr.hydrogen_ppm[i] >= tr.hydrogen_ppm[i - 1]);
    CHECK(tr.gap_um[i] >= 0.0);
  }
}

TEST_CASE("ifba rods close the gap no earlier") {
  const SimConfig cfg;
  for (double level : {18.0, 22.0, 26.0}) {
    ScheduleTemplate tmpl;
    tmpl.cycle_days = 500.0;
    std::vector<CycleCoeffs> cycles(2);
    cycles[0].lhgr = {level, 0, 0, 0, 0};
    cycles[0].max_pf = {1.35, 0, 0, 0, 0};
    cycles[1].lhgr = {level * 0.9, 0, 0, 0, 0};
    cycles[1].max_pf = {1.35, 0, 0, 0, 0};
    const PowerHistory h = build_history_from_coeffs(cycles, tmpl).history;
    const RodTrace ifba = simulate_rod(default_rod_spec(true), h, cfg);
    const RodTrace standard = simulate_rod(default_rod_spec(false), h, cfg);
    CHECK(closure_step(ifba) >= closure_step(standard));
  }
}

TEST_CASE("doubling power raises fuel temperature before contact") {
  const SimConfig cfg;
  const RodSpec spec = default_rod_spec(false);
  for (double q : {4.0, 8.0, 12.0}) {
    const RodTrace low = simulate_rod(spec, constant_history(q, 10.0), cfg);
    const RodTrace high = simulate_rod(spec, constant_history(2.0 * q, 10.0), cfg);
    REQUIRE(low.gap_um[2] > 0.0);  // pre-contact regime
    CHECK(high.fuel_temperature_k[2] > low.fuel_temperature_k[2]);
  }
}

TEST_CASE("history validation errors") {
  const SimConfig cfg;
  const RodSpec spec = default_rod_spec(false);
  PowerHistory h = constant_history(10.0, 5.0);

  SUBCASE("non-monotone times") {
    h.times_h[2] = h.times_h[1];
    CHECK_THROWS_AS(simulate_rod(spec, h, cfg), std::invalid_argument);
  }
  SUBCASE("negative power") {
    h.lhgr_kw_m[3] = -1.0;
    CHECK_THROWS_AS(simulate_rod(spec, h, cfg), std::invalid_argument);
  }
  SUBCASE("pf profile off unity") {
    h.pf_profiles(1, 0) = 2.0;
    CHECK_THROWS_AS(simulate_rod(spec, h, cfg), std::invalid_argument);
  }
}

TEST_CASE("qoi extraction") {
  const PciRiskEngine engine;

  SUBCASE("constant trace returns the constants") {
    RodTrace tr;
    tr.alloy = CladAlloy::kZr4;
    tr.cycle_starts = {0};
    for (int i = 0; i < 4; ++i) {
      tr.times_h.push_back(i * 24.0);
      tr.fuel_temperature_k.push_back(900.0);
      tr.plenum_pressure_mpa.push_back(6.5);
      tr.oxide_um.push_back(12.0);
      tr.hydrogen_ppm.push_back(140.0);
      tr.hoop_stress_mpa.push_back(-50.0);
      tr.hoop_strain.push_back(-6e-4);
      tr.burnup_mwd_mtu.push_back(3000.0);
      tr.gap_um.push_back(10.0);
    }
    const QoiVector q = extract_qois(tr, engine);
    CHECK(q.get(QoiId::kMaxFuelTemperature) == 900.0);
    CHECK(q.get(QoiId::kMaxPlenumPressure) == 6.5);
    CHECK(q.get(QoiId::kMaxOxideThickness) == 12.0);
    CHECK(q.get(QoiId::kMaxHydrogen) == 140.0);
    CHECK(q.get(QoiId::kMaxHoopStress) == -50.0);
    CHECK(q.get(QoiId::kMaxHoopStrain) == -6e-4);
    // burnup below 5000 MWd/MTU keeps the damage model inactive
    CHECK(q.get(QoiId::kSccFailureProbability) == 0.0);
    CHECK(q.get(QoiId::kMpsFailureProbability) == 0.0);
  }

  SUBCASE("hand-built trace maxima match a brute scan") {
    RodTrace tr;
    tr.alloy = CladAlloy::kZr4;
    tr.cycle_starts = {0};
    tr.times_h = {0.0, 24.0, 48.0};
    tr.fuel_temperature_k = {900.0, 1100.0, 1000.0};
    tr.plenum_pressure_mpa = {5.0, 7.0, 6.0};
    tr.oxide_um = {1.0, 2.0, 3.0};
    tr.hydrogen_ppm = {10.0, 20.0, 30.0};
    tr.hoop_stress_mpa = {-80.0, -20.0, -45.0};
    tr.hoop_strain = {-1e-3, -2e-4, -5e-4};
    tr.burnup_mwd_mtu = {0.0, 2000.0, 4000.0};
    tr.gap_um = {30.0, 20.0, 10.0};
    const QoiVector q = extract_qois(tr, engine);

    auto brute_max = [](const std::vector<double>& v) {
      double m = v[0];
      for (double x : v) m = std::max(m, x);
      return m;
    };
    CHECK(q.get(QoiId::kMaxFuelTemperature) == brute_max(tr.fuel_temperature_k));
    CHECK(q.get(QoiId::kMaxPlenumPressure) == brute_max(tr.plenum_pressure_mpa));
    CHECK(q.get(QoiId::kMaxOxideThickness) == brute_max(tr.oxide_um));
    CHECK(q.get(QoiId::kMaxHydrogen) == brute_max(tr.hydrogen_ppm));
    CHECK(q.get(QoiId::kMaxHoopStress) == brute_max(tr.hoop_stress_mpa));
    CHECK(q.get(QoiId::kMaxHoopStrain) == brute_max(tr.hoop_strain));
  }

  SUBCASE("empty trace rejected") {
    RodTrace tr;
    CHECK_THROWS_AS(extract_qois(tr, engine), std::invalid_argument);
  }
}

TEST_CASE("history csv and json round trips") {
  const PowerHistory h = two_cycle_history(21.0, 18.5, 1.25);

  SUBCASE("json is lossless") {
    const PowerHistory back = history_from_json(history_to_json(h));
    REQUIRE(back.steps() == h.steps());
    CHECK(back.cycle_starts == h.cycle_starts);
    for (std::size_t i = 0; i < h.steps(); ++i) {
      CHECK(back.times_h[i] == h.times_h[i]);
      CHECK(back.lhgr_kw_m[i] == h.lhgr_kw_m[i]);
    }
    CHECK(back.pf_profiles.data() == h.pf_profiles.data());
  }

  SUBCASE("csv round trip re-infers the cycle starts") {
    const std::string path = "test_history_roundtrip.csv";
    write_history_csv(path, h);
    const PowerHistory back = read_history_csv(path);
    REQUIRE(back.steps() == h.steps());
    CHECK(back.cycle_starts == h.cycle_starts);
    for (std::size_t i = 0; i < h.steps(); ++i)
      CHECK(back.lhgr_kw_m[i] == h.lhgr_kw_m[i]);
    std::remove(path.c_str());
  }
}

TEST_CASE("sim config file round trip") {
  SimConfig cfg;
  cfg.fuel_resistance = 27.5;
  cfg.ifba_helium_mol = 0.009;
  const std::string path = "test_simconfig.conf";
  cfg.save(path);
  const SimConfig back = SimConfig::load(path);
  CHECK(back.fuel_resistance == 27.5);
  CHECK(back.ifba_helium_mol == 0.009);
  CHECK(back.coolant_temperature_k == cfg.coolant_temperature_k);
  CHECK(back.fgr_fraction == cfg.fgr_fraction);
  std::remove(path.c_str());
}

TEST_CASE("rod spec defaults and validation") {
  CHECK(default_rod_spec(true).fill_pressure_mpa == 0.7);
  CHECK(default_rod_spec(false).fill_pressure_mpa == 2.41);
  RodSpec bad = default_rod_spec(false);
  bad.gap_thickness_um = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = default_rod_spec(false);
  bad.fill_pressure_mpa = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
