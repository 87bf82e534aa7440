#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fuelsurr/pci_risk.hpp"
#include "fuelsurr/rng.hpp"

using namespace fuelsurr;

namespace {

YieldTable flat_yield(double mpa) {
  YieldTable t;
  t.temperature_k = {300.0, 1500.0};
  t.yield_mpa = {mpa, mpa};
  return t;
}

CdiInputs constant_inputs(double stress, double bu, double temp, double dt_s, std::size_t n,
                          CladAlloy alloy = CladAlloy::kZr4) {
  CdiInputs in;
  in.hoop_stress_mpa.assign(n, stress);
  in.burnup_mwd_mtu.assign(n, bu);
  in.temperature_k.assign(n, temp);
  in.dt_s.assign(n, dt_s);
  in.alloy = alloy;
  return in;
}

}  // namespace

TEST_CASE("threshold stress matches the correlation") {
  // unit base: (Bu - 5000) = 1
  CHECK(threshold_stress(5001.0, CladAlloy::kZr4) == doctest::Approx(310.275).epsilon(1e-12));
  CHECK(threshold_stress(5001.0, CladAlloy::kZr2) == doctest::Approx(336.476).epsilon(1e-12));

  // brute evaluation of the power law
  const double zr4 = 310.275 * std::pow(5000.0, -0.04400);
  const double zr2 = 336.476 * std::pow(5000.0, -0.07262);
  CHECK(threshold_stress(10000.0, CladAlloy::kZr4) == doctest::Approx(zr4).epsilon(1e-13));
  CHECK(threshold_stress(10000.0, CladAlloy::kZr2) == doctest::Approx(zr2).epsilon(1e-13));
  CHECK(zr4 == doctest::Approx(213.3).epsilon(1e-3));
  CHECK(zr2 == doctest::Approx(181.3).epsilon(1e-3));

  CHECK_THROWS_AS(threshold_stress(5000.0, CladAlloy::kZr4), std::domain_error);
  CHECK_THROWS_AS(threshold_stress(100.0, CladAlloy::kZr2), std::domain_error);
}

TEST_CASE("time to failure") {
  const YieldTable yield = YieldTable::default_table();

  SUBCASE("temperature exponential cancels at 611 K") {
    const double bu = 20000.0;
    const double sigma = 250.0;
    const double t_f = time_to_failure(sigma, bu, 611.0, CladAlloy::kZr4, yield);
    const double t_bar = 5.0e5 * std::pow(1.13e-4 * bu - 0.13, -0.75);  // exp(0) = 1
    const double bracket = (1.015 * yield.yield_at(611.0) +
                            1.74 * threshold_stress(bu, CladAlloy::kZr4) - 2.755 * sigma) * 1e-2;
    CHECK(t_f == doctest::Approx(t_bar * std::exp(bracket)).epsilon(1e-12));
  }

  SUBCASE("bracket-zero construction recovers t_bar") {
    const double bu = 20000.0;
    const YieldTable flat = flat_yield(300.0);
    const double sref = threshold_stress(bu, CladAlloy::kZr4);
    const double sigma = (1.015 * 300.0 + 1.74 * sref) / 2.755;
    const double t_f = time_to_failure(sigma, bu, 611.0, CladAlloy::kZr4, flat);
    CHECK(t_f == doctest::Approx(5.0e5 * std::pow(2.13, -0.75)).epsilon(1e-9));
  }

  SUBCASE("strictly decreasing in stress") {
    const double a = time_to_failure(200.0, 30000.0, 600.0, CladAlloy::kZr4, yield);
    const double b = time_to_failure(250.0, 30000.0, 600.0, CladAlloy::kZr4, yield);
    CHECK(b < a);
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(time_to_failure(200.0, 4000.0, 600.0, CladAlloy::kZr4, yield),
                    std::domain_error);
    CHECK_THROWS_AS(time_to_failure(200.0, 20000.0, 2000.0, CladAlloy::kZr4, yield),
                    std::domain_error);
  }
}

TEST_CASE("concentration factors") {
  CHECK(concentration_factor(0.0, PciMode::kScc) == doctest::Approx(2.3773).epsilon(1e-15));
  CHECK(concentration_factor(0.0, PciMode::kMps) == doctest::Approx(4.3099).epsilon(1e-15));
  CHECK(concentration_factor(100.0, PciMode::kScc) == doctest::Approx(1.9573).epsilon(1e-12));
  CHECK(concentration_factor(100.0, PciMode::kMps) == doctest::Approx(3.1599).epsilon(1e-12));
  // the linear forms dip below 1 at high stress and get floored
  CHECK(concentration_factor(400.0, PciMode::kScc) == 1.0);
  CHECK(concentration_factor(350.0, PciMode::kMps) == 1.0);
}

TEST_CASE("SCC factor stays below MPS factor up to the crossover") {
  // solve -0.0042 s + 2.3773 = -0.0115 s + 4.3099
  const double crossover = (4.3099 - 2.3773) / (0.0115 - 0.0042);
  CHECK(crossover == doctest::Approx(264.74).epsilon(1e-3));
  for (double s = -50.0; s < crossover - 1e-6; s += 10.0)
    CHECK(concentration_factor(s, PciMode::kScc) < concentration_factor(s, PciMode::kMps));
}

TEST_CASE("cdi accumulation") {
  const YieldTable yield = flat_yield(300.0);

  SUBCASE("inactive below the threshold stress") {
    // concentrated stress stays under sigma_ref at 40 MPa
    CdiInputs in = constant_inputs(40.0, 30000.0, 611.0, 100.0, 5);
    CHECK(accumulate_cdi(in, yield, PciMode::kScc) == 0.0);
  }

  SUBCASE("inactive below 5000 MWd/MTU") {
    CdiInputs in = constant_inputs(400.0, 4000.0, 611.0, 100.0, 5);
    CHECK(accumulate_cdi(in, yield, PciMode::kScc) == 0.0);
    CHECK(accumulate_cdi(in, yield, PciMode::kMps) == 0.0);
  }

  SUBCASE("constant active window matches duration / t_f") {
    const double sigma = 300.0, bu = 30000.0, temp = 611.0;
    CdiInputs in = constant_inputs(sigma, bu, temp, 100.0, 5);  // total 500 s <= cap
    const double cdi = accumulate_cdi(in, yield, PciMode::kScc);

    const double conc = concentration_factor(sigma, PciMode::kScc) * sigma;
    REQUIRE(conc > threshold_stress(bu, CladAlloy::kZr4));
    const double t_f = time_to_failure(conc, bu, temp, CladAlloy::kZr4, yield);
    CHECK(cdi == doctest::Approx(500.0 / t_f).epsilon(1e-9));

    // brute Riemann sum, step by step
    double brute = 0.0;
    for (int i = 0; i < 5; ++i) brute += 100.0 / t_f;
    CHECK(cdi == doctest::Approx(brute).epsilon(1e-12));
  }

  SUBCASE("post-peak accumulation is capped at 1000 s") {
    // plateau at the peak value; extending it must change nothing
    auto plateau = [&](double extra_s) {
      const std::size_t extra_steps = static_cast<std::size_t>(extra_s / 100.0);
      CdiInputs in = constant_inputs(300.0, 30000.0, 611.0, 100.0, 5 + extra_steps);
      return accumulate_cdi(in, yield, PciMode::kMps);
    };
    const double base = plateau(1000.0);
    CHECK(plateau(5000.0) == base);  // exactly zero change

    // the cap admits exactly 1000 s past the first peak sample
    CdiInputs in = constant_inputs(300.0, 30000.0, 611.0, 100.0, 50);
    const double conc = concentration_factor(300.0, PciMode::kMps) * 300.0;
    const double t_f = time_to_failure(conc, 30000.0, 611.0, CladAlloy::kZr4, yield);
    CHECK(accumulate_cdi(in, yield, PciMode::kMps) ==
          doctest::Approx((100.0 + 1000.0) / t_f).epsilon(1e-9));
  }

  SUBCASE("additivity over concatenated pieces when the cap is slack") {
    // piece A peaks at its last step, piece B peaks higher at its last step;
    // the concatenated window then truncates nothing extra
    auto ramp_inputs = [&](double lo, double hi, std::size_t n) {
      CdiInputs in = constant_inputs(0.0, 30000.0, 611.0, 50.0, n);
      for (std::size_t i = 0; i < n; ++i)
        in.hoop_stress_mpa[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
      return in;
    };
    CdiInputs a = ramp_inputs(250.0, 280.0, 6);
    CdiInputs b = ramp_inputs(285.0, 320.0, 6);
    CdiInputs both = a;
    both.hoop_stress_mpa.insert(both.hoop_stress_mpa.end(), b.hoop_stress_mpa.begin(),
                                b.hoop_stress_mpa.end());
    both.burnup_mwd_mtu.insert(both.burnup_mwd_mtu.end(), b.burnup_mwd_mtu.begin(),
                               b.burnup_mwd_mtu.end());
    both.temperature_k.insert(both.temperature_k.end(), b.temperature_k.begin(),
                              b.temperature_k.end());
    both.dt_s.insert(both.dt_s.end(), b.dt_s.begin(), b.dt_s.end());
    const double sum = accumulate_cdi(a, yield, PciMode::kScc) +
                       accumulate_cdi(b, yield, PciMode::kScc);
    CHECK(accumulate_cdi(both, yield, PciMode::kScc) == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("failure risk mapping") {
  const CdiCdf cdf = CdiCdf::default_table();

  CHECK(failure_risk(0.0, cdf) == 0.0);
  CHECK(failure_risk(5000.0, cdf) == 1.0);  // beyond the last knot
  for (std::size_t i = 0; i < cdf.cdi.size(); ++i)
    CHECK(failure_risk(cdf.cdi[i], cdf) == cdf.prob[i]);

  SUBCASE("non-decreasing on a random grid") {
    Rng rng(7);
    std::vector<double> grid;
    for (int i = 0; i < 200; ++i) grid.push_back(rng.uniform(0.0, 1500.0));
    std::sort(grid.begin(), grid.end());
    for (std::size_t i = 1; i < grid.size(); ++i)
      CHECK(failure_risk(grid[i], cdf) >= failure_risk(grid[i - 1], cdf));
  }

  SUBCASE("malformed tables refuse to load") {
    CdiCdf bad;
    bad.cdi = {0.0, 1.0};
    bad.prob = {0.1, 1.0};  // must start at 0
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.cdi = {0.0, 0.0};
    bad.prob = {0.0, 1.0};  // knots must increase
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.cdi = {0.0, 1.0, 2.0};
    bad.prob = {0.0, 0.9, 1.0};
    CHECK_NOTHROW(bad.validate());
    bad.prob = {0.0, 0.9, 0.8};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(failure_risk(-1.0, cdf), std::invalid_argument);
  }
}

TEST_CASE("yield table interpolation") {
  const YieldTable t = YieldTable::default_table();
  CHECK(t.yield_at(t.temperature_k.front()) == t.yield_mpa.front());
  CHECK(t.yield_at(650.0) == doctest::Approx(0.5 * (380.0 + 310.0)));
  CHECK_THROWS_AS(t.yield_at(100.0), std::domain_error);
  CHECK_THROWS_AS(t.yield_at(5000.0), std::domain_error);
}

TEST_CASE("risk engine splits damage windows per cycle") {
  const PciRiskEngine engine(flat_yield(300.0), CdiCdf::default_table(), 611.0);

  // two cycles, each with its own stress peak; per-cycle evaluation sums them
  const std::size_t n = 12;
  std::vector<double> sigma(n, 0.0), bu(n), dt(n, 100.0);
  for (std::size_t i = 0; i < n; ++i) bu[i] = 30000.0;
  sigma[4] = 300.0;   // cycle 1 peak
  sigma[10] = 310.0;  // cycle 2 peak
  const PciRiskResult split = engine.assess(sigma, bu, dt, {0, 6}, CladAlloy::kZr4);

  CdiInputs c1 = constant_inputs(0.0, 30000.0, 611.0, 100.0, 6);
  c1.hoop_stress_mpa[4] = 300.0;
  CdiInputs c2 = constant_inputs(0.0, 30000.0, 611.0, 100.0, 6);
  c2.hoop_stress_mpa[4] = 310.0;
  const double expect = accumulate_cdi(c1, engine.yield(), PciMode::kScc) +
                        accumulate_cdi(c2, engine.yield(), PciMode::kScc);
  CHECK(split.cdi_scc == doctest::Approx(expect).epsilon(1e-12));
  CHECK(split.risk_scc == doctest::Approx(failure_risk(split.cdi_scc, engine.cdf())));
}
