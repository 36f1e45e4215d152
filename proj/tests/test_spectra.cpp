#include <cmath>
#include <sstream>

#include "nanotrap/dynamics.hpp"
#include "nanotrap/random.hpp"
#include "nanotrap/spectra.hpp"
#include "support.hpp"

using namespace nanotrap;

namespace {

SpectrumModel nominal() { return {1.0, 0.9, 39.82e6, -38.55e6, 8.3e6}; }

std::vector<double> grid() { return linear_grid(-80e6, 80e6, 161); }

SpectrumData noiseless(const SpectrumModel& m, double ref) {
  SpectrumData d;
  for (double x : grid()) {
    const auto r = static_cast<std::int64_t>(ref);
    d.points.push_back({x, std::llround(ref * transmission(m, x)), r});
  }
  return d;
}

}  // namespace

TEST_CASE("transmission model") {
  const SpectrumModel empty{0, 0, 1e6, -1e6, 5e6};
  for (double x : {-3e7, 0.0, 2e7}) CHECK(transmission(empty, x) == 1.0);
  SpectrumModel m{1.0, 1.0, 39.82e6, -38.55e6, 8.3e6};
  const double d = 78.37e6 / 8.3e6;
  CHECK(transmission(m, 39.82e6) == doctest::Approx(std::exp(-1.0 - 1.0 / (1.0 + 4.0 * d * d))).epsilon(1e-3));
  CHECK(transmission(m, 39.82e6) == doctest::Approx(std::exp(-1.0028)).epsilon(1e-4));
  const double mid = 0.5 * (m.delta_plus + m.delta_minus);
  for (double x : {1e6, 7e6, 40e6}) CHECK(transmission(m, mid + x) == doctest::Approx(transmission(m, mid - x)).epsilon(1e-14));
  // additivity in -ln T
  for (double x : {-50e6, 3e6, 41e6}) {
    const SpectrumModel p{m.od_plus, 0, m.delta_plus, m.delta_minus, m.gamma};
    const SpectrumModel q{0, m.od_minus, m.delta_plus, m.delta_minus, m.gamma};
    CHECK(-std::log(transmission(m, x)) == doctest::Approx(-std::log(transmission(p, x)) - std::log(transmission(q, x))).epsilon(1e-14));
    CHECK(transmission(m, x) > 0.0);
    CHECK(transmission(m, x) <= 1.0);
  }
  CHECK(test::raises(Errc::domain, [] { SpectrumModel{-1, 0, 0, 0, 1}.validate(); }));
  CHECK(test::raises(Errc::domain, [] { SpectrumModel{1, 0, 0, 0, 0}.validate(); }));
}

TEST_CASE("counter-based generator") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(42, 50);
  CounterRng d(42);
  for (int i = 0; i < 50; ++i) d.next_u64();
  CHECK(c.next_u64() == d.next_u64());
  // first outputs of SplitMix64 seeded with 0 (published reference sequence)
  CounterRng z(0);
  CHECK(z.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(z.next_u64() == 0x6e789e6aa1b965f4ULL);
  // Poisson moments on both branches
  for (double mean : {3.0, 250.0}) {
    CounterRng r(7);
    double s = 0, s2 = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(r.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n, v = s2 / n - m * m;
    CHECK(std::abs(m - mean) < 5 * std::sqrt(mean / n));
    CHECK(v == doctest::Approx(mean).epsilon(0.05));
  }
  CounterRng u(9);
  double s = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = u.uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    s += x;
  }
  CHECK(s / 20000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("simulate_spectrum") {
  const SpectrumData a = simulate_spectrum(nominal(), grid(), 1e4, 11);
  const SpectrumData b = simulate_spectrum(nominal(), grid(), 1e4, 11);
  std::ostringstream sa, sb;
  write_spectrum_csv(sa, a);
  write_spectrum_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK_NOTHROW(a.validate());
  // T = 1: means agree
  const SpectrumData flat = simulate_spectrum({0, 0, 1e6, -1e6, 5e6}, grid(), 1e4, 3);
  double sum = 0, ref = 0;
  for (const SpectrumPoint& p : flat.points) {
    sum += double(p.counts);
    ref += double(p.reference_counts);
  }
  const double n = double(flat.points.size());
  CHECK(std::abs(sum - ref) / n < 5.0 * std::sqrt(2e4) / std::sqrt(n));
  CHECK(test::raises(Errc::domain, [] { simulate_spectrum(nominal(), grid(), 0.0, 1); }));
}

TEST_CASE("spectrum csv round trip") {
  const SpectrumData a = simulate_spectrum(nominal(), grid(), 1e4, 5);
  std::ostringstream out;
  out << "# comment line\n";
  write_spectrum_csv(out, a);
  std::istringstream in(out.str());
  const SpectrumData b = read_spectrum_csv(in);
  REQUIRE(b.points.size() == a.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(b.points[i].detuning == a.points[i].detuning);
    CHECK(b.points[i].counts == a.points[i].counts);
  }
  std::istringstream bad("x,y\n1,2\n");
  CHECK(test::raises(Errc::config, [&] { read_spectrum_csv(bad); }));
}

TEST_CASE("fit_transmission on noise-free data") {
  const SpectrumModel truth = nominal();
  const SpectrumData d = noiseless(truth, 1e12);
  SpectrumModel start = truth;
  start.od_plus *= 1.15;
  start.delta_minus *= 0.9;
  start.gamma *= 1.2;
  const ParameterFit fit = fit_transmission(d, start);
  CHECK(fit.value("OD_plus") == doctest::Approx(truth.od_plus).epsilon(1e-6));
  CHECK(fit.value("OD_minus") == doctest::Approx(truth.od_minus).epsilon(1e-6));
  CHECK(fit.value("delta_plus_Hz") == doctest::Approx(truth.delta_plus).epsilon(1e-6));
  CHECK(fit.value("delta_minus_Hz") == doctest::Approx(truth.delta_minus).epsilon(1e-6));
  CHECK(fit.value("gamma_Hz") == doctest::Approx(truth.gamma).epsilon(1e-6));
  // swapped starting lines come back ordered
  SpectrumModel swapped = truth;
  std::swap(swapped.delta_plus, swapped.delta_minus);
  std::swap(swapped.od_plus, swapped.od_minus);
  const ParameterFit f2 = fit_transmission(d, swapped);
  CHECK(f2.value("delta_plus_Hz") > f2.value("delta_minus_Hz"));
  CHECK(f2.value("OD_plus") == doctest::Approx(truth.od_plus).epsilon(1e-6));
}

TEST_CASE("fit_transmission preconditions") {
  SpectrumData few = noiseless(nominal(), 1e4);
  few.points.resize(20);
  CHECK_THROWS_AS(fit_transmission(few, nominal()), Error);
  // zero counts are regularised, not fatal
  SpectrumModel deep = nominal();
  deep.od_plus = 12.0;
  CHECK_NOTHROW(fit_transmission(simulate_spectrum(deep, grid(), 100, 4), deep));
  const auto od = observed_optical_depth(noiseless(deep, 100));
  CHECK(std::isfinite(od.front().y));
}

TEST_CASE("pull distribution of correct fits") {
  double s = 0, s2 = 0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const SpectrumData d = simulate_spectrum(nominal(), grid(), 1e4, seed);
    const ParameterFit fit = fit_transmission(d, nominal());
    const SpectrumModel m = model_from_fit(fit);
    for (const DataPoint& p : observed_optical_depth(d)) {
      const double pull = (p.y - optical_depth(m, p.x)) * std::sqrt(p.weight);
      s += pull;
      s2 += pull * pull;
      ++n;
    }
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("push-out scenario") {
  SpectrumModel m = nominal();
  m.od_minus = 0.05 * m.od_plus;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const ParameterFit fit = fit_transmission(simulate_spectrum(m, grid(), 1e4, seed), nominal());
    const RatioEstimate r = od_ratio(fit);
    if (r.value + 1.645 * r.sigma < 0.1) ++ok;
  }
  CHECK(ok >= 38);
}

TEST_CASE("mw fits") {
  const std::vector<double> x = linear_grid(-100e3, 100e3, 201);
  const double tau = 40e-6;
  const std::vector<MwLine> two = {{-30.35e3, 0.8}, {30.35e3, 0.8}};
  const auto data = simulate_mw_spectrum(two, tau, x, 0.02, 8);
  const MwFit fit = fit_mw_spectrum(data, tau, {2, false, 0.02});
  CHECK(fit.splitting == doctest::Approx(60.7e3).epsilon(0.9 / 60.7));
  CHECK(fit.splitting_sigma > 0.0);
  CHECK(fit.lines.size() == 2);
  CHECK(fit.lines[0].center < fit.lines[1].center);
  // single line width
  const std::vector<double> xs = linear_grid(-40e3, 40e3, 201);
  const auto one = simulate_mw_spectrum({{1.5e3, 0.9}}, 103e-6, xs, 0.01, 2);
  const MwFit single = fit_mw_spectrum(one, 103e-6, {1, true, 0.01});
  CHECK(single.fwhm == doctest::Approx(7.76e3).epsilon(0.05));
  CHECK(single.lines[0].center == doctest::Approx(1.5e3).epsilon(0.05));
  // degenerate two-component fit
  const auto merged = simulate_mw_spectrum({{0.0, 0.8}}, tau, x, 0.02, 3);
  CHECK(test::raises(Errc::degenerate_fit, [&] { fit_mw_spectrum(merged, tau, {2, false, 0.02}); }));
  // noise-free line shape
  for (double d : {-20e3, 0.0, 11e3})
    CHECK(mw_lineshape({{0.0, 1.0}}, tau, d) == doctest::Approx(rabi_transfer(PulseSpec::pi_pulse(tau, d))).epsilon(1e-14));
}

TEST_CASE("mw csv round trip") {
  const auto data = simulate_mw_spectrum({{0.0, 0.8}}, 40e-6, linear_grid(-5e4, 5e4, 11), 0.02, 1);
  std::ostringstream out;
  write_mw_csv(out, data);
  CHECK(out.str().rfind("delta_Hz,probability\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_mw_csv(in);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(back[i].signal == data[i].signal);
}
