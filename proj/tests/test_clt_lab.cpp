#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergoclt/clt_lab.hpp"
#include "ergoclt/errors.hpp"
#include "ergoclt/gordin.hpp"
#include "oracles.hpp"

using namespace ergoclt;

namespace {

TransitionModel coin() { return build_shift(Matrix::Constant(2, 2, 0.5), Sidedness::OneSided); }

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("pairwise_sum is exact on representable data and order-insensitive") {
  std::vector<double> x(100001, 0.1);
  CHECK(std::abs(pairwise_sum(x) - 10000.1) < 1e-9);
  std::vector<double> y = oracle::normal_plugin(4096);
  const double a = pairwise_sum(y);
  std::reverse(y.begin(), y.end());
  CHECK(std::abs(a - pairwise_sum(y)) < 1e-12);
}

TEST_CASE("simulate_birkhoff examples") {
  const auto model = coin();
  for (double s : simulate_birkhoff(model, CylinderFunction::constant(2, 0.0), 100, 50, 1)) CHECK(s == 0.0);

  const auto r = CylinderFunction::rademacher(0);
  const auto cob = simulate_birkhoff(model, r - koopman(r), 10000, 600, 2);
  CHECK(max_abs(cob) <= 0.02 + 1e-15);

  const auto s = simulate_birkhoff(model, r, 10000, 4000, 3);
  CHECK(std::abs(moment_summary(s).variance - 1.0) < 0.07);
}

TEST_CASE("simulate_birkhoff is deterministic and independent of worker count") {
  const auto model = build_shift(oracle::TwoState{}.matrix(), Sidedness::OneSided);
  const auto f = CylinderFunction::from_values(2, 1, 2, {0.5, -1.0, 2.0, 0.25});
  const auto a = simulate_birkhoff(model, f, 333, 97, 9, 1);
  const auto b = simulate_birkhoff(model, f, 333, 97, 9, 5);
  CHECK(a == b);
  CHECK(a != simulate_birkhoff(model, f, 333, 97, 10, 1));
}

TEST_CASE("simulate_birkhoff matches an orbit-by-orbit evaluation") {
  // Sample j uses stream j of the same seed, so the orbit can be replayed.
  const auto model = build_shift(oracle::TwoState{}.matrix(), Sidedness::OneSided);
  const auto f = CylinderFunction::from_values(2, 1, 2, {0.5, -1.0, 2.0, 0.25});
  const int n = 50;
  const auto s = simulate_birkhoff(model, f, n, 3, 77, 1);
  for (int j = 0; j < 3; ++j) {
    // The orbit starts at the window's first coordinate; stationarity makes
    // the law the same as an orbit from coordinate 0.
    const auto orbit = sample_orbit(model, n + f.length() - 1, 77, static_cast<std::uint64_t>(j)).symbols;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += evaluate(f.shifted(i), Window{f.offset(), orbit});
    CHECK(std::abs(s[static_cast<std::size_t>(j)] - sum / std::sqrt(n)) < 1e-12);
  }
}

TEST_CASE("ks_statistic examples") {
  const auto q = oracle::normal_plugin(1000);
  const auto k = ks_statistic(q, 1.0);
  CHECK(k.distance <= 1.0 / 2000.0 + 1e-12);
  CHECK(k.threshold_5pct == doctest::Approx(1.358 / std::sqrt(1000.0)));

  const std::vector<double> zeros(1000, 0.0);
  CHECK(ks_statistic(zeros, 1.0).distance == doctest::Approx(0.5));

  const auto wide = oracle::normal_plugin(10000, 2.0);
  const auto kw = ks_statistic(wide, 1.0);
  CHECK(kw.distance > kw.threshold_5pct);
  double gap = 0.0;
  for (double x = 0.0; x < 5.0; x += 1e-4)
    gap = std::max(gap, 0.5 * std::erfc(-x / std::sqrt(2.0)) - 0.5 * std::erfc(-x / (2.0 * std::sqrt(2.0))));
  CHECK(std::abs(kw.distance - gap) < 0.005);

  try {
    ks_statistic(q, 1e-9);
    FAIL("expected DegenerateSigma");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSigma);
  }
}

TEST_CASE("cf_diagnostic examples") {
  const auto q = oracle::normal_plugin(10000);
  const auto d = cf_diagnostic(q, 1.0, {1.0});
  CHECK(d[0].second <= 0.01);

  const std::vector<double> zeros(100, 0.0);
  for (auto [t, dev] : cf_diagnostic(zeros, 0.0)) CHECK(dev == 0.0);
  const auto z2 = cf_diagnostic(zeros, 1.0, {2.0});
  CHECK(std::abs(z2[0].second - (std::exp(2.0) - 1.0)) < 1e-12);
}

TEST_CASE("remainder_probability examples") {
  const auto model = build_shift(oracle::TwoState{}.matrix(), Sidedness::OneSided);
  const auto one = CylinderFunction::from_values(2, 0, 1, {1.0, -1.0});
  const auto p = remainder_probability(model, one, one, {901, 2000}, 0.1, 2000, 5);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);

  const auto z = CylinderFunction::constant(2, 0.0);
  for (double v : remainder_probability(model, z, z, {1, 10, 100}, 0.1, 500, 5)) CHECK(v == 0.0);

  const auto f = CylinderFunction::indicator(2, 0, 0) - CylinderFunction::constant(2, model.stationary()(0));
  const auto g = decompose(model, f).g;
  const int m = 4000;
  const auto pr = remainder_probability(model, f, g, {4, 16, 64, 100, 400, 3000, 11000}, 0.05, m, 6);
  for (std::size_t i = 1; i < pr.size(); ++i) CHECK(pr[i] <= pr[i - 1] + 2.0 / std::sqrt(m));
  // |f - g + U^n g| <= |f| + 2|g| < 5.12, below 0.05 sqrt(n) once n > 10500.
  CHECK(sup_norm(f) + 2.0 * sup_norm(g) < 0.05 * std::sqrt(11000.0));
  CHECK(pr.back() == 0.0);

  CHECK_THROWS_AS(remainder_probability(model.with_sidedness(Sidedness::TwoSided), f, g, {10}, 0.1, 10, 1), Error);
}

TEST_CASE("moment_summary examples") {
  const std::vector<double> c(10, 2.5);
  const auto mc = moment_summary(c);
  CHECK(mc.mean == 2.5);
  CHECK(mc.variance == 0.0);

  const auto mq = moment_summary(oracle::normal_plugin(10000));
  CHECK(std::abs(mq.excess_kurtosis) < 0.15);

  std::vector<double> pm(1000);
  for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = i % 2 ? 1.0 : -1.0;
  const auto mp = moment_summary(pm);
  CHECK(std::abs(mp.variance - 1000.0 / 999.0) < 1e-12);
  CHECK(std::abs(mp.excess_kurtosis + 2.0) < 0.01);
}

TEST_CASE("verdict examples") {
  const auto model = coin();
  const auto r = CylinderFunction::rademacher(0);
  std::vector<double> samples;
  const auto ok = verdict(model, r, 1.0, 10000, 4000, 12345, {}, 0, &samples);
  CHECK(ok.verdict == CltVerdict::Consistent);
  CHECK(ok.ks_distance < ok.ks_threshold);
  CHECK(ok.ks_distance >= 0.0);
  CHECK(ok.ks_distance <= 1.0);

  const auto cob = verdict(model, r - koopman(r), 0.0, 10000, 1000, 1);
  CHECK(cob.verdict == CltVerdict::Degenerate);
  CHECK(degenerate_samples_bounded(cob));

  const auto bad = verdict_from_samples(samples, 4.0, 10000);
  CHECK(bad.verdict == CltVerdict::Inconsistent);

  const auto again = verdict(model, r, 1.0, 10000, 4000, 12345);
  CHECK(again.ks_distance == ok.ks_distance);
  CHECK(again.sample_variance == ok.sample_variance);
  CHECK(again.psi_deviation == ok.psi_deviation);
}

TEST_CASE("verdict_from_samples requires enough samples") {
  const auto q = oracle::normal_plugin(100);
  CHECK_THROWS_AS(verdict_from_samples(q, 1.0, 10), Error);
}

TEST_CASE("adding a vanishing perturbation keeps the verdict") {
  // Exactly normal samples shifted by c / sqrt(n): the KS distance grows by
  // at most |c| phi(0) / sqrt(n) ~ 0.012, inside the 0.0215 threshold.
  const int n = 10000;
  const auto base = oracle::normal_plugin(4000);
  for (double c : {-3.0, -1.0, 1.0, 3.0}) {
    std::vector<double> shifted(base);
    for (double& s : shifted) s += c / std::sqrt(static_cast<double>(n));
    CHECK(verdict_from_samples(shifted, 1.0, n).verdict == CltVerdict::Consistent);
  }
  // Simulated two-state samples with an alternating +-1/sqrt(n) perturbation.
  const auto model = build_shift(oracle::TwoState{}.matrix(), Sidedness::OneSided);
  const auto f = CylinderFunction::indicator(2, 0, 0) - CylinderFunction::constant(2, model.stationary()(0));
  const double sigma2 = oracle::TwoState{}.sigma2();
  std::vector<double> samples;
  REQUIRE(verdict(model, f, sigma2, n, 4000, 12345, {}, 0, &samples).verdict == CltVerdict::Consistent);
  for (std::size_t j = 0; j < samples.size(); ++j) samples[j] += (j % 2 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
  CHECK(verdict_from_samples(samples, sigma2, n).verdict == CltVerdict::Consistent);
}

TEST_CASE("psi deviation is small on the i.i.d. preset") {
  const auto model = coin();
  const int m = 4000;
  const auto rep = verdict(model, CylinderFunction::rademacher(0), 1.0, 10000, m, 12345);
  REQUIRE(rep.verdict == CltVerdict::Consistent);
  double worst = 0.0;
  for (auto [t, dev] : rep.psi_deviation) worst = std::max(worst, dev);
  // Rademacher sums are lattice valued; the bias at |t| <= 2 is ~ t^4 / (12 n).
  CHECK(worst <= 5.0 * std::exp(2.0) / std::sqrt(m) + 1e-3);
}
