#include <doctest.h>

#include <random>

#include "ergoclt/errors.hpp"
#include "ergoclt/markov_shift.hpp"
#include "oracles.hpp"

using namespace ergoclt;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix P(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) P(i, j++) = v;
    ++i;
  }
  return P;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ergoclt::Error");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("build_shift on the fair coin") {
  const auto model = build_shift(mat({{0.5, 0.5}, {0.5, 0.5}}), Sidedness::OneSided);
  CHECK(model.stationary()(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(model.ergodic_class().irreducible);
  CHECK(model.ergodic_class().period == 1);
}

TEST_CASE("build_shift on the two-state gap chain") {
  const auto model = build_shift(mat({{0.9, 0.1}, {0.2, 0.8}}), Sidedness::OneSided);
  // Direct solve of pi (P - I) = 0 with pi_0 + pi_1 = 1.
  Eigen::Matrix2d A;
  A << -0.1, 0.2, 1.0, 1.0;
  const Eigen::Vector2d pi = A.fullPivLu().solve(Eigen::Vector2d(0.0, 1.0));
  CHECK(std::abs(model.stationary()(0) - pi(0)) < 1e-15);
  CHECK(std::abs(model.stationary()(1) - pi(1)) < 1e-15);
  CHECK(std::abs(pi(0) - 2.0 / 3.0) < 1e-15);
  CHECK(model.ergodic_class().period == 1);
}

TEST_CASE("build_shift accepts the flip chain with period 2") {
  const auto model = build_shift(mat({{0, 1}, {1, 0}}), Sidedness::TwoSided);
  CHECK(model.stationary()(0) == doctest::Approx(0.5));
  CHECK(model.ergodic_class().irreducible);
  CHECK(model.ergodic_class().period == 2);
  CHECK(model.sidedness() == Sidedness::TwoSided);
}

TEST_CASE("build_shift validation errors") {
  CHECK(kind_of([] { build_shift(mat({{0.5, 0.4}, {0.5, 0.5}}), Sidedness::OneSided); }) ==
        ErrorKind::NotStochastic);
  CHECK(kind_of([] { build_shift(mat({{1.2, -0.2}, {0.5, 0.5}}), Sidedness::OneSided); }) ==
        ErrorKind::NotStochastic);
  CHECK(kind_of([] { build_shift(mat({{1, 0}, {0, 1}}), Sidedness::OneSided); }) == ErrorKind::Reducible);
  CHECK(kind_of([] { build_shift(Matrix::Ones(1, 1), Sidedness::OneSided); }) == ErrorKind::NotStochastic);

  // Within 1e-9 the row is renormalized exactly.
  const auto model = build_shift(mat({{0.5 + 4e-10, 0.5}, {0.5, 0.5}}), Sidedness::OneSided);
  CHECK(std::abs(model.transition().row(0).sum() - 1.0) < 1e-15);
}

TEST_CASE("stationary_distribution examples") {
  CHECK((stationary_distribution(mat({{0.5, 0.5}, {0.5, 0.5}})) - Vector::Constant(2, 0.5)).norm() < 1e-15);
  CHECK(std::abs(stationary_distribution(mat({{0.9, 0.1}, {0.2, 0.8}}))(0) - 2.0 / 3.0) < 1e-14);
  CHECK((stationary_distribution(mat({{0, 1}, {1, 0}})) - Vector::Constant(2, 0.5)).norm() < 1e-15);
  CHECK_THROWS_AS(stationary_distribution(mat({{1, 0}, {0, 1}})), Error);
}

TEST_CASE("stationary law is invariant for random chains") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 7;
    const Matrix P = oracle::random_stochastic(rng, m);
    const Vector pi = stationary_distribution(P);
    CHECK((P.transpose() * pi - pi).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(std::abs(pi.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("stationary law via power iteration above 64 states") {
  std::mt19937_64 rng(3);
  const Matrix P = oracle::random_stochastic(rng, 80);
  const Vector pi = stationary_distribution(P);
  CHECK((P.transpose() * pi - pi).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("classify examples") {
  CHECK_FALSE(classify(mat({{1, 0}, {0, 1}})).irreducible);
  const auto flip = classify(mat({{0, 1}, {1, 0}}));
  CHECK(flip.irreducible);
  CHECK(flip.period == 2);
  CHECK(classify(mat({{0.9, 0.1}, {0.2, 0.8}})).period == 1);
  // 3-cycle with a chord giving cycles of length 3 and 2 -> aperiodic.
  CHECK(classify(mat({{0, 1, 0}, {0.5, 0, 0.5}, {1, 0, 0}})).period == 1);
  CHECK(classify(mat({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}})).period == 3);
}

TEST_CASE("matrix powers converge to the stationary rows") {
  const auto model = build_shift(mat({{0.9, 0.1}, {0.2, 0.8}}), Sidedness::OneSided);
  // P^n = 1 pi + rho^n (I - 1 pi) for a two-state chain, rho = 0.7.
  const oracle::TwoState two;
  const Matrix P30 = model.power(30);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double expected = std::pow(two.rho(), 30) * ((i == j ? 1.0 : 0.0) - model.stationary()(j));
      CHECK(std::abs(P30(i, j) - model.stationary()(j) - expected) < 1e-14);
    }
  // 0.7^30 is about 2.3e-5; the 1e-6 level is reached from n = 40 on.
  const Matrix P40 = model.power(40);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(P40(i, j) - model.stationary()(j)) < 1e-6);
}

TEST_CASE("reverse chain weights") {
  const auto model = build_shift(mat({{0.9, 0.1}, {0.2, 0.8}}), Sidedness::OneSided);
  const Matrix& B = model.reverse_transition();
  CHECK(B(0, 0) == doctest::Approx(0.9));
  CHECK(B(1, 0) == doctest::Approx(0.2));
  CHECK((B.rowwise().sum() - Vector::Ones(2)).norm() < 1e-15);
}

TEST_CASE("sample_orbit determinism and deterministic chains") {
  const auto coin = build_shift(mat({{0.5, 0.5}, {0.5, 0.5}}), Sidedness::OneSided);
  const auto a = sample_orbit(coin, 5, 7);
  const auto b = sample_orbit(coin, 5, 7);
  CHECK(a.symbols == b.symbols);
  CHECK(a.symbols.size() == 5);
  CHECK(sample_orbit(coin, 64, 7).symbols != sample_orbit(coin, 64, 8).symbols);
  CHECK(sample_orbit(coin, 64, 7, 0).symbols != sample_orbit(coin, 64, 7, 1).symbols);

  const auto flip = build_shift(mat({{0, 1}, {1, 0}}), Sidedness::OneSided);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto o = sample_orbit(flip, 4, seed);
    for (std::size_t i = 1; i < o.symbols.size(); ++i) CHECK(o.symbols[i] == 1 - o.symbols[i - 1]);
  }
}

TEST_CASE("empirical symbol frequency of the fair coin") {
  const auto coin = build_shift(mat({{0.5, 0.5}, {0.5, 0.5}}), Sidedness::OneSided);
  const auto o = sample_orbit(coin, 1000000, 1);
  const double zeros = static_cast<double>(std::count(o.symbols.begin(), o.symbols.end(), 0));
  CHECK(std::abs(zeros / 1e6 - 0.5) < 0.002);
}

TEST_CASE("uniform draws stay in [0, 1)") {
  StreamRng rng(42, 9);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
}
