#include <doctest.h>

#include <random>

#include "ergoclt/errors.hpp"
#include "ergoclt/forward.hpp"
#include "ergoclt/gordin.hpp"
#include "oracles.hpp"

using namespace ergoclt;

namespace {

const oracle::TwoState kGap;

TransitionModel iid() { return build_shift(Matrix::Constant(2, 2, 0.5), Sidedness::TwoSided); }
TransitionModel gap() { return build_shift(kGap.matrix(), Sidedness::TwoSided); }

CylinderFunction centered_indicator(const TransitionModel& model) {
  return CylinderFunction::indicator(2, 0, 0) - CylinderFunction::constant(2, model.stationary()(0));
}

bool is_zero(const CylinderFunction& f) { return f.is_constant() && std::abs(f.value_at(0)) < 1e-15; }

}  // namespace

TEST_CASE("x_r examples") {
  const auto r = CylinderFunction::rademacher(0);
  const auto x0 = x_r(iid(), r, 0);
  CHECK((x0.values() - r.values()).norm() < 1e-15);
  CHECK(x0.offset() == 0);
  CHECK(is_zero(x_r(iid(), r, 3)));
  CHECK(is_zero(x_r(iid(), r, -2)));
  CHECK_THROWS_AS(x_r(iid().with_sidedness(Sidedness::OneSided), r, 0), Error);
}

TEST_CASE("y0_sum examples") {
  const auto r = CylinderFunction::rademacher(0);
  const auto a = y0_sum(iid(), r);
  CHECK((a.Y0.values() - r.values()).norm() < 1e-15);
  CHECK(a.sigma2 == doctest::Approx(1.0));

  const auto model = gap();
  const auto f = centered_indicator(model);
  const auto b = y0_sum(model, f);
  CHECK(std::abs(b.sigma2 - 34.0 / 27.0) < 1e-6);
  CHECK(b.md_norm <= 1e-10);
  CHECK(b.r_min == 0);

  // Closed form: Y0 = (f - rho U^{-1} f) / (1 - rho).
  const auto closed = (1.0 / (1.0 - kGap.rho())) * (f - kGap.rho() * koopman_inverse(model, f));
  CHECK(oracle::l2_distance(model, b.Y0, closed) < 1e-9);

  const auto z = y0_sum(model, CylinderFunction::constant(2, 0.0));
  CHECK(z.sigma2 == 0.0);
  CHECK(z.Y0.is_constant());
}

TEST_CASE("Y0 is a martingale difference") {
  const auto model = gap();
  const auto y = y0_sum(model, centered_indicator(model)).Y0;
  CHECK(oracle::l2_distance(model, conditional(model, koopman(y), FiltrationIndex{0}),
                            CylinderFunction::constant(2, 0.0)) <= 1e-10);
  CHECK(oracle::past_conditional_error(model, y, conditional(model, y, FiltrationIndex{0}), 0) < 1e-12);
}

TEST_CASE("cross identity sum_j E(Y0 U^j f) = E(Y0^2)") {
  const auto model = gap();
  const auto f = centered_indicator(model);
  const auto a = y0_sum(model, f);
  double s = 0.0;
  for (int j = -200; j <= 200; ++j) s += inner_product(model, a.Y0, f.shifted(j));
  CHECK(std::abs(s - a.sigma2) < 1e-6);
}

TEST_CASE("Y0 is orthogonal to F_-1 conditionals of the sequence") {
  const auto model = gap();
  const auto f = centered_indicator(model);
  const auto y = y0_sum(model, f).Y0;
  for (int j = -5; j <= 5; ++j) {
    const auto past = conditional(model, f.shifted(j), FiltrationIndex{-1});
    CHECK(std::abs(oracle::inner(model, y, past)) < 1e-12);
  }
}

TEST_CASE("variance_profile examples") {
  const auto r = CylinderFunction::rademacher(0);
  for (double v : variance_profile(iid(), r, {1, 10, 1000})) CHECK(v == doctest::Approx(1.0));

  const auto model = gap();
  const auto f = centered_indicator(model);
  const auto prof = variance_profile(model, f, {1, 10, 100, 10000});
  CHECK(std::abs(prof[0] - 2.0 / 9.0) < 1e-15);
  CHECK(std::abs(prof[1] - kGap.cesaro(10)) < 1e-13);
  CHECK(std::abs(prof[2] - kGap.cesaro(100)) < 1e-13);
  CHECK(std::abs(prof[3] - 34.0 / 27.0) < 1e-3);
  CHECK_THROWS_AS(variance_profile(model, CylinderFunction::indicator(2, 0, 0), {10}), Error);
}

TEST_CASE("forward and backward routes agree") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 20; ++i) {
    const int m = 2 + i % 3;
    Matrix P = oracle::random_stochastic(rng, m);
    P = 0.5 * (P + Matrix::Constant(m, m, 1.0 / m));
    const auto two = build_shift(P, Sidedness::TwoSided);
    auto f = oracle::random_cylinder(rng, m, -1, 0, 2);
    f = f - CylinderFunction::constant(m, expectation(two, f));
    const auto fwd = y0_sum(two, f);
    const auto one = two.with_sidedness(Sidedness::OneSided);
    const auto series = sigma2_series(one, f.shifted(1 - f.offset()));
    CHECK(std::abs(fwd.sigma2 - series.value) < 1e-6);
    CHECK(std::abs(variance_profile(two, f, {100000})[0] - fwd.sigma2) < 1e-3);
  }
}

TEST_CASE("Theorem 5 checker") {
  const auto r = CylinderFunction::rademacher(0);
  CHECK(check_thm5_conditions(iid(), r).all_pass());

  const auto model = gap();
  CHECK(check_thm5_conditions(model, centered_indicator(model)).all_pass());

  Matrix P(2, 2);
  P << 0, 1, 1, 0;
  const auto flip = build_shift(P, Sidedness::TwoSided);
  const auto rep = check_thm5_conditions(flip, centered_indicator(flip));
  CHECK(rep.at("k_sums_converge").verdict == Verdict::Fail);
  CHECK(rep.any_fail());

  // A window reaching past coordinate 0 is not F_0-measurable.
  CHECK(check_thm5_conditions(model, centered_indicator(model).shifted(1)).at("centered_and_f0_measurable").verdict ==
        Verdict::Fail);
}

TEST_CASE("approximation_defect examples") {
  const auto model = gap();
  const auto f = centered_indicator(model);
  for (double v : approximation_defect(model, f, f, {1, 10, 100})) CHECK(v == 0.0);

  const auto r = CylinderFunction::rademacher(0);
  for (double v : approximation_defect(iid(), r, CylinderFunction::constant(2, 0.0), {1, 10, 100}))
    CHECK(v == doctest::Approx(1.0));

  const auto y = y0_sum(model, f).Y0;
  const auto d = approximation_defect(model, f, y, {10, 100, 1000});
  CHECK(d[0] > d[1]);
  CHECK(d[1] > d[2]);
  CHECK(d[2] < 1e-2);
}
