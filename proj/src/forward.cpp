#include "ergoclt/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergoclt/errors.hpp"
#include "ergoclt/gordin.hpp"

namespace ergoclt {

namespace {

void require_two_sided(const TransitionModel& model, const char* what) {
  if (model.sidedness() != Sidedness::TwoSided)
    throw Error(ErrorKind::SidednessMismatch, std::string(what) + " needs a two-sided shift");
}

void check_grid(const std::vector<int>& n_grid) {
  for (std::size_t i = 0; i < n_grid.size(); ++i)
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "n_grid must be strictly increasing positive integers");
}

/// Cesaro-weighted second moment of the Birkhoff sum of d.
std::vector<double> cesaro_profile(const TransitionModel& model, const CylinderFunction& d,
                                   const std::vector<int>& n_grid) {
  check_grid(n_grid);
  if (n_grid.empty()) return {};
  const auto gamma = lag_moments(model, d, d, n_grid.back() - 1);
  std::vector<double> out;
  out.reserve(n_grid.size());
  for (int n : n_grid) {
    double acc = 0.0;
    for (int j = n - 1; j >= 1; --j) acc += (1.0 - static_cast<double>(j) / n) * gamma[j];
    out.push_back(gamma[0] + 2.0 * acc);
  }
  return out;
}

}  // namespace

CylinderFunction x_r(const TransitionModel& model, const CylinderFunction& f, int r) {
  require_two_sided(model, "x_r");
  return project_sk(model, koopman(f, r), -1);
}

ForwardApproximant y0_sum(const TransitionModel& model, const CylinderFunction& f, int r_max,
                          double tol) {
  require_two_sided(model, "y0_sum");
  check_compatible(model, f);
  ForwardApproximant out{CylinderFunction::constant(model.alphabet_size(), 0.0)};

  // U^r f is F_{-1}-measurable once its window ends before coordinate 0.
  const int r_low = f.is_constant() ? 0 : std::min(0, 1 - f.end());
  for (int r = r_low; r < 0; ++r) out.Y0 = out.Y0 + x_r(model, f, r);
  out.r_min = r_low;

  double prev = -1.0;
  bool settled = false;
  int r = 0;
  for (; r <= r_max; ++r) {
    const CylinderFunction x = x_r(model, f, r);
    const double norm = l2_norm(model, x);
    if (norm < tol && prev >= 0.0 && prev < tol) {
      settled = true;
      out.tail_norm = norm;
      break;
    }
    out.Y0 = out.Y0 + x;
    prev = norm;
  }
  if (!settled) {
    std::ostringstream os;
    os << "increments x_r still have norm " << prev << " at r = " << r_max;
    throw Error(ErrorKind::NonSummable, os.str());
  }
  out.r_max = r - 1;
  out.sigma2 = std::max(0.0, inner_product(model, out.Y0, out.Y0));
  out.md_norm = l2_norm(model, conditional_on_past(model, out.Y0, -1));
  return out;
}

std::vector<double> variance_profile(const TransitionModel& model, const CylinderFunction& f,
                                     const std::vector<int>& n_grid) {
  const double mean = expectation(model, f);
  if (std::abs(mean) > 1e-10) {
    std::ostringstream os;
    os << "variance profile needs a centered observable, mean is " << mean;
    throw Error(ErrorKind::NotCentered, os.str());
  }
  return cesaro_profile(model, f, n_grid);
}

std::vector<double> approximation_defect(const TransitionModel& model, const CylinderFunction& f,
                                         const CylinderFunction& g, const std::vector<int>& n_grid) {
  require_two_sided(model, "approximation_defect");
  return cesaro_profile(model, f - g, n_grid);
}

ConditionReport check_thm5_conditions(const TransitionModel& model, const CylinderFunction& f,
                                      int k_max, double tol) {
  require_two_sided(model, "Theorem 5 conditions");
  if (k_max < 4) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 4");
  ConditionReport report{"theorem5"};

  const double mean = expectation(model, f);
  const double defect = l2_norm(model, conditional_on_past(model, f, 0) - f);
  const bool admissible = std::abs(mean) <= 1e-10 && defect <= 1e-12;
  report.entries.push_back({"centered_and_f0_measurable",
                            admissible ? Verdict::Pass : Verdict::Fail,
                            {{"mean", mean}, {"projection_defect", defect}}});
  if (!admissible) {
    report.entries.push_back({"k_sums_converge", Verdict::Indeterminate, {}});
    report.entries.push_back({"tails_uniformly_vanish", Verdict::Indeterminate, {}});
    return report;
  }

  // terms[n][k] = E(h_n U^k f) with h_n = E(U^n f | F_0); k = 0 is unused.
  std::vector<std::vector<double>> terms;
  terms.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int n = 0; n <= k_max; ++n) {
    const CylinderFunction h = conditional_on_past(model, koopman(f, n), 0);
    terms.push_back(lag_moments(model, h, f, k_max));
  }

  const std::size_t K = static_cast<std::size_t>(k_max);
  bool all_converge = true;
  bool some_stuck = false;
  double worst_ratio = 0.0;
  double worst_late = 0.0;
  for (const auto& a : terms) {
    std::size_t settle = 0;
    for (std::size_t k = 1; k + 1 <= K; ++k)
      if (std::abs(a[k]) < tol && std::abs(a[k + 1]) < tol) {
        settle = k;
        break;
      }
    if (settle == 0) {
      all_converge = false;
      double early = 0.0, late = 0.0;
      for (std::size_t k = K / 4; k <= K / 2; ++k) early = std::max(early, std::abs(a[k]));
      for (std::size_t k = 3 * K / 4; k <= K; ++k) late = std::max(late, std::abs(a[k]));
      if (early > 0.0 && late >= early * (1.0 - 1e-6)) some_stuck = true;
      if (early > 0.0) worst_ratio = std::max(worst_ratio, std::pow(late / early, 2.0 / static_cast<double>(K)));
      worst_late = std::max(worst_late, late);
    } else if (settle > 1) {
      worst_ratio = std::max(worst_ratio, geometric_rate(a, 1, settle - 1));
    }
  }
  report.entries.push_back(
      {"k_sums_converge",
       all_converge ? Verdict::Pass : (some_stuck ? Verdict::Fail : Verdict::Indeterminate),
       {{"max_decay_ratio", worst_ratio}, {"late_term_magnitude", worst_late}}});

  // tau_n = sup_K |sum_{k >= K} a(n, k)|.
  std::vector<double> tau(terms.size(), 0.0);
  for (std::size_t n = 0; n < terms.size(); ++n) {
    double tail = 0.0;
    for (std::size_t k = K; k >= 1; --k) {
      tail += terms[n][k];
      tau[n] = std::max(tau[n], std::abs(tail));
    }
  }
  const double tau_last = tau.back();
  double tau_early = 0.0, tau_late = 0.0;
  for (std::size_t n = K / 4; n <= K / 2; ++n) tau_early = std::max(tau_early, tau[n]);
  for (std::size_t n = 3 * K / 4; n <= K; ++n) tau_late = std::max(tau_late, tau[n]);
  Verdict uniform = Verdict::Indeterminate;
  if (all_converge && tau_last < tol)
    uniform = Verdict::Pass;
  else if (tau_early > 0.0 && tau_late >= tau_early * (1.0 - 1e-6))
    uniform = Verdict::Fail;
  report.entries.push_back({"tails_uniformly_vanish",
                            uniform,
                            {{"tau_0", tau.front()},
                             {"tau_last", tau_last},
                             {"tau_decay_ratio", geometric_rate(tau, 0, std::min<std::size_t>(K / 4, tau.size() - 1))}}});
  return report;
}

}  // namespace ergoclt
