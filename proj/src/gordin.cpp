#include "ergoclt/gordin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoclt/errors.hpp"

namespace ergoclt {

namespace {

constexpr double kCenteredTol = 1e-10;
constexpr int kStallSteps = 10;

void require_one_sided(const TransitionModel& model, const char* what) {
  if (model.sidedness() != Sidedness::OneSided)
    throw Error(ErrorKind::SidednessMismatch, std::string(what) + " needs a one-sided shift");
}

void require_centered(const TransitionModel& model, const CylinderFunction& f) {
  const double mean = expectation(model, f);
  if (std::abs(mean) > kCenteredTol) {
    std::ostringstream os;
    os << "observable has mean " << mean;
    throw Error(ErrorKind::NotCentered, os.str());
  }
}

double abs_max(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double best = 0.0;
  for (std::size_t i = from; i < to && i < x.size(); ++i) best = std::max(best, std::abs(x[i]));
  return best;
}

/// First N >= start with |x_N|, |x_{N+1}| < tol; nullopt if none.
std::optional<std::size_t> settle_index(const std::vector<double>& x, std::size_t start, double tol) {
  for (std::size_t n = std::max<std::size_t>(start, 1); n + 1 < x.size(); ++n)
    if (std::abs(x[n]) < tol && std::abs(x[n + 1]) < tol) return n;
  return std::nullopt;
}

}  // namespace

double geometric_rate(const std::vector<double>& x, std::size_t i, std::size_t j) {
  if (j <= i || j >= x.size() || x[i] == 0.0) return 0.0;
  return std::pow(std::abs(x[j]) / std::abs(x[i]), 1.0 / static_cast<double>(j - i));
}

CylinderFunction t0_apply(const TransitionModel& model, const CylinderFunction& f) {
  require_one_sided(model, "T_0");
  return conditional(model, transfer(model, f), FiltrationIndex{0});
}

PoissonSolution solve_g(const TransitionModel& model, const CylinderFunction& f, double lambda,
                        double tol, int n_max) {
  require_one_sided(model, "the Poisson solver");
  if (!(lambda >= 1.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 1");
  require_centered(model, f);

  PoissonSolution out{f, lambda};
  CylinderFunction term = f;
  double norm = l2_norm(model, term);
  out.term_norms.push_back(norm);
  if (norm < tol) {
    // The zero observable (up to tol) solves the equation with g = f.
    out.truncation_depth = 1;
    out.tail_norm = 0.0;
    return out;
  }
  out.truncation_depth = 1;
  int stalled = 0;
  bool converged = false;
  for (int n = 1; n < n_max; ++n) {
    term = (1.0 / lambda) * t0_apply(model, term);
    const double prev = norm;
    norm = l2_norm(model, term);
    out.term_norms.push_back(norm);
    if (norm < tol) {
      converged = true;
      break;
    }
    if (lambda == 1.0) {
      stalled = norm >= prev * (1.0 - 1e-12) ? stalled + 1 : 0;
      if (stalled >= kStallSteps) {
        std::ostringstream os;
        os << "T_0^n f norms stopped decreasing at n = " << n << " (norm " << norm << ")";
        throw Error(ErrorKind::Diverging, os.str());
      }
    }
    out.g = out.g + term;
    ++out.truncation_depth;
  }
  if (!converged) {
    out.truncated = true;
    term = (1.0 / lambda) * t0_apply(model, term);
    norm = l2_norm(model, term);
    out.term_norms.push_back(norm);
  }
  out.tail_norm = norm;
  const auto& tn = out.term_norms;
  out.term_decay_ratio = tn.size() >= 2 ? geometric_rate(tn, tn.size() - 2, tn.size() - 1) : 0.0;
  return out;
}

Decomposition decompose(const TransitionModel& model, const CylinderFunction& f, double tol) {
  PoissonSolution sol = solve_g(model, f, 1.0, tol);
  const CylinderFunction& g = sol.g;
  const CylinderFunction Uf = koopman(f);
  const CylinderFunction Ug = koopman(g);
  CylinderFunction Y1 = Uf - Ug + g;
  Decomposition out{g, Y1};
  out.residual_norm = l2_norm(model, Uf - Y1 - Ug + g);
  out.mean_y1 = expectation(model, Y1);
  out.mds_norm = l2_norm(model, conditional(model, Y1, FiltrationIndex{1}));
  out.sigma2_mdiff = inner_product(model, Y1, Y1);
  out.poisson = std::move(sol);
  return out;
}

Sigma2Series sigma2_series(const TransitionModel& model, const CylinderFunction& f, int n_max,
                           double tol) {
  require_centered(model, f);
  const auto c = lag_moments(model, f, f, n_max);
  const auto settle = settle_index(c, static_cast<std::size_t>(f.length()), tol);
  if (!settle) {
    std::ostringstream os;
    os << "autocovariances still at " << std::abs(c.back()) << " after " << n_max << " lags";
    throw Error(ErrorKind::NonSummable, os.str());
  }
  Sigma2Series out;
  out.terms.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(*settle + 1));
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double t : out.terms) {
    sum += t;
    abs_sum += std::abs(t);
  }
  out.raw_value = -out.terms[0] + 2.0 * sum;
  out.abs_bound = -out.terms[0] + 2.0 * abs_sum;
  out.clamped = out.raw_value < 0.0;
  out.value = std::max(out.raw_value, 0.0);
  return out;
}

LambdaVariance sigma2_lambda(const TransitionModel& model, const CylinderFunction& f, double lambda) {
  if (!(lambda > 1.0)) throw Error(ErrorKind::InvalidArgument, "sigma2_lambda needs lambda > 1");
  LambdaVariance out;
  out.lambda = lambda;
  out.poisson = solve_g(model, f, lambda, 1e-14);
  const CylinderFunction& g = out.poisson.g;
  const CylinderFunction Uf = koopman(f);
  const CylinderFunction Ug = koopman(g);
  const CylinderFunction Y = combine(Uf - Ug, g, CombineOp::Add, 1.0, 1.0 / lambda);
  out.value = inner_product(model, Y, Y);

  const double Eff = inner_product(model, f, f);
  const double Egg = inner_product(model, g, g);
  const CylinderFunction gf = g - f;
  out.split_form = Egg / (lambda * lambda) - inner_product(model, gf, gf);

  const double l2 = lambda * lambda;
  const CylinderFunction bracket = combine(Ug, g, CombineOp::Sub, 1.0, 1.0 / lambda);
  const double line4 = -Eff + 2.0 * inner_product(model, Ug, bracket) - (1.0 - Egg / l2);
  const double line5 = -Eff + 2.0 * inner_product(model, Ug, f) - (1.0 - l2) * Egg;
  const double line6 = -Eff + 2.0 * inner_product(model, g, f) - (1.0 - l2) * Egg;
  out.printed_forms = {{"ug_bracket_minus_one_minus_lambda_inv2_egg", line4 - out.value},
                       {"ug_f_minus_one_minus_lambda2_egg", line5 - out.value},
                       {"g_f_minus_one_minus_lambda2_egg", line6 - out.value}};
  return out;
}

std::optional<CylinderFunction> detect_coboundary(const TransitionModel& model,
                                                  const CylinderFunction& f, double tol) {
  const Decomposition d = decompose(model, f);
  if (d.sigma2_mdiff >= tol) return std::nullopt;
  const double defect = l2_norm(model, koopman(f) - koopman(d.g) + d.g);
  if (defect >= tol) return std::nullopt;
  return d.g;
}

ConditionReport check_thm2_conditions(const TransitionModel& model, const CylinderFunction& f,
                                      int n_max, double tol) {
  require_one_sided(model, "Theorem 2 conditions");
  ConditionReport report{"theorem2"};

  {
    ConditionEntry e{"centered_and_f0_measurable"};
    const double mean = expectation(model, f);
    const double defect = l2_norm(model, conditional(model, f, FiltrationIndex{0}) - f);
    e.verdict = std::abs(mean) <= kCenteredTol && defect <= 1e-12 ? Verdict::Pass : Verdict::Fail;
    e.evidence = {{"mean", mean}, {"projection_defect", defect}};
    report.entries.push_back(std::move(e));
  }

  {
    ConditionEntry e{"autocovariances_absolutely_summable"};
    const auto c = lag_moments(model, f, f, n_max);
    const std::size_t start = static_cast<std::size_t>(std::max(f.length(), 1));
    const auto settle = settle_index(c, start, tol);
    if (settle) {
      // Rate from the last lag still above tol back to the first lag past the
      // window overlap.
      std::size_t last = start;
      for (std::size_t n = start; n <= *settle; ++n)
        if (std::abs(c[n]) >= tol) last = n;
      const double ratio = last > start ? geometric_rate(c, start, last) : 0.0;
      // Keep summing until the geometric tail bound is inside tol.
      const auto tail_at = [&](std::size_t n) {
        return ratio < 1.0 ? std::abs(c[n]) * ratio / (1.0 - ratio)
                           : std::numeric_limits<double>::infinity();
      };
      std::size_t used = *settle;
      while (used + 1 < c.size() && tail_at(used) >= tol) ++used;
      double abs_sum = 0.0;
      for (std::size_t n = 0; n <= used; ++n) abs_sum += std::abs(c[n]);
      const double tail = tail_at(used);
      e.verdict = ratio < 1.0 && tail < tol ? Verdict::Pass : Verdict::Indeterminate;
      e.evidence = {{"decay_ratio", ratio},
                    {"abs_sum", abs_sum},
                    {"lags_used", static_cast<double>(used)},
                    {"tail_estimate", tail}};
    } else {
      const std::size_t N = c.size() - 1;
      const double late = abs_max(c, 3 * N / 4, N + 1);
      const double early = abs_max(c, N / 4, N / 2 + 1);
      const double ratio = early > 0.0 ? std::pow(late / early, 2.0 / static_cast<double>(N)) : 0.0;
      e.verdict = ratio >= 1.0 - 1e-6 ? Verdict::Fail : Verdict::Indeterminate;
      e.evidence = {{"decay_ratio", ratio},
                    {"late_term_magnitude", late},
                    {"lags_used", static_cast<double>(N)}};
    }
    report.entries.push_back(std::move(e));
  }

  {
    ConditionEntry e{"transfer_series_converges"};
    std::vector<double> sup;
    CylinderFunction term = f;
    sup.push_back(sup_norm(term));
    int stalled = 0;
    Verdict verdict = Verdict::Indeterminate;
    for (int n = 1; n < n_max && sup.back() >= tol; ++n) {
      term = t0_apply(model, term);
      const double s = sup_norm(term);
      stalled = s >= sup.back() * (1.0 - 1e-12) ? stalled + 1 : 0;
      sup.push_back(s);
      if (stalled >= kStallSteps) {
        verdict = Verdict::Fail;
        break;
      }
    }
    if (sup.back() < tol) verdict = Verdict::Pass;
    double sum = 0.0;
    for (double s : sup) sum += s;
    const double ratio = sup.size() >= 2 ? geometric_rate(sup, sup.size() - 2, sup.size() - 1) : 0.0;
    e.verdict = verdict;
    e.evidence = {{"sup_norm_sum", sum},
                  {"last_sup_norm", sup.back()},
                  {"decay_ratio", ratio},
                  {"terms_used", static_cast<double>(sup.size())}};
    report.entries.push_back(std::move(e));
  }
  return report;
}

ConditionReport check_thm3_condition3(const TransitionModel& model, const CylinderFunction& f,
                                      double alpha, int k_max) {
  if (model.sidedness() != Sidedness::TwoSided)
    throw Error(ErrorKind::SidednessMismatch, "Theorem 3 assumes an invertible (two-sided) shift");
  if (!(alpha > 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must exceed 1");
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");

  std::vector<double> d(static_cast<std::size_t>(k_max) + 1, 0.0);
  double sup = 0.0;
  int first_zero = -1;
  int last_nonzero = 0;
  for (int k = 1; k <= k_max; ++k) {
    const CylinderFunction diff = conditional_on_future(model, f, -k) - f;
    d[k] = expectation(model, apply(diff, [](double x) { return std::abs(x); }));
    if (d[k] <= 1e-15) {
      if (first_zero < 0) first_zero = k;
    } else {
      first_zero = -1;
      last_nonzero = k;
    }
    sup = std::max(sup, std::pow(static_cast<double>(k), alpha) * d[k]);
  }

  // Log-log slope over the second half of the nonzero range.
  double exponent = std::numeric_limits<double>::infinity();
  if (last_nonzero >= 2) {
    const int lo = std::max(1, last_nonzero / 2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = lo; k <= last_nonzero; ++k) {
      if (d[k] <= 1e-15) continue;
      const double x = std::log(static_cast<double>(k));
      const double y = std::log(d[k]);
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
    }
    if (cnt >= 2) exponent = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }

  ConditionEntry e{"conditional_approximation_rate"};
  if (first_zero > 0)
    e.verdict = Verdict::Pass;
  else if (exponent >= alpha)
    e.verdict = Verdict::Pass;
  else if (exponent <= 0.0)
    e.verdict = Verdict::Fail;
  else
    e.verdict = Verdict::Indeterminate;
  e.evidence = {{"alpha", alpha},
                {"sup_k_alpha_dk", sup},
                {"first_zero_k", static_cast<double>(first_zero)},
                {"decay_exponent", exponent}};
  for (int k = 1; k <= std::min(k_max, 8); ++k) e.evidence.emplace_back("d_" + std::to_string(k), d[k]);
  ConditionReport report{"theorem3"};
  report.entries.push_back(std::move(e));
  return report;
}

}  // namespace ergoclt
