#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergoclt/conditions.hpp"
#include "ergoclt/cylinder.hpp"

namespace ergoclt {

// Backward-martingale machinery on one-sided shifts. F_0 is the full sigma
// algebra of the one-sided shift (coordinates >= 0), so E(. | F_0) is the
// identity on admissible observables and T_0 = U*.

inline constexpr double kDefaultSeriesTol = 1e-12;
inline constexpr int kDefaultSeriesMax = 10000;

/// The regularization parameters used for lambda -> 1 studies.
inline const std::vector<double>& lambda_grid() {
  static const std::vector<double> grid{2.0, 1.5, 1.25, 1.1, 1.05, 1.01, 1.001};
  return grid;
}

struct PoissonSolution {
  CylinderFunction g;
  double lambda = 1.0;
  int truncation_depth = 0;     // number of series terms summed
  double tail_norm = 0.0;       // L2 norm of the first omitted term
  double term_decay_ratio = 0.0;
  bool truncated = false;       // n_max reached before the tolerance
  std::vector<double> term_norms;
};

struct Decomposition {
  CylinderFunction g;
  CylinderFunction Y1;
  double residual_norm = 0.0;  // ||Uf - Y1 - Ug + g||
  double sigma2_mdiff = 0.0;   // E(Y1^2)
  double mean_y1 = 0.0;
  double mds_norm = 0.0;       // ||E(Y1 | F_1)||
  PoissonSolution poisson;
};

struct Sigma2Series {
  double value = 0.0;
  double raw_value = 0.0;  // before clamping at 0
  bool clamped = false;
  double abs_bound = 0.0;
  std::vector<double> terms;  // E(f U^n f), n = 0..N
};

struct LambdaVariance {
  double lambda = 1.0;
  double value = 0.0;          // E(Y1(lambda)^2), direct quadratic form
  double split_form = 0.0;     // lambda^-2 E(g^2) - E((g - f)^2)
  /// Algebraic rewrites as printed in the source derivation, with their
  /// deviation from `value`; kept for diagnostics only.
  std::vector<std::pair<std::string, double>> printed_forms;
  PoissonSolution poisson;
};

/// T_0 phi = E(U* phi | F_0).
CylinderFunction t0_apply(const TransitionModel& model, const CylinderFunction& f);

/// g(lambda) = sum_n lambda^-n T_0^n f, stopping once the next term's L2
/// norm drops below tol. Throws Diverging at lambda = 1 when term norms do
/// not decrease for 10 consecutive steps.
PoissonSolution solve_g(const TransitionModel& model, const CylinderFunction& f, double lambda = 1.0,
                        double tol = kDefaultSeriesTol, int n_max = kDefaultSeriesMax);

/// Uf = Y1 + Ug - g with Y1 a backward martingale difference.
Decomposition decompose(const TransitionModel& model, const CylinderFunction& f,
                        double tol = kDefaultSeriesTol);

/// sigma^2 = -E(f^2) + 2 sum_{n>=0} E(f U^n f). Throws NonSummable when the
/// terms never fall below tol.
Sigma2Series sigma2_series(const TransitionModel& model, const CylinderFunction& f,
                           int n_max = kDefaultSeriesMax, double tol = kDefaultSeriesTol);

LambdaVariance sigma2_lambda(const TransitionModel& model, const CylinderFunction& f, double lambda);

/// Returns g with Uf = Ug - g when E(Y1^2) < tol and the identity holds in L2.
std::optional<CylinderFunction> detect_coboundary(const TransitionModel& model,
                                                  const CylinderFunction& f, double tol = 1e-8);

ConditionReport check_thm2_conditions(const TransitionModel& model, const CylinderFunction& f,
                                      int n_max = kDefaultSeriesMax, double tol = kDefaultSeriesTol);

/// d_k = E|E(f | F_{-k}) - f| on an invertible shift with the decreasing
/// filtration F_{-k} = sigma(coords >= -k).
ConditionReport check_thm3_condition3(const TransitionModel& model, const CylinderFunction& f,
                                      double alpha = 1.5, int k_max = 64);

/// Geometric decay rate between two positions of a non-negative sequence,
/// (x[j] / x[i])^(1 / (j - i)); 0 when x[i] is 0.
double geometric_rate(const std::vector<double>& x, std::size_t i, std::size_t j);

}  // namespace ergoclt
