#pragma once

#include <vector>

#include "ergoclt/conditions.hpp"
#include "ergoclt/cylinder.hpp"

namespace ergoclt {

// Martingale approximation on invertible (two-sided) shifts with the
// increasing filtration F_k = sigma(coords <= k).

struct ForwardApproximant {
  CylinderFunction Y0;
  double sigma2 = 0.0;  // E(Y0^2)
  int r_min = 0;        // range of increments actually summed
  int r_max = 0;
  double tail_norm = 0.0;
  double md_norm = 0.0;  // ||E(Y0 | F_{-1})||
};

/// x_r = E(U^r f | F_0) - E(U^r f | F_{-1}).
CylinderFunction x_r(const TransitionModel& model, const CylinderFunction& f, int r);

/// Y0 = sum_r x_r. The negative side is finite for cylinder f (U^r f becomes
/// F_{-1}-measurable); the positive side runs until two consecutive
/// increments fall below tol. Throws NonSummable at r_max.
ForwardApproximant y0_sum(const TransitionModel& model, const CylinderFunction& f,
                          int r_max = 10000, double tol = 1e-12);

/// n^-1 E(S_n^2) = sum_{|j|<n} (1 - |j|/n) E(f U^j f), exact.
std::vector<double> variance_profile(const TransitionModel& model, const CylinderFunction& f,
                                     const std::vector<int>& n_grid);

/// n^-1 E[(sum_{k<n} U^k (f - g))^2] for each n in the grid.
std::vector<double> approximation_defect(const TransitionModel& model, const CylinderFunction& f,
                                         const CylinderFunction& g, const std::vector<int>& n_grid);

/// Double-indexed sums a(n, k) = E(X_k E(X_n | F_0)), X_j = U^j f, for
/// n <= k_max and 1 <= k <= k_max.
ConditionReport check_thm5_conditions(const TransitionModel& model, const CylinderFunction& f,
                                      int k_max = 200, double tol = 1e-10);

}  // namespace ergoclt
