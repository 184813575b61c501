#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ergoclt/cylinder.hpp"

namespace ergoclt {

inline constexpr double kKsConstant5pct = 1.358;
inline constexpr double kDegeneracyTol = 1e-8;
inline constexpr int kMinKsSamples = 500;

inline const std::vector<double>& default_t_grid() {
  static const std::vector<double> grid{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  return grid;
}

/// Pairwise summation; the result does not depend on how work was split.
double pairwise_sum(std::span<const double> x);

/// m independent stationary orbits, each reduced to S_n / sqrt(n). Sample j
/// uses RNG stream j, so output is a function of (model, f, n, m, seed) only.
std::vector<double> simulate_birkhoff(const TransitionModel& model, const CylinderFunction& f, int n,
                                      int m, std::uint64_t seed, int workers = 0);

struct KsResult {
  double distance = 0.0;
  double threshold_5pct = 0.0;
};

/// Sup distance between the empirical CDF and the N(0, sigma2) CDF.
KsResult ks_statistic(std::span<const double> samples, double sigma2);

double normal_cdf(double x, double sigma2 = 1.0);

/// |psi(t) - 1| with psi(t) = exp(sigma2 t^2 / 2) * mean_j exp(i t x_j).
std::vector<std::pair<double, double>> cf_diagnostic(std::span<const double> samples, double sigma2,
                                                     const std::vector<double>& t_grid = default_t_grid());

/// Monte Carlo estimate of P(|g(T^n w) - g(w) + f(w)| / sqrt(n) > eps) for
/// each n. The state at the far window is drawn from P^gap directly.
std::vector<double> remainder_probability(const TransitionModel& model, const CylinderFunction& f,
                                          const CylinderFunction& g, const std::vector<int>& n_grid,
                                          double eps, int m, std::uint64_t seed);

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;         // unbiased
  double excess_kurtosis = 0.0;  // bias-adjusted G2; NaN for zero variance
};

MomentSummary moment_summary(std::span<const double> samples);

enum class CltVerdict { Consistent, Inconsistent, Degenerate };

const char* to_string(CltVerdict v);

struct CltTolerances {
  double degeneracy = kDegeneracyTol;
  double ks_constant = kKsConstant5pct;
  double variance_sigmas = 4.0;  // |s^2 - sigma2| < k sigma2 sqrt(2/m)
  double remainder_eps = 0.1;
  std::vector<double> t_grid = default_t_grid();
};

struct CltReport {
  int n = 0;
  int samples = 0;
  double sigma2_theory = 0.0;
  double sample_variance = 0.0;
  double ks_distance = 0.0;
  double ks_threshold = 0.0;
  double variance_band = 0.0;
  std::vector<std::pair<double, double>> psi_deviation;
  double remainder_prob = 0.0;   // NaN when no decomposition is available
  double max_abs_sample = 0.0;
  double degenerate_bound = 0.0;  // (|f|_inf + 2|g|_inf) / sqrt(n); NaN if unknown
  MomentSummary moments;
  CltVerdict verdict = CltVerdict::Inconsistent;
};

/// Verdict from precomputed samples. `degenerate_bound` is required when
/// sigma2_theory is below the degeneracy tolerance.
CltReport verdict_from_samples(std::span<const double> samples, double sigma2_theory, int n,
                               const CltTolerances& tol = {},
                               std::optional<double> degenerate_bound = std::nullopt);

/// Degenerate case check: every sample within the bounded-sum envelope.
bool degenerate_samples_bounded(const CltReport& r);

/// Simulates, then judges the samples against N(0, sigma2_theory). The
/// Gordin decomposition of f (on the one-sided twin of the chain) supplies
/// the remainder estimate and the bounded-sum check in the degenerate case.
CltReport verdict(const TransitionModel& model, const CylinderFunction& f, double sigma2_theory,
                  int n, int m, std::uint64_t seed, const CltTolerances& tol = {}, int workers = 0,
                  std::vector<double>* samples_out = nullptr);

}  // namespace ergoclt
