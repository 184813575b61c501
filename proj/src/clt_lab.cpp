#include "ergoclt/clt_lab.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <thread>

#include "ergoclt/errors.hpp"
#include "ergoclt/gordin.hpp"

namespace ergoclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int workers, int jobs) {
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(w, 1, std::max(jobs, 1));
}

/// Runs body(begin, end) over [0, count) split into contiguous chunks.
template <typename Body>
void parallel_chunks(int count, int workers, Body body) {
  const int w = resolve_workers(workers, count);
  if (w == 1) {
    body(0, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(count) * t / w);
    const int end = static_cast<int>(static_cast<long long>(count) * (t + 1) / w);
    pool.emplace_back([=] { body(begin, end); });
  }
}

std::size_t window_modulus(const CylinderFunction& f) {
  return table_size(f.alphabet_size(), f.length());
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

std::vector<double> simulate_birkhoff(const TransitionModel& model, const CylinderFunction& f, int n,
                                      int m, std::uint64_t seed, int workers) {
  if (n < 1 || m < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1 and m >= 1");
  check_compatible(model, f);
  std::vector<double> out(static_cast<std::size_t>(m));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (f.is_constant()) {
    std::fill(out.begin(), out.end(), f.value_at(0) * n * scale);
    return out;
  }
  const SymbolSampler sampler(model);
  const int alphabet = model.alphabet_size();
  const std::size_t modulus = window_modulus(f);
  const int L = f.length();

  parallel_chunks(m, workers, [&](int begin, int end) {
    for (int j = begin; j < end; ++j) {
      StreamRng rng(seed, static_cast<std::uint64_t>(j));
      int s = sampler.initial(rng);
      std::size_t idx = static_cast<std::size_t>(s);
      for (int i = 1; i < L; ++i) {
        s = sampler.next(s, rng);
        idx = idx * alphabet + static_cast<std::size_t>(s);
      }
      double sum = f.value_at(idx);
      for (int i = 1; i < n; ++i) {
        s = sampler.next(s, rng);
        idx = (idx * alphabet + static_cast<std::size_t>(s)) % modulus;
        sum += f.value_at(idx);
      }
      out[static_cast<std::size_t>(j)] = sum * scale;
    }
  });
  return out;
}

double normal_cdf(double x, double sigma2) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * sigma2));
}

KsResult ks_statistic(std::span<const double> samples, double sigma2) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no samples");
  if (sigma2 < kDegeneracyTol)
    throw Error(ErrorKind::DegenerateSigma,
                "sigma^2 below the degeneracy tolerance; use the coboundary checks instead");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i], sigma2);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - F, F - static_cast<double>(i) / m});
  }
  return {std::clamp(d, 0.0, 1.0), kKsConstant5pct / std::sqrt(m)};
}

std::vector<std::pair<double, double>> cf_diagnostic(std::span<const double> samples, double sigma2,
                                                     const std::vector<double>& t_grid) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no samples");
  if (sigma2 < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma^2 must be non-negative");
  const double m = static_cast<double>(samples.size());
  std::vector<double> c(samples.size());
  std::vector<double> s(samples.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      c[j] = std::cos(t * samples[j]);
      s[j] = std::sin(t * samples[j]);
    }
    const double amp = std::exp(0.5 * sigma2 * t * t);
    const std::complex<double> psi(amp * pairwise_sum(c) / m, amp * pairwise_sum(s) / m);
    out.emplace_back(t, std::abs(psi - 1.0));
  }
  return out;
}

std::vector<double> remainder_probability(const TransitionModel& model, const CylinderFunction& f,
                                          const CylinderFunction& g, const std::vector<int>& n_grid,
                                          double eps, int m, std::uint64_t seed) {
  if (model.sidedness() != Sidedness::OneSided)
    throw Error(ErrorKind::SidednessMismatch, "remainder estimates use the one-sided shift");
  if (m < 1 || !(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "need m >= 1 and eps > 0");
  check_compatible(model, f);
  check_compatible(model, g);

  int lo = 0;
  int hi = 1;
  if (!f.is_constant() || !g.is_constant()) {
    lo = std::numeric_limits<int>::max();
    hi = std::numeric_limits<int>::min();
    for (const auto* h : {&f, &g})
      if (!h->is_constant()) lo = std::min(lo, h->offset()), hi = std::max(hi, h->end());
  }
  const SymbolSampler sampler(model);

  std::vector<double> out;
  out.reserve(n_grid.size());
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const int n = n_grid[ni];
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    const double threshold = eps * std::sqrt(static_cast<double>(n));
    const int g_start = g.is_constant() ? hi : g.offset() + n;
    const int g_end = g.is_constant() ? hi : g.end() + n;
    const int gap = g_start - (hi - 1);
    const bool jump = gap > 1;
    const CylinderFunction gn = g.shifted(n);
    const SymbolSampler jumper(model.stationary(), jump ? model.power(gap) : model.transition());

    long long hits = 0;
    std::vector<int> head(static_cast<std::size_t>(hi - lo));
    std::vector<int> far;
    for (int j = 0; j < m; ++j) {
      StreamRng rng(seed, (static_cast<std::uint64_t>(ni) << 32) | static_cast<std::uint64_t>(j));
      head[0] = sampler.initial(rng);
      for (std::size_t i = 1; i < head.size(); ++i) head[i] = sampler.next(head[i - 1], rng);
      const Window w0{lo, head};
      double value = evaluate(f, w0) - evaluate(g, w0);
      if (!g.is_constant()) {
        if (jump) {
          far.assign(1, jumper.next(head.back(), rng));
          for (int c = g_start + 1; c < g_end; ++c) far.push_back(sampler.next(far.back(), rng));
          value += evaluate(gn, Window{g_start, far});
        } else {
          // Windows touch or overlap: extend the orbit symbol by symbol.
          far = head;
          for (int c = hi; c < g_end; ++c) far.push_back(sampler.next(far.back(), rng));
          value += evaluate(gn, Window{lo, far});
        }
      } else {
        value += g.value_at(0);
      }
      if (std::abs(value) > threshold) ++hits;
    }
    out.push_back(static_cast<double>(hits) / m);
  }
  return out;
}

MomentSummary moment_summary(std::span<const double> samples) {
  if (samples.size() < 4) throw Error(ErrorKind::InvalidArgument, "moment summary needs >= 4 samples");
  const double m = static_cast<double>(samples.size());
  MomentSummary out;
  out.mean = pairwise_sum(samples) / m;
  std::vector<double> d2(samples.size());
  std::vector<double> d4(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - out.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double s2 = pairwise_sum(d2);
  const double s4 = pairwise_sum(d4);
  out.variance = s2 / (m - 1.0);
  const double m2 = s2 / m;
  if (m2 > 0.0) {
    const double g2 = (s4 / m) / (m2 * m2) - 3.0;
    out.excess_kurtosis = ((m + 1.0) * g2 + 6.0) * (m - 1.0) / ((m - 2.0) * (m - 3.0));
  } else {
    out.excess_kurtosis = kNaN;
  }
  return out;
}

const char* to_string(CltVerdict v) {
  switch (v) {
    case CltVerdict::Consistent: return "consistent";
    case CltVerdict::Inconsistent: return "inconsistent";
    case CltVerdict::Degenerate: return "degenerate";
  }
  return "inconsistent";
}

CltReport verdict_from_samples(std::span<const double> samples, double sigma2_theory, int n,
                               const CltTolerances& tol, std::optional<double> degenerate_bound) {
  if (static_cast<int>(samples.size()) < kMinKsSamples)
    throw Error(ErrorKind::InvalidArgument, "the asymptotic KS threshold needs at least 500 samples");
  CltReport r;
  r.n = n;
  r.samples = static_cast<int>(samples.size());
  r.sigma2_theory = sigma2_theory;
  r.moments = moment_summary(samples);
  r.sample_variance = r.moments.variance;
  r.remainder_prob = kNaN;
  r.degenerate_bound = degenerate_bound.value_or(kNaN);
  for (double x : samples) r.max_abs_sample = std::max(r.max_abs_sample, std::abs(x));
  const double m = static_cast<double>(samples.size());
  r.psi_deviation = cf_diagnostic(samples, std::max(sigma2_theory, 0.0), tol.t_grid);

  if (sigma2_theory < tol.degeneracy) {
    r.verdict = CltVerdict::Degenerate;
    r.ks_distance = kNaN;
    r.ks_threshold = tol.ks_constant / std::sqrt(m);
    r.variance_band = kNaN;
    return r;
  }
  const KsResult ks = ks_statistic(samples, sigma2_theory);
  r.ks_distance = ks.distance;
  r.ks_threshold = tol.ks_constant / std::sqrt(m);
  r.variance_band = tol.variance_sigmas * sigma2_theory * std::sqrt(2.0 / m);
  const bool ks_ok = r.ks_distance < r.ks_threshold;
  const bool var_ok = std::abs(r.sample_variance - sigma2_theory) < r.variance_band;
  r.verdict = ks_ok && var_ok ? CltVerdict::Consistent : CltVerdict::Inconsistent;
  return r;
}

bool degenerate_samples_bounded(const CltReport& r) {
  return r.verdict == CltVerdict::Degenerate && std::isfinite(r.degenerate_bound) &&
         r.max_abs_sample <= r.degenerate_bound;
}

CltReport verdict(const TransitionModel& model, const CylinderFunction& f, double sigma2_theory,
                  int n, int m, std::uint64_t seed, const CltTolerances& tol, int workers,
                  std::vector<double>* samples_out) {
  std::vector<double> samples = simulate_birkhoff(model, f, n, m, seed, workers);

  // Sums of U^k f have the law of sums of f, so the decomposition is taken
  // for the translate starting at coordinate 0 on the one-sided twin.
  const TransitionModel twin = model.with_sidedness(Sidedness::OneSided);
  const CylinderFunction f0 = f.shifted(-f.offset());
  std::optional<CylinderFunction> g;
  try {
    g = decompose(twin, f0).g;
  } catch (const Error&) {
    g.reset();
  }
  std::optional<double> bound;
  if (g) bound = (sup_norm(f0) + 2.0 * sup_norm(*g)) / std::sqrt(static_cast<double>(n));

  CltReport r = verdict_from_samples(samples, sigma2_theory, n, tol, bound);
  if (g) {
    r.remainder_prob =
        remainder_probability(twin, f0, *g, {n}, tol.remainder_eps, m, mix64(seed ^ 0x52454D41494EULL))[0];
  }
  if (samples_out) *samples_out = std::move(samples);
  return r;
}

}  // namespace ergoclt
