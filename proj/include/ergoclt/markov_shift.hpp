#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace ergoclt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One-sided shifts carry the decreasing filtration F_k = sigma(coords >= k);
/// two-sided shifts are invertible and carry F_k = sigma(coords <= k).
enum class Sidedness { OneSided, TwoSided };

const char* to_string(Sidedness s);

struct ErgodicClass {
  bool irreducible = false;
  int period = 0;  // 0 when reducible
};

/// Stationary finite-alphabet Markov shift. Immutable after construction, so
/// it can be shared freely between worker threads.
class TransitionModel {
 public:
  TransitionModel(Matrix transition, Vector stationary, Sidedness sidedness, ErgodicClass ergodic);

  int alphabet_size() const { return static_cast<int>(transition_.rows()); }
  const Matrix& transition() const { return transition_; }
  const Vector& stationary() const { return stationary_; }
  Sidedness sidedness() const { return sidedness_; }
  const ErgodicClass& ergodic_class() const { return ergodic_; }
  bool is_aperiodic() const { return ergodic_.period == 1; }

  /// Transition matrix of the time-reversed chain, b(j|i) = pi_j P[j][i] / pi_i.
  const Matrix& reverse_transition() const { return reverse_; }

  /// d-step transition matrix; d = 0 gives the identity.
  Matrix power(int d) const;
  Matrix reverse_power(int d) const;

  /// Same chain with the other sidedness.
  TransitionModel with_sidedness(Sidedness s) const;

 private:
  Matrix transition_;
  Vector stationary_;
  Sidedness sidedness_;
  ErgodicClass ergodic_;
  Matrix reverse_;
};

/// Validates and renormalizes a row-stochastic matrix, solves the stationary
/// law and rejects reducible chains.
TransitionModel build_shift(const Matrix& transition, Sidedness sidedness);

/// Unique stationary probability vector. Direct linear solve up to 64 states,
/// power iteration on the lazy chain above that.
Vector stationary_distribution(const Matrix& transition);

/// Irreducibility from strong connectivity of the positive-entry digraph;
/// period is the gcd of cycle lengths through state 0.
ErgodicClass classify(const Matrix& transition);

/// Counter-based generator: output i of stream s is a bijective mix of
/// (key(seed, s) + i * golden). Distinct streams never share state, so
/// parallel batches reproduce regardless of scheduling.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

struct OrbitSample {
  std::vector<int> symbols;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Cumulative rows used for inverse-CDF sampling of the next symbol.
class SymbolSampler {
 public:
  explicit SymbolSampler(const TransitionModel& model);
  SymbolSampler(const Vector& initial, const Matrix& transition);

  int initial(StreamRng& rng) const;
  int next(int current, StreamRng& rng) const;
  int alphabet_size() const { return m_; }

 private:
  static int draw(const double* cumulative, int m, double u);

  int m_;
  std::vector<double> initial_cum_;
  std::vector<double> row_cum_;  // row-major, m x m
};

/// Stationary orbit of `length` symbols; a pure function of
/// (model, length, seed, stream).
OrbitSample sample_orbit(const TransitionModel& model, int length, std::uint64_t seed,
                         std::uint64_t stream = 0);

}  // namespace ergoclt
