#include "ergoclt/markov_shift.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "ergoclt/errors.hpp"

namespace ergoclt {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr int kDirectSolveLimit = 64;

std::vector<int> bfs_levels(const Matrix& P, bool transpose) {
  const int m = static_cast<int>(P.rows());
  std::vector<int> level(m, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < m; ++v) {
      const double w = transpose ? P(v, u) : P(u, v);
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

Matrix matrix_power(const Matrix& base, int d) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  Matrix b = base;
  while (d > 0) {
    if (d & 1) result = result * b;
    d >>= 1;
    if (d > 0) b = b * b;
  }
  return result;
}

}  // namespace

const char* to_string(Sidedness s) {
  return s == Sidedness::OneSided ? "one_sided" : "two_sided";
}

TransitionModel::TransitionModel(Matrix transition, Vector stationary, Sidedness sidedness,
                                 ErgodicClass ergodic)
    : transition_(std::move(transition)),
      stationary_(std::move(stationary)),
      sidedness_(sidedness),
      ergodic_(ergodic) {
  const int m = alphabet_size();
  reverse_.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) reverse_(i, j) = stationary_(j) * transition_(j, i) / stationary_(i);
}

Matrix TransitionModel::power(int d) const { return matrix_power(transition_, d); }

Matrix TransitionModel::reverse_power(int d) const { return matrix_power(reverse_, d); }

TransitionModel TransitionModel::with_sidedness(Sidedness s) const {
  return TransitionModel(transition_, stationary_, s, ergodic_);
}

ErgodicClass classify(const Matrix& P) {
  ErgodicClass out;
  const auto fwd = bfs_levels(P, false);
  const auto bwd = bfs_levels(P, true);
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (fwd[i] < 0 || bwd[i] < 0) return out;
  out.irreducible = true;
  // Every edge u->v closes a cycle through 0 whose length differs from a
  // multiple of the period by level[u] + 1 - level[v].
  int g = 0;
  const int m = static_cast<int>(P.rows());
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v)
      if (P(u, v) > 0.0) g = std::gcd(g, std::abs(fwd[u] + 1 - fwd[v]));
  out.period = g;
  return out;
}

Vector stationary_distribution(const Matrix& P) {
  const int m = static_cast<int>(P.rows());
  if (!classify(P).irreducible)
    throw Error(ErrorKind::Reducible, "stationary law is not unique for a reducible chain");

  Vector pi;
  if (m <= kDirectSolveLimit) {
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Matrix A = P.transpose() - Matrix::Identity(m, m);
    A.row(m - 1).setOnes();
    Vector rhs = Vector::Zero(m);
    rhs(m - 1) = 1.0;
    pi = A.fullPivLu().solve(rhs);
  } else {
    const Matrix lazy = 0.5 * (P + Matrix::Identity(m, m));
    pi = Vector::Constant(m, 1.0 / m);
    for (int it = 0; it < 1000000; ++it) {
      Vector next = lazy.transpose() * pi;
      next /= next.sum();
      const double change = (next - pi).lpNorm<Eigen::Infinity>();
      pi = std::move(next);
      if (change < 1e-16) break;
    }
  }
  for (int i = 0; i < m; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  return pi;
}

TransitionModel build_shift(const Matrix& transition, Sidedness sidedness) {
  const auto m = transition.rows();
  if (m < 2 || transition.cols() != m) {
    std::ostringstream os;
    os << "transition matrix must be square with at least 2 states, got " << m << "x"
       << transition.cols();
    throw Error(ErrorKind::NotStochastic, os.str());
  }
  Matrix P = transition;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!std::isfinite(P(i, j)) || P(i, j) < 0.0) {
        std::ostringstream os;
        os << "row " << i << " has invalid entry " << P(i, j);
        throw Error(ErrorKind::NotStochastic, os.str());
      }
    }
    const double s = P.row(i).sum();
    if (std::abs(s - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << s;
      throw Error(ErrorKind::NotStochastic, os.str());
    }
    P.row(i) /= s;
  }
  const ErgodicClass ergodic = classify(P);
  if (!ergodic.irreducible)
    throw Error(ErrorKind::Reducible, "transition graph is not strongly connected");
  Vector pi = stationary_distribution(P);
  return TransitionModel(std::move(P), std::move(pi), sidedness, ergodic);
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))) {}

StreamRng::result_type StreamRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

SymbolSampler::SymbolSampler(const TransitionModel& model)
    : SymbolSampler(model.stationary(), model.transition()) {}

SymbolSampler::SymbolSampler(const Vector& initial, const Matrix& transition)
    : m_(static_cast<int>(initial.size())),
      initial_cum_(static_cast<std::size_t>(m_)),
      row_cum_(static_cast<std::size_t>(m_) * m_) {
  double acc = 0.0;
  for (int j = 0; j < m_; ++j) initial_cum_[j] = acc += initial(j);
  initial_cum_[m_ - 1] = 1.0;
  for (int i = 0; i < m_; ++i) {
    acc = 0.0;
    for (int j = 0; j < m_; ++j) row_cum_[i * m_ + j] = acc += transition(i, j);
    row_cum_[i * m_ + m_ - 1] = 1.0;
  }
}

int SymbolSampler::draw(const double* cumulative, int m, double u) {
  for (int j = 0; j < m - 1; ++j)
    if (u < cumulative[j]) return j;
  return m - 1;
}

int SymbolSampler::initial(StreamRng& rng) const {
  return draw(initial_cum_.data(), m_, rng.uniform());
}

int SymbolSampler::next(int current, StreamRng& rng) const {
  return draw(row_cum_.data() + static_cast<std::size_t>(current) * m_, m_, rng.uniform());
}

OrbitSample sample_orbit(const TransitionModel& model, int length, std::uint64_t seed,
                         std::uint64_t stream) {
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "orbit length must be >= 1");
  OrbitSample out;
  out.seed = seed;
  out.stream = stream;
  out.symbols.resize(static_cast<std::size_t>(length));
  const SymbolSampler sampler(model);
  StreamRng rng(seed, stream);
  out.symbols[0] = sampler.initial(rng);
  for (int t = 1; t < length; ++t) out.symbols[t] = sampler.next(out.symbols[t - 1], rng);
  return out;
}

}  // namespace ergoclt
