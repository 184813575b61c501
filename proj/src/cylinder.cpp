#include "ergoclt/cylinder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoclt/errors.hpp"

namespace ergoclt {

namespace {

std::atomic<std::size_t> g_table_cap{std::size_t{1} << 20};

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Decodes a word index of length L into symbols (first coordinate first).
void decode(std::size_t idx, int m, int L, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(L));
  for (int i = L - 1; i >= 0; --i) {
    out[i] = static_cast<int>(idx % m);
    idx /= m;
  }
}

/// mu(w) = pi(w_0) prod P(w_i, w_{i+1}) for every word of length L >= 1.
std::vector<double> word_measure(const TransitionModel& model, int L) {
  const int m = model.alphabet_size();
  const Matrix& P = model.transition();
  std::vector<double> mu(model.stationary().data(), model.stationary().data() + m);
  for (int len = 1; len < L; ++len) {
    std::vector<double> next(mu.size() * m);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
      const int last = static_cast<int>(idx % m);
      for (int s = 0; s < m; ++s) next[idx * m + s] = mu[idx] * P(last, s);
    }
    mu = std::move(next);
  }
  return mu;
}

/// u_t = E[f 1{omega_{end-1} = t}].
Vector last_symbol_weights(const TransitionModel& model, const CylinderFunction& f) {
  const int m = model.alphabet_size();
  const auto mu = word_measure(model, f.length());
  Vector u = Vector::Zero(m);
  for (std::size_t idx = 0; idx < mu.size(); ++idx) u(idx % m) += mu[idx] * f.value_at(idx);
  return u;
}

/// c_s = E[f | omega_offset = s].
Vector first_symbol_conditional(const TransitionModel& model, const CylinderFunction& f) {
  const int m = model.alphabet_size();
  const int L = f.length();
  const Matrix& P = model.transition();
  const std::size_t tail = ipow(m, L - 1);
  Vector c = Vector::Zero(m);
  std::vector<int> w;
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(f.values().size()); ++idx) {
    decode(idx, m, L, w);
    double weight = 1.0;
    for (int i = 0; i + 1 < L; ++i) weight *= P(w[i], w[i + 1]);
    c(static_cast<Eigen::Index>(idx / tail)) += weight * f.value_at(idx);
  }
  return c;
}

bool disjoint(const CylinderFunction& f, const CylinderFunction& h) {
  return f.end() <= h.offset() || h.end() <= f.offset();
}

/// E(left * right) for windows with left.end() <= right.offset().
double disjoint_moment(const TransitionModel& model, const CylinderFunction& left,
                       const CylinderFunction& right) {
  const int gap = right.offset() - (left.end() - 1);
  const Vector u = last_symbol_weights(model, left);
  const Vector c = first_symbol_conditional(model, right);
  return u.dot(model.power(gap) * c);
}

}  // namespace

CylinderFunction::CylinderFunction(int alphabet_size, int offset, int length, Vector values)
    : m_(alphabet_size), offset_(length == 0 ? 0 : offset), length_(length), values_(std::move(values)) {
  if (m_ < 2) throw Error(ErrorKind::InvalidArgument, "alphabet size must be >= 2");
  if (length_ < 0) throw Error(ErrorKind::InvalidArgument, "window length must be >= 0");
  const std::size_t expected = table_size(m_, length_);
  if (static_cast<std::size_t>(values_.size()) != expected) {
    std::ostringstream os;
    os << "value table has " << values_.size() << " entries, expected " << expected;
    throw Error(ErrorKind::WindowMismatch, os.str());
  }
}

CylinderFunction CylinderFunction::constant(int alphabet_size, double c) {
  return CylinderFunction(alphabet_size, 0, 0, Vector::Constant(1, c));
}

CylinderFunction CylinderFunction::indicator(int alphabet_size, int offset, int symbol) {
  Vector v = Vector::Zero(alphabet_size);
  v(symbol) = 1.0;
  return CylinderFunction(alphabet_size, offset, 1, std::move(v));
}

CylinderFunction CylinderFunction::rademacher(int offset) {
  Vector v(2);
  v << 1.0, -1.0;
  return CylinderFunction(2, offset, 1, std::move(v));
}

CylinderFunction CylinderFunction::from_values(int alphabet_size, int offset, int length,
                                               const std::vector<double>& values) {
  Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return CylinderFunction(alphabet_size, offset, length, std::move(v));
}

CylinderFunction CylinderFunction::shifted(int delta) const {
  if (is_constant()) return *this;
  return CylinderFunction(m_, offset_ + delta, length_, values_);
}

std::size_t table_cap() { return g_table_cap.load(); }
void set_table_cap(std::size_t entries) { g_table_cap.store(entries); }

std::size_t table_size(int m, int length) {
  const std::size_t cap = table_cap();
  std::size_t r = 1;
  for (int i = 0; i < length; ++i) {
    r *= static_cast<std::size_t>(m);
    if (r > cap) {
      std::ostringstream os;
      os << "window of length " << length << " over " << m << " symbols exceeds the table cap of "
         << cap << " entries";
      throw Error(ErrorKind::CapExceeded, os.str());
    }
  }
  return r;
}

double evaluate(const CylinderFunction& f, const Window& window) {
  const int have_end = window.start + static_cast<int>(window.symbols.size());
  if (!f.is_constant() && (window.start > f.offset() || have_end < f.end())) {
    std::ostringstream os;
    os << "window [" << window.start << ", " << have_end << ") does not cover [" << f.offset()
       << ", " << f.end() << ")";
    throw Error(ErrorKind::WindowMismatch, os.str());
  }
  std::size_t idx = 0;
  for (int c = f.offset(); c < f.end(); ++c) {
    const int s = window.symbols[static_cast<std::size_t>(c - window.start)];
    if (s < 0 || s >= f.alphabet_size())
      throw Error(ErrorKind::WindowMismatch, "symbol outside the alphabet");
    idx = idx * f.alphabet_size() + static_cast<std::size_t>(s);
  }
  return f.value_at(idx);
}

double evaluate(const CylinderFunction& f, std::span<const int> word) {
  if (static_cast<int>(word.size()) != f.length() && !f.is_constant())
    throw Error(ErrorKind::WindowMismatch, "word length differs from the window length");
  return evaluate(f, Window{f.offset(), word});
}

CylinderFunction lift(const CylinderFunction& f, int start, int end) {
  if (f.is_constant()) {
    const int m = f.alphabet_size();
    return CylinderFunction(m, start, end - start,
                            Vector::Constant(static_cast<Eigen::Index>(table_size(m, end - start)),
                                             f.value_at(0)));
  }
  if (start > f.offset() || end < f.end())
    throw Error(ErrorKind::WindowMismatch, "lift target must cover the current window");
  const int m = f.alphabet_size();
  const int L = end - start;
  const std::size_t n = table_size(m, L);
  const std::size_t right = ipow(m, end - f.end());
  const std::size_t modulus = ipow(m, f.length());
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t idx = 0; idx < n; ++idx) v(idx) = f.value_at((idx / right) % modulus);
  return CylinderFunction(m, start, L, std::move(v));
}

CylinderFunction trim(const CylinderFunction& f, double rel_tol) {
  if (f.is_constant()) return f;
  const int m = f.alphabet_size();
  const double tol = rel_tol * std::max(1.0, f.values().cwiseAbs().maxCoeff());
  int offset = f.offset();
  int L = f.length();
  Vector v = f.values();

  auto drop_first = [&]() {
    const std::size_t block = ipow(m, L - 1);
    for (int s = 1; s < m; ++s)
      for (std::size_t i = 0; i < block; ++i)
        if (std::abs(v(s * block + i) - v(i)) > tol) return false;
    Vector next = Vector::Zero(static_cast<Eigen::Index>(block));
    for (int s = 0; s < m; ++s) next += v.segment(static_cast<Eigen::Index>(s * block), block);
    v = next / m;
    ++offset;
    --L;
    return true;
  };
  auto drop_last = [&]() {
    const std::size_t groups = ipow(m, L - 1);
    for (std::size_t g = 0; g < groups; ++g)
      for (int s = 1; s < m; ++s)
        if (std::abs(v(g * m + s) - v(g * m)) > tol) return false;
    Vector next(static_cast<Eigen::Index>(groups));
    for (std::size_t g = 0; g < groups; ++g) next(g) = v.segment(g * m, m).mean();
    v = std::move(next);
    --L;
    return true;
  };

  while (L > 0 && drop_first()) {
  }
  while (L > 0 && drop_last()) {
  }
  return CylinderFunction(m, offset, L, std::move(v));
}

CylinderFunction combine(const CylinderFunction& f, const CylinderFunction& h, CombineOp op,
                         double alpha, double beta) {
  if (f.alphabet_size() != h.alphabet_size())
    throw Error(ErrorKind::WindowMismatch, "observables use different alphabets");
  const int m = f.alphabet_size();
  int start = 0;
  int end = 0;
  if (!f.is_constant() && !h.is_constant()) {
    start = std::min(f.offset(), h.offset());
    end = std::max(f.end(), h.end());
  } else if (!f.is_constant()) {
    start = f.offset();
    end = f.end();
  } else if (!h.is_constant()) {
    start = h.offset();
    end = h.end();
  }
  const CylinderFunction a = lift(f, start, end);
  const CylinderFunction b = lift(h, start, end);
  Vector v;
  switch (op) {
    case CombineOp::Add: v = alpha * a.values() + beta * b.values(); break;
    case CombineOp::Sub: v = alpha * a.values() - beta * b.values(); break;
    case CombineOp::Mul: v = (alpha * a.values()).cwiseProduct(beta * b.values()); break;
  }
  return trim(CylinderFunction(m, start, end - start, std::move(v)));
}

CylinderFunction operator+(const CylinderFunction& f, const CylinderFunction& h) {
  return combine(f, h, CombineOp::Add);
}
CylinderFunction operator-(const CylinderFunction& f, const CylinderFunction& h) {
  return combine(f, h, CombineOp::Sub);
}
CylinderFunction operator*(const CylinderFunction& f, const CylinderFunction& h) {
  return combine(f, h, CombineOp::Mul);
}
CylinderFunction operator*(double s, const CylinderFunction& f) {
  return CylinderFunction(f.alphabet_size(), f.offset(), f.length(), s * f.values());
}

CylinderFunction apply(const CylinderFunction& f, const std::function<double(double)>& fn) {
  Vector v = f.values().unaryExpr(fn);
  return trim(CylinderFunction(f.alphabet_size(), f.offset(), f.length(), std::move(v)));
}

void check_compatible(const TransitionModel& model, const CylinderFunction& f) {
  if (f.alphabet_size() != model.alphabet_size())
    throw Error(ErrorKind::WindowMismatch, "observable alphabet differs from the model");
  if (model.sidedness() == Sidedness::OneSided && !f.is_constant() && f.offset() < 0)
    throw Error(ErrorKind::WindowMismatch, "one-sided shifts have no negative coordinates");
}

double expectation(const TransitionModel& model, const CylinderFunction& f) {
  check_compatible(model, f);
  if (f.is_constant()) return f.value_at(0);
  const auto mu = word_measure(model, f.length());
  double acc = 0.0;
  for (std::size_t idx = 0; idx < mu.size(); ++idx) acc += mu[idx] * f.value_at(idx);
  return acc;
}

double inner_product(const TransitionModel& model, const CylinderFunction& f,
                     const CylinderFunction& h) {
  check_compatible(model, f);
  check_compatible(model, h);
  if (f.is_constant()) return f.value_at(0) * expectation(model, h);
  if (h.is_constant()) return h.value_at(0) * expectation(model, f);
  if (disjoint(f, h))
    return f.end() <= h.offset() ? disjoint_moment(model, f, h) : disjoint_moment(model, h, f);
  return expectation(model, combine(f, h, CombineOp::Mul));
}

double l2_norm(const TransitionModel& model, const CylinderFunction& f) {
  return std::sqrt(std::max(0.0, inner_product(model, f, f)));
}

double sup_norm(const CylinderFunction& f) { return f.values().cwiseAbs().maxCoeff(); }

std::vector<double> lag_moments(const TransitionModel& model, const CylinderFunction& f,
                                const CylinderFunction& h, int max_lag) {
  check_compatible(model, f);
  check_compatible(model, h);
  std::vector<double> out(static_cast<std::size_t>(std::max(max_lag + 1, 0)));
  if (f.is_constant() || h.is_constant()) {
    const double v = f.is_constant() ? f.value_at(0) * expectation(model, h)
                                     : h.value_at(0) * expectation(model, f);
    std::fill(out.begin(), out.end(), v);
    return out;
  }
  // Once U^n h sits strictly right of f, E(f U^n h) = u^T P^gap c with the
  // row vector u propagated one step per lag.
  const int first_right = std::max(0, f.end() - h.offset());
  for (int n = 0; n <= max_lag && n < first_right; ++n) out[n] = inner_product(model, f, koopman(h, n));
  if (first_right > max_lag) return out;
  const Vector c = first_symbol_conditional(model, h);
  Eigen::RowVectorXd u = last_symbol_weights(model, f).transpose();
  u = u * model.power(h.offset() + first_right - (f.end() - 1));
  const Matrix& P = model.transition();
  for (int n = first_right; n <= max_lag; ++n) {
    out[n] = u.dot(c.transpose());
    u = u * P;
  }
  return out;
}

CylinderFunction koopman(const CylinderFunction& f, int power) { return f.shifted(power); }

CylinderFunction koopman_inverse(const TransitionModel& model, const CylinderFunction& f, int power) {
  if (model.sidedness() != Sidedness::TwoSided)
    throw Error(ErrorKind::SidednessMismatch, "U^{-1} exists only on two-sided shifts");
  return f.shifted(-power);
}

CylinderFunction transfer(const TransitionModel& model, const CylinderFunction& f) {
  if (model.sidedness() != Sidedness::OneSided)
    throw Error(ErrorKind::SidednessMismatch,
                "transfer operator is defined on one-sided shifts; use koopman_inverse");
  check_compatible(model, f);
  if (f.is_constant()) return f;
  if (f.offset() >= 1) return f.shifted(-1);

  const int m = model.alphabet_size();
  const Matrix& b = model.reverse_transition();
  const int L = f.length();
  if (L == 1) {
    Vector v = b * f.values();
    return trim(CylinderFunction(m, 0, 1, std::move(v)));
  }
  const std::size_t rest = ipow(m, L - 1);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(rest));
  for (std::size_t u = 0; u < rest; ++u) {
    const int first = static_cast<int>(u / ipow(m, L - 2));
    for (int j = 0; j < m; ++j) v(u) += b(first, j) * f.value_at(j * rest + u);
  }
  return trim(CylinderFunction(m, 0, L - 1, std::move(v)));
}

CylinderFunction conditional_on_future(const TransitionModel& model, const CylinderFunction& f,
                                       int k) {
  if (f.alphabet_size() != model.alphabet_size())
    throw Error(ErrorKind::WindowMismatch, "observable alphabet differs from the model");
  if (f.is_constant() || f.offset() >= k) return f;
  const int m = model.alphabet_size();
  const Vector& pi = model.stationary();

  if (f.end() <= k) {
    // Depends on omega_k only: E[f 1{omega_k = s}] / pi_s.
    const Eigen::RowVectorXd joint =
        last_symbol_weights(model, f).transpose() * model.power(k - f.end() + 1);
    Vector v = joint.transpose().cwiseQuotient(pi);
    return trim(CylinderFunction(m, k, 1, std::move(v)));
  }

  const Matrix& P = model.transition();
  const int L = f.length();
  const int prefix = k - f.offset();
  const int R = f.end() - k;
  const std::size_t modulus = ipow(m, R);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(modulus));
  std::vector<int> w;
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(f.values().size()); ++idx) {
    decode(idx, m, L, w);
    double weight = pi(w[0]);
    for (int i = 0; i < prefix; ++i) weight *= P(w[i], w[i + 1]);
    weight /= pi(w[prefix]);
    v(idx % modulus) += weight * f.value_at(idx);
  }
  return trim(CylinderFunction(m, k, R, std::move(v)));
}

CylinderFunction conditional_on_past(const TransitionModel& model, const CylinderFunction& f,
                                     int k) {
  if (model.sidedness() != Sidedness::TwoSided)
    throw Error(ErrorKind::SidednessMismatch, "past filtrations need a two-sided shift");
  check_compatible(model, f);
  if (f.is_constant() || f.end() - 1 <= k) return f;
  const int m = model.alphabet_size();

  if (f.offset() > k) {
    Vector v = model.power(f.offset() - k) * first_symbol_conditional(model, f);
    return trim(CylinderFunction(m, k, 1, std::move(v)));
  }

  const Matrix& P = model.transition();
  const int L = f.length();
  const int R = k + 1 - f.offset();
  const std::size_t divisor = ipow(m, L - R);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(ipow(m, R)));
  std::vector<int> w;
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(f.values().size()); ++idx) {
    decode(idx, m, L, w);
    double weight = 1.0;
    for (int i = R - 1; i + 1 < L; ++i) weight *= P(w[i], w[i + 1]);
    v(idx / divisor) += weight * f.value_at(idx);
  }
  return trim(CylinderFunction(m, f.offset(), R, std::move(v)));
}

CylinderFunction conditional(const TransitionModel& model, const CylinderFunction& f,
                             FiltrationIndex index) {
  check_compatible(model, f);
  if (model.sidedness() == Sidedness::OneSided) {
    if (index.k < 0)
      throw Error(ErrorKind::InvalidIndex, "one-sided filtrations start at F_0");
    return conditional_on_future(model, f, index.k);
  }
  return conditional_on_past(model, f, index.k);
}

CylinderFunction project_sk(const TransitionModel& model, const CylinderFunction& h, int k) {
  if (model.sidedness() != Sidedness::TwoSided)
    throw Error(ErrorKind::SidednessMismatch, "S_k projections need a two-sided shift");
  return conditional_on_past(model, h, k + 1) - conditional_on_past(model, h, k);
}

std::string to_text(const CylinderFunction& f) {
  std::ostringstream os;
  os.precision(17);
  os << "offset " << f.offset() << "\nlength " << f.length() << "\nvalues ";
  for (Eigen::Index i = 0; i < f.values().size(); ++i) os << (i ? ", " : "") << f.values()(i);
  os << "\n";
  return os.str();
}

CylinderFunction parse_observable(const std::string& text, int alphabet_size) {
  std::istringstream in(text);
  std::string line;
  int offset = 0;
  int length = -1;
  std::vector<double> values;
  bool have_values = false;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string rest;
    std::getline(ls, rest);
    std::replace(rest.begin(), rest.end(), ',', ' ');
    std::istringstream rs(rest);
    if (key == "offset") {
      if (!(rs >> offset)) throw Error(ErrorKind::Config, "observable offset is not an integer");
    } else if (key == "length") {
      if (!(rs >> length) || length < 0)
        throw Error(ErrorKind::Config, "observable length must be a non-negative integer");
    } else if (key == "values") {
      have_values = true;
      std::string tok;
      while (rs >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size()) throw Error(ErrorKind::Config, "bad observable value '" + tok + "'");
        values.push_back(v);
      }
    } else {
      throw Error(ErrorKind::Config, "unknown observable key '" + key + "'");
    }
  }
  if (length < 0 || !have_values)
    throw Error(ErrorKind::Config, "observable needs offset, length and values");
  if (values.size() != table_size(alphabet_size, length)) {
    std::ostringstream os;
    os << "observable lists " << values.size() << " values, expected "
       << table_size(alphabet_size, length);
    throw Error(ErrorKind::Config, os.str());
  }
  return CylinderFunction::from_values(alphabet_size, offset, length, values);
}

}  // namespace ergoclt
