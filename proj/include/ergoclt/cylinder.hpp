#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ergoclt/markov_shift.hpp"

namespace ergoclt {

/// Observable depending on the coordinates [offset, offset + length).
/// `values` is indexed by words in lexicographic order with the first
/// coordinate most significant; length 0 is a constant (one value).
class CylinderFunction {
 public:
  /// The zero observable on a binary alphabet.
  CylinderFunction() : CylinderFunction(2, 0, 0, Vector::Zero(1)) {}
  CylinderFunction(int alphabet_size, int offset, int length, Vector values);

  static CylinderFunction constant(int alphabet_size, double c);
  /// 1{omega_offset = symbol}.
  static CylinderFunction indicator(int alphabet_size, int offset, int symbol);
  /// +1 on symbol 0, -1 on symbol 1 at the given coordinate (m = 2).
  static CylinderFunction rademacher(int offset);
  static CylinderFunction from_values(int alphabet_size, int offset, int length,
                                      const std::vector<double>& values);

  int alphabet_size() const { return m_; }
  int offset() const { return offset_; }
  int length() const { return length_; }
  /// One past the last coordinate in the window.
  int end() const { return offset_ + length_; }
  bool is_constant() const { return length_ == 0; }
  const Vector& values() const { return values_; }
  double value_at(std::size_t word_index) const { return values_(static_cast<Eigen::Index>(word_index)); }

  CylinderFunction shifted(int delta) const;

 private:
  int m_;
  int offset_;
  int length_;
  Vector values_;
};

/// Largest admissible table size m^L; default 2^20 (L <= 20 at m = 2).
std::size_t table_cap();
void set_table_cap(std::size_t entries);

/// m^L with a CapExceeded error past the table cap.
std::size_t table_size(int alphabet_size, int length);

/// Symbols for the coordinates [start, start + symbols.size()).
struct Window {
  int start = 0;
  std::span<const int> symbols;
};

double evaluate(const CylinderFunction& f, const Window& window);
double evaluate(const CylinderFunction& f, std::span<const int> word);

enum class CombineOp { Add, Sub, Mul };

/// Pointwise (alpha f) op (beta h) on the covering window, then trimmed.
CylinderFunction combine(const CylinderFunction& f, const CylinderFunction& h, CombineOp op,
                         double alpha = 1.0, double beta = 1.0);

CylinderFunction operator+(const CylinderFunction& f, const CylinderFunction& h);
CylinderFunction operator-(const CylinderFunction& f, const CylinderFunction& h);
CylinderFunction operator*(const CylinderFunction& f, const CylinderFunction& h);
CylinderFunction operator*(double s, const CylinderFunction& f);

/// Pointwise map of the table, e.g. absolute value.
CylinderFunction apply(const CylinderFunction& f, const std::function<double(double)>& fn);

/// Re-expresses f on the larger window [start, end).
CylinderFunction lift(const CylinderFunction& f, int start, int end);

/// Drops leading/trailing coordinates the table does not depend on;
/// constants end up with length 0 and offset 0.
CylinderFunction trim(const CylinderFunction& f, double rel_tol = 1e-14);

/// Throws WindowMismatch / SidednessMismatch when f cannot live on the model.
void check_compatible(const TransitionModel& model, const CylinderFunction& f);

/// Exact integral against the stationary Markov measure.
double expectation(const TransitionModel& model, const CylinderFunction& f);
double inner_product(const TransitionModel& model, const CylinderFunction& f,
                     const CylinderFunction& h);
double l2_norm(const TransitionModel& model, const CylinderFunction& f);
double sup_norm(const CylinderFunction& f);

/// E(f * U^n h) for n = 0..max_lag.
std::vector<double> lag_moments(const TransitionModel& model, const CylinderFunction& f,
                                const CylinderFunction& h, int max_lag);

/// Koopman operator U f = f o T; the window moves one coordinate right.
CylinderFunction koopman(const CylinderFunction& f, int power = 1);
/// U^{-1} on invertible (two-sided) shifts.
CylinderFunction koopman_inverse(const TransitionModel& model, const CylinderFunction& f,
                                 int power = 1);

/// Adjoint U* on a one-sided shift (Perron-Frobenius operator):
/// (U* f)(w) = sum_j b(j | w_0) f(j w) with reverse-chain weights b.
CylinderFunction transfer(const TransitionModel& model, const CylinderFunction& f);

struct FiltrationIndex {
  int k = 0;
};

/// E(f | F_k) under the model's own filtration.
CylinderFunction conditional(const TransitionModel& model, const CylinderFunction& f,
                             FiltrationIndex index);
/// E(f | sigma(coords >= k)), valid on either sidedness.
CylinderFunction conditional_on_future(const TransitionModel& model, const CylinderFunction& f,
                                       int k);
/// E(f | sigma(coords <= k)), two-sided shifts only.
CylinderFunction conditional_on_past(const TransitionModel& model, const CylinderFunction& f,
                                     int k);

/// Projection onto S_k = H_{k+1} minus H_k on a two-sided shift.
CylinderFunction project_sk(const TransitionModel& model, const CylinderFunction& h, int k);

/// Text block: "offset <a>", "length <L>", then the m^L values in
/// lexicographic word order, comma separated.
std::string to_text(const CylinderFunction& f);
CylinderFunction parse_observable(const std::string& text, int alphabet_size);

}  // namespace ergoclt
