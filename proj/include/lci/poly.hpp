// Dense univariate polynomials and truncated power series over a scalar type
// (std::complex<double> or GaussRational).
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lci/exact.hpp"

namespace lci {

using cplx = std::complex<double>;

template <class T>
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }

  static Poly monomial(std::size_t k, T coeff = T(1)) {
    std::vector<T> c(k + 1, T(0));
    c[k] = coeff;
    return Poly(std::move(c));
  }

  /// Degree; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coeffs() const { return c_; }
  T operator[](std::size_t k) const { return k < c_.size() ? c_[k] : T(0); }
  T leading() const { return c_.empty() ? T(0) : c_.back(); }

  /// Index of the lowest nonzero coefficient; -1 for the zero polynomial.
  int lowest_index() const {
    for (std::size_t k = 0; k < c_.size(); ++k)
      if (!is_exact_zero(c_[k])) return static_cast<int>(k);
    return -1;
  }

  template <class U>
  U operator()(const U& x) const {
    U acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + U(*it);
    return acc;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<T> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * T(static_cast<std::int64_t>(k));
    return Poly(std::move(d));
  }

  /// Antiderivative with zero constant term.
  Poly integral() const {
    std::vector<T> d(c_.size() + 1, T(0));
    for (std::size_t k = 0; k < c_.size(); ++k) d[k + 1] = c_[k] / T(static_cast<std::int64_t>(k + 1));
    return Poly(std::move(d));
  }

  /// p(t + shift)
  Poly taylor_shift(const T& shift) const {
    std::vector<T> a = c_;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t k = n - 1; k > i; --k) a[k - 1] = a[k - 1] + shift * a[k];
    return Poly(std::move(a));
  }

  /// p(scale * t)
  Poly scale_arg(const T& scale) const {
    std::vector<T> a = c_;
    T s(1);
    for (auto& v : a) {
      v = v * s;
      s = s * scale;
    }
    return Poly(std::move(a));
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<T> r(std::max(a.c_.size(), b.c_.size()), T(0));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k] + b[k];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a) {
    std::vector<T> r = a.c_;
    for (auto& v : r) v = -v;
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> r(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] = r[i + j] + a.c_[i] * b.c_[j];
    return Poly(std::move(r));
  }
  friend Poly operator*(const T& s, const Poly& p) {
    std::vector<T> r = p.c_;
    for (auto& v : r) v = s * v;
    return Poly(std::move(r));
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  /// Euclidean division: returns (quotient, remainder).
  friend std::pair<Poly, Poly> divmod(const Poly& num, const Poly& den) {
    if (den.is_zero()) throw std::domain_error("polynomial division by zero");
    std::vector<T> r = num.c_;
    const int dn = den.degree();
    if (num.degree() < dn) return {Poly(), num};
    std::vector<T> q(static_cast<std::size_t>(num.degree() - dn + 1), T(0));
    const T lead = den.leading();
    for (int k = num.degree() - dn; k >= 0; --k) {
      const T f = r[static_cast<std::size_t>(k + dn)] / lead;
      q[static_cast<std::size_t>(k)] = f;
      for (int i = 0; i <= dn; ++i) r[static_cast<std::size_t>(k + i)] -= f * den.c_[static_cast<std::size_t>(i)];
    }
    r.resize(static_cast<std::size_t>(dn));
    return {Poly(std::move(q)), Poly(std::move(r))};
  }

  template <class U>
  Poly<U> cast() const {
    std::vector<U> r;
    r.reserve(c_.size());
    for (const auto& v : c_) r.push_back(to_complex(v));
    return Poly<U>(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && is_exact_zero(c_.back())) c_.pop_back();
  }
  std::vector<T> c_;
};

using CPoly = Poly<cplx>;
using QPoly = Poly<GaussRational>;

inline CPoly to_cpoly(const QPoly& p) { return p.cast<cplx>(); }
inline CPoly to_cpoly(const CPoly& p) { return p; }

/// Truncated power series a_0 + a_1 u + ... + a_{N-1} u^{N-1}.
template <class T>
class Series {
 public:
  explicit Series(std::size_t order, T constant = T(0)) : a_(order, T(0)) {
    if (order > 0) a_[0] = constant;
  }
  Series(std::vector<T> a) : a_(std::move(a)) {}  // NOLINT

  static Series from_poly(const Poly<T>& p, std::size_t order) {
    Series s(order);
    for (std::size_t k = 0; k < order; ++k) s.a_[k] = p[k];
    return s;
  }

  std::size_t order() const { return a_.size(); }
  const T& operator[](std::size_t k) const { return a_[k]; }
  T& operator[](std::size_t k) { return a_[k]; }
  const std::vector<T>& coeffs() const { return a_; }

  friend Series operator+(const Series& x, const Series& y) {
    Series r(std::min(x.order(), y.order()));
    for (std::size_t k = 0; k < r.order(); ++k) r.a_[k] = x.a_[k] + y.a_[k];
    return r;
  }
  friend Series operator*(const Series& x, const Series& y) {
    const std::size_t n = std::min(x.order(), y.order());
    Series r(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (is_exact_zero(x.a_[i])) continue;
      for (std::size_t j = 0; i + j < n; ++j) r.a_[i + j] = r.a_[i + j] + x.a_[i] * y.a_[j];
    }
    return r;
  }
  friend Series operator*(const T& s, const Series& x) {
    Series r = x;
    for (auto& v : r.a_) v = s * v;
    return r;
  }

  /// exp of a series with zero constant term: E' = S' E.
  Series exp_zero_const() const {
    const std::size_t n = order();
    Series e(n);
    if (n == 0) return e;
    e.a_[0] = T(1);
    for (std::size_t k = 1; k < n; ++k) {
      T acc(0);
      for (std::size_t j = 1; j <= k; ++j) acc = acc + T(static_cast<std::int64_t>(j)) * a_[j] * e.a_[k - j];
      e.a_[k] = acc / T(static_cast<std::int64_t>(k));
    }
    return e;
  }

  /// (1 + S)^e for a series S with zero constant term and exponent e (J.C.P. Miller recurrence).
  Series pow_one_plus(const T& e) const {
    const std::size_t n = order();
    Series r(n);
    if (n == 0) return r;
    r.a_[0] = T(1);
    // f = 1 + S; f r' = e f' r
    for (std::size_t k = 1; k < n; ++k) {
      T acc(0);
      for (std::size_t j = 1; j <= k; ++j) {
        const T jj(static_cast<std::int64_t>(j));
        const T kk(static_cast<std::int64_t>(k));
        acc = acc + (e * jj - (kk - jj)) * a_[j] * r.a_[k - j];
      }
      r.a_[k] = acc / T(static_cast<std::int64_t>(k));
    }
    return r;
  }

 private:
  std::vector<T> a_;
};

}  // namespace lci
