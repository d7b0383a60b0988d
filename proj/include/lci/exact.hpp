// Exact small Gaussian rationals used by the polynomial identities.
//
// Numerators and denominators are 64-bit; every operation is carried out in
// 128-bit intermediates and throws OverflowError when a reduced result no
// longer fits. Callers fall back to complex<double> when that happens.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lci {

struct OverflowError : std::runtime_error {
  OverflowError() : std::runtime_error("exact rational overflow") {}
};

class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT implicit by design of literals
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const __int128 g = std::gcd(a.den_, b.den_);
    const __int128 n = static_cast<__int128>(a.num_) * (b.den_ / g) +
                       static_cast<__int128>(b.num_) * (a.den_ / g);
    const __int128 d = static_cast<__int128>(a.den_) * (b.den_ / g);
    return from_wide(n, d);
  }
  friend Rational operator-(const Rational& a) { return from_wide(-static_cast<__int128>(a.num_), a.den_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    const __int128 n = static_cast<__int128>(g1 ? a.num_ / g1 : 0) * (g2 ? b.num_ / g2 : 0);
    const __int128 d = static_cast<__int128>(a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1));
    return from_wide(n, d);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    Rational inv;
    inv.num_ = b.den_;
    inv.den_ = b.num_;
    if (inv.den_ < 0) {
      inv.num_ = -inv.num_;
      inv.den_ = -inv.den_;
    }
    return a * inv;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

  /// Best rational approximation with denominator <= max_den (continued fractions).
  static std::optional<Rational> approximate(double x, std::int64_t max_den, double tol) {
    if (!std::isfinite(x) || std::abs(x) > 1e15) return std::nullopt;
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double v = x;
    for (int it = 0; it < 64; ++it) {
      const double a = std::floor(v);
      if (std::abs(a) > 1e15) break;
      const auto ai = static_cast<std::int64_t>(a);
      const __int128 h2 = static_cast<__int128>(ai) * h1 + h0;
      const __int128 k2 = static_cast<__int128>(ai) * k1 + k0;
      if (k2 > max_den) break;
      h0 = h1;
      k0 = k1;
      h1 = static_cast<std::int64_t>(h2);
      k1 = static_cast<std::int64_t>(k2);
      if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= tol) return Rational(h1, k1);
      const double frac = v - a;
      if (frac < 1e-300) break;
      v = 1.0 / frac;
    }
    if (k1 != 0 && std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= tol) return Rational(h1, k1);
    return std::nullopt;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    os << r.num_;
    if (r.den_ != 1) os << '/' << r.den_;
    return os;
  }

 private:
  static Rational from_wide(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw OverflowError();
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d == 0 ? 1 : d);
    return r;
  }
  void assign(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    *this = from_wide(n, d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Gaussian rational re + i*im.
class GaussRational {
 public:
  GaussRational() = default;
  GaussRational(Rational re, Rational im = Rational()) : re_(re), im_(im) {}  // NOLINT
  GaussRational(std::int64_t re) : re_(re) {}                                 // NOLINT

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }
  bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) {
    return {a.re_ + b.re_, a.im_ + b.im_};
  }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re_, -a.im_}; }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) {
    return {a.re_ - b.re_, a.im_ - b.im_};
  }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
  }
  friend GaussRational operator/(const GaussRational& a, const GaussRational& b) {
    const Rational d = b.re_ * b.re_ + b.im_ * b.im_;
    if (d.is_zero()) throw std::domain_error("gaussian rational division by zero");
    const GaussRational conj{b.re_, -b.im_};
    const GaussRational n = a * conj;
    return {n.re_ / d, n.im_ / d};
  }
  GaussRational& operator+=(const GaussRational& o) { return *this = *this + o; }
  GaussRational& operator-=(const GaussRational& o) { return *this = *this - o; }
  GaussRational& operator*=(const GaussRational& o) { return *this = *this * o; }
  GaussRational& operator/=(const GaussRational& o) { return *this = *this / o; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }

  static std::optional<GaussRational> approximate(std::complex<double> z, std::int64_t max_den, double tol) {
    auto re = Rational::approximate(z.real(), max_den, tol);
    auto im = Rational::approximate(z.imag(), max_den, tol);
    if (!re || !im) return std::nullopt;
    return GaussRational(*re, *im);
  }

  friend std::ostream& operator<<(std::ostream& os, const GaussRational& g) {
    if (g.im_.is_zero()) return os << g.re_;
    return os << '(' << g.re_ << (g.im_.num() < 0 ? "" : "+") << g.im_ << "i)";
  }

 private:
  Rational re_;
  Rational im_;
};

// Scalar traits shared by the templated algebra.
inline std::complex<double> to_complex(const std::complex<double>& z) { return z; }
inline std::complex<double> to_complex(const GaussRational& z) { return z.to_complex(); }
inline bool is_exact_zero(const std::complex<double>& z) { return z == std::complex<double>(); }
inline bool is_exact_zero(const GaussRational& z) { return z.is_zero(); }

}  // namespace lci
