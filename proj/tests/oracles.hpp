// Test-side reference values computed independently of the library.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = 2.0 / ((1 - z * z) * dp * dp);
    }
  }
  template <class F>
  double integrate(const F& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
    return s * h;
  }
};

/// Limit of an alternating-like sequence of partial sums by repeated averaging.
inline double repeated_average(std::vector<double> s, int levels) {
  for (int l = 0; l < levels && s.size() > 1; ++l) {
    std::vector<double> t(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) t[i] = 0.5 * (s[i] + s[i + 1]);
    s = std::move(t);
  }
  return s.back();
}

/// Ai(x) = (1/pi) \int_0^inf cos(s^3/3 + x s) ds and
/// Ai'(x) = -(1/pi) \int_0^inf s sin(s^3/3 + x s) ds for real x.
/// The non-monotone part of the phase is integrated by composite Gauss-Legendre;
/// beyond it the integral is split at successive phase multiples of pi and the
/// partial sums are accelerated by repeated averaging.
inline double airy_real(double x, bool derivative = false) {
  static const GaussLegendre gl(24);
  auto phase = [x](double s) { return s * s * s / 3 + x * s; };
  auto f = [&](double s) { return derivative ? -s * std::sin(phase(s)) : std::cos(phase(s)); };
  const double s0 = x < 0 ? 2.0 * std::sqrt(-x) + 1.0 : 0.0;
  double head = 0.0;
  if (s0 > 0) {
    const int panels = 400;
    for (int i = 0; i < panels; ++i) head += gl.integrate(f, s0 * i / panels, s0 * (i + 1) / panels);
  }
  // Phase is increasing on [s0, inf); solve phase(s) = c by Newton from above.
  auto solve = [&](double c, double guess) {
    double s = std::max(guess, s0);
    for (int it = 0; it < 200; ++it) {
      const double ds = (phase(s) - c) / (s * s + x);
      s -= ds;
      if (s < s0) s = s0;
      if (std::abs(ds) < 1e-15 * (1 + s)) break;
    }
    return s;
  };
  const double offset = derivative ? 0.0 : 0.5 * kPi;
  const double ph0 = phase(s0);
  double k0 = std::ceil((ph0 - offset) / kPi);
  std::vector<double> partial;
  double a = s0, sum = head, guess = s0 + 1.0;
  for (int k = 0; k < 600; ++k) {
    const double b = solve(offset + (k0 + k) * kPi, guess);
    if (b > a) sum += gl.integrate(f, a, b);
    partial.push_back(sum);
    a = b;
    guess = b + 0.1;
  }
  return repeated_average(partial, 40) / kPi;
}

/// Bisection for a sign change of Ai on [lo, hi].
inline double airy_zero(double lo, double hi, double tol = 1e-9) {
  double flo = airy_real(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi), fm = airy_real(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// C_m = sum_{k >= 0} 1 / (4^k k! (k+m-1)!) with 1/(-1)! = 0.
inline double ex3_C(int m) {
  double s = 0.0;
  for (int k = 0; k < 60; ++k) {
    if (k + m - 1 < 0) continue;
    s += 1.0 / (std::pow(4.0, k) * factorial(k) * factorial(k + m - 1));
  }
  return s;
}

/// Coefficient of z^{2m} in the series with m! in the denominator.
inline double ex3_coeff_mfact(int m) { return ex3_C(m) / (std::pow(2.0, m - 1) * factorial(m)); }

/// Coefficient of z^{2m} in the Laurent-derived series, (2m)! in the denominator.
inline double ex3_coeff_2mfact(int m) { return ex3_C(m) / (std::pow(2.0, m - 1) * factorial(2 * m)); }

}  // namespace oracle
