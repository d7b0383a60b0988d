// Growth and value distribution: characteristic roots, order catalog,
// Phragmen-Lindelof indicators, Nevanlinna coefficients, sector zero counts.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lci/contour.hpp"
#include "lci/odespec.hpp"
#include "lci/ratfun.hpp"
#include "lci/solutions.hpp"

namespace lci {

// ---------------------------------------------------------------------------
// Characteristic equation  y^n + sum (a_j + b_j z) y^j = 0

enum class RootClass { Outer, Middle, Inner };

inline const char* to_string(RootClass c) {
  switch (c) {
    case RootClass::Outer: return "outer";
    case RootClass::Middle: return "middle";
    case RootClass::Inner: return "inner";
  }
  return "?";
}

struct CharRoots {
  cplx z;
  std::vector<cplx> roots;  // sorted by decreasing modulus
  std::optional<std::vector<RootClass>> classes;
  std::vector<cplx> models;  // asymptotic model value per root, when classified
  std::string note;
};

/// Roots with multiplicity and a magnitude-based split into the three
/// asymptotic families; the split is withheld unless the families are separated
/// by a factor of at least 4 in modulus.
inline CharRoots char_roots(const OdeSpec& s, cplx z) {
  std::vector<cplx> c(static_cast<std::size_t>(s.n + 1));
  c[static_cast<std::size_t>(s.n)] = 1.0;
  for (int j = 0; j < s.n; ++j) c[static_cast<std::size_t>(j)] = s.a[static_cast<std::size_t>(j)] + s.b[static_cast<std::size_t>(j)] * z;
  CharRoots out;
  out.z = z;
  for (const auto& cl : poly_roots(CPoly(std::move(c))))
    for (int k = 0; k < cl.multiplicity; ++k) out.roots.push_back(cl.center);
  std::stable_sort(out.roots.begin(), out.roots.end(), [](cplx x, cplx y) { return std::abs(x) > std::abs(y); });

  const auto idx = struct_indices(s);
  const int n_out = s.n - idx.q, n_mid = idx.q - idx.p, n_in = idx.p;
  if (z == cplx()) {
    out.note = "classification withheld: z = 0";
    return out;
  }
  auto mod = [&](int i) { return std::abs(out.roots[static_cast<std::size_t>(i)]); };
  bool separated = true;
  if (n_out > 0 && n_out < s.n) separated = separated && mod(n_out - 1) >= 4.0 * mod(n_out);
  if (n_in > 0 && n_in < s.n) separated = separated && mod(s.n - n_in - 1) >= 4.0 * mod(s.n - n_in);
  if (!separated) {
    out.note = "classification withheld: |z| too small to separate root families";
    return out;
  }
  std::vector<RootClass> cls;
  for (int i = 0; i < n_out; ++i) cls.push_back(RootClass::Outer);
  for (int i = 0; i < n_mid; ++i) cls.push_back(RootClass::Middle);
  for (int i = 0; i < n_in; ++i) cls.push_back(RootClass::Inner);
  out.classes = cls;

  // Model values: roots of y^{n-q} = -b_q z, the nonzero roots of sum b_j y^j,
  // and roots of y^p = -a_0/(b_p z).
  std::vector<cplx> models;
  {
    const cplx w = -s.b[static_cast<std::size_t>(idx.q)] * z;  // y^{n-q} = -b_q z
    const double m = std::pow(std::abs(w), 1.0 / n_out);
    for (int k = 0; k < n_out; ++k) models.push_back(std::polar(m, (std::arg(w) + 2 * kPi * k) / n_out));
  }
  {
    std::vector<cplx> bc(s.b.begin() + idx.p, s.b.begin() + idx.q + 1);
    if (n_mid > 0)
      for (const auto& cl : poly_roots(CPoly(std::move(bc))))
        for (int k = 0; k < cl.multiplicity; ++k) models.push_back(cl.center);
  }
  if (n_in > 0) {
    const cplx w = -s.a[0] / (s.b[static_cast<std::size_t>(idx.p)] * z);
    const double m = std::pow(std::abs(w), 1.0 / n_in);
    for (int k = 0; k < n_in; ++k) models.push_back(std::polar(m, (std::arg(w) + 2 * kPi * k) / n_in));
  }
  // Pair each root with the nearest unused model in its family.
  out.models.assign(out.roots.size(), cplx());
  std::size_t base = 0;
  for (int fam = 0; fam < 3; ++fam) {
    const int cnt = fam == 0 ? n_out : fam == 1 ? n_mid : n_in;
    std::vector<bool> used(static_cast<std::size_t>(cnt), false);
    for (int i = 0; i < cnt; ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int k = 0; k < cnt; ++k) {
        if (used[static_cast<std::size_t>(k)]) continue;
        const double d = std::abs(out.roots[base + static_cast<std::size_t>(i)] - models[base + static_cast<std::size_t>(k)]);
        if (d < bd) bd = d, best = static_cast<std::size_t>(k);
      }
      used[best] = true;
      out.models[base + static_cast<std::size_t>(i)] = models[base + best];
    }
    base += static_cast<std::size_t>(cnt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Order catalog

enum class OrderStatus { Guaranteed, Possible, Impossible };

inline const char* to_string(OrderStatus s) {
  switch (s) {
    case OrderStatus::Guaranteed: return "guaranteed";
    case OrderStatus::Possible: return "possible";
    case OrderStatus::Impossible: return "impossible";
  }
  return "?";
}

struct OrderEntry {
  Rational order;
  OrderStatus status;
  std::string condition;
};

struct OrderCatalog {
  std::vector<OrderEntry> entries;  // only orders that are not excluded
  std::vector<OrderEntry> excluded;
};

inline OrderCatalog order_catalog(const OdeSpec& s) {
  const auto idx = struct_indices(s);
  OrderCatalog c;
  c.entries.push_back({idx.rho_max, OrderStatus::Guaranteed, "always"});
  auto add = [&c](Rational r, bool ok, std::string cond) {
    (ok ? c.entries : c.excluded).push_back({r, ok ? OrderStatus::Possible : OrderStatus::Impossible, std::move(cond)});
  };
  add(Rational(1), idx.p < idx.q, "p < q");
  if (idx.p > 1)
    add(Rational(1) - Rational(1, idx.p), true, "p > 1");
  else
    c.excluded.push_back({Rational(0), OrderStatus::Impossible, "1 - 1/p needs p > 1"});
  add(Rational(0), idx.p == 1, "p = 1 (polynomial solutions)");
  return c;
}

// ---------------------------------------------------------------------------
// Indicators

enum class IndicatorCase { Generic, QEqNMinus1 };

/// Predicted indicator of Lambda_L.
inline double indicator_predicted(double rho, double theta, IndicatorCase ic = IndicatorCase::Generic) {
  if (std::abs(theta) > kPi + 1e-12) throw std::invalid_argument("indicator_predicted: |theta| must be <= pi");
  if (ic == IndicatorCase::QEqNMinus1) return std::abs(theta) < 0.75 * kPi ? -std::cos(2 * theta) / 2 : 0.0;
  return -std::cos(rho * theta) / rho;
}

inline IndicatorCase indicator_case(const OdeSpec& s) {
  return struct_indices(s).q == s.n - 1 ? IndicatorCase::QEqNMinus1 : IndicatorCase::Generic;
}

struct IndicatorCell {
  QuadResult value;
  double h_emp = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the cell evaluated
};

struct IndicatorProfile {
  double rho = 0.0;
  IndicatorCase icase = IndicatorCase::Generic;
  std::vector<double> thetas;
  std::vector<double> radii;
  std::vector<std::vector<IndicatorCell>> cells;  // [theta][radius]
  std::vector<double> h_pred;                     // per theta
  std::vector<double> deviation_per_radius;       // sup over theta

  double h_emp(std::size_t i, std::size_t k) const { return cells[i][k].h_emp; }
  double deviation() const { return deviation_per_radius.empty() ? 0.0 : deviation_per_radius.back(); }
};

/// Midpoint grid of N angles on (-pi, pi); the largest |theta| is pi - pi/N.
inline std::vector<double> midpoint_theta_grid(int N) {
  std::vector<double> t;
  for (int i = 0; i < N; ++i) t.push_back(-kPi + (i + 0.5) * 2 * kPi / N);
  return t;
}

namespace detail {

/// Runs f(i) for i in [0, count) on a small pool; results are written by index.
template <class F>
void parallel_for(std::size_t count, const F& f) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline IndicatorProfile indicator_empirical(const SolutionHandle& s, double rho, std::vector<double> thetas,
                                            std::vector<double> radii, double tol,
                                            IndicatorCase ic = IndicatorCase::Generic) {
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("indicator_empirical: radii must be increasing");
  for (double t : thetas)
    if (std::abs(t) > kPi - 0.05 + 1e-12) throw std::invalid_argument("indicator_empirical: |theta| must be <= pi - 0.05");
  IndicatorProfile p;
  p.rho = rho;
  p.icase = ic;
  p.thetas = std::move(thetas);
  p.radii = std::move(radii);
  const std::size_t nt = p.thetas.size(), nr = p.radii.size();
  p.cells.assign(nt, std::vector<IndicatorCell>(nr));
  detail::parallel_for(nt * nr, [&](std::size_t idx) {
    const std::size_t i = idx / nr, k = idx % nr;
    IndicatorCell& cell = p.cells[i][k];
    try {
      cell.value = s(std::polar(p.radii[k], p.thetas[i]), 0, tol);
      cell.h_emp = cell.value.log_abs() / std::pow(p.radii[k], rho);
      if (!cell.value.converged) cell.error = "quadrature did not reach tolerance";
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  for (double t : p.thetas) p.h_pred.push_back(indicator_predicted(rho, t, ic));
  for (std::size_t k = 0; k < nr; ++k) {
    double dev = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      const double h = p.cells[i][k].h_emp;
      dev = std::isfinite(h) ? std::max(dev, std::abs(h - p.h_pred[i])) : std::numeric_limits<double>::infinity();
    }
    p.deviation_per_radius.push_back(dev);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Nevanlinna coefficients: T(r) ~ T_coeff r^rho, m(r, 1/f) ~ m_inv r^rho, N(r, 1/f) ~ N r^rho

struct NevanlinnaCoeffs {
  double T_coeff = 0.0;
  double m_inv_coeff = 0.0;
  double N_coeff = 0.0;
};

/// Trapezoid over a uniform periodic theta grid.
inline NevanlinnaCoeffs nevanlinna_from_samples(const std::vector<double>& h) {
  NevanlinnaCoeffs c;
  if (h.empty()) return c;
  for (double v : h) {
    c.T_coeff += std::max(v, 0.0);
    c.m_inv_coeff += std::max(-v, 0.0);
    c.N_coeff += v;
  }
  const double w = 1.0 / static_cast<double>(h.size());  // (1/2pi) * (2pi/N)
  c.T_coeff *= w;
  c.m_inv_coeff *= w;
  c.N_coeff *= w;
  return c;
}

/// Integrates the predicted indicator over [-pi, pi] piecewise between its
/// sign changes with Gauss-Kronrod, so the result is exact to rounding.
inline NevanlinnaCoeffs nevanlinna_predicted(double rho, IndicatorCase ic = IndicatorCase::Generic) {
  std::vector<double> br{-kPi, kPi};
  const double r = ic == IndicatorCase::QEqNMinus1 ? 2.0 : rho;
  for (int k = 0; (kPi / 2 + k * kPi) / r < kPi; ++k) {
    br.push_back((kPi / 2 + k * kPi) / r);
    br.push_back(-(kPi / 2 + k * kPi) / r);
  }
  if (ic == IndicatorCase::QEqNMinus1) {
    br.push_back(0.75 * kPi);
    br.push_back(-0.75 * kPi);
  }
  std::sort(br.begin(), br.end());
  NevanlinnaCoeffs c;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = br[i + 1];
    if (b - a <= 0) continue;
    const double m = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = detail::kWgk[7] * indicator_predicted(rho, m, ic);
    for (std::size_t k = 0; k < 7; ++k)
      s += detail::kWgk[k] * (indicator_predicted(rho, m - hw * detail::kXgk[k], ic) +
                              indicator_predicted(rho, m + hw * detail::kXgk[k], ic));
    s *= hw;
    (s >= 0 ? c.T_coeff : c.m_inv_coeff) += std::abs(s);
    c.N_coeff += s;
  }
  c.T_coeff /= 2 * kPi;
  c.m_inv_coeff /= 2 * kPi;
  c.N_coeff /= 2 * kPi;
  return c;
}

struct NevanlinnaEstimate {
  NevanlinnaCoeffs predicted;
  NevanlinnaCoeffs empirical;  // at the largest radius
};

inline NevanlinnaEstimate nevanlinna_estimates(const IndicatorProfile& p) {
  NevanlinnaEstimate e;
  e.predicted = nevanlinna_predicted(p.rho, p.icase);
  std::vector<double> h;
  for (std::size_t i = 0; i < p.thetas.size(); ++i) h.push_back(p.cells[i].empty() ? 0.0 : p.cells[i].back().h_emp);
  e.empirical = nevanlinna_from_samples(h);
  return e;
}

// ---------------------------------------------------------------------------
// Growth exponent log log M(r) / log r

struct GrowthSample {
  double r = 0.0;
  double log_M = 0.0;
  double exponent = 0.0;  // log(log M) / log r
};

struct GrowthEstimate {
  std::vector<GrowthSample> samples;
  double slope = 0.0;  // least-squares slope of log log M against log r
};

inline GrowthEstimate growth_exponent(const SolutionHandle& s, const std::vector<double>& radii, int rays = 16,
                                      double tol = 1e-10) {
  GrowthEstimate g;
  std::vector<double> logM(radii.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> vals(radii.size() * static_cast<std::size_t>(rays));
  detail::parallel_for(vals.size(), [&](std::size_t idx) {
    const std::size_t k = idx / static_cast<std::size_t>(rays);
    const int i = static_cast<int>(idx % static_cast<std::size_t>(rays));
    vals[idx] = s(std::polar(radii[k], -kPi + 2 * kPi * (i + 0.5) / rays), 0, tol).log_abs();
  });
  for (std::size_t k = 0; k < radii.size(); ++k)
    for (int i = 0; i < rays; ++i) logM[k] = std::max(logM[k], vals[k * static_cast<std::size_t>(rays) + static_cast<std::size_t>(i)]);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    GrowthSample gs{radii[k], logM[k], std::log(logM[k]) / std::log(radii[k])};
    g.samples.push_back(gs);
    const double x = std::log(radii[k]), y = std::log(logM[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = static_cast<double>(radii.size());
  if (radii.size() >= 2) g.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return g;
}

// ---------------------------------------------------------------------------
// Argument principle on a sector {|z| <= r, theta1 <= arg z <= theta2}

struct ZeroCount {
  long count = 0;
  double raw = 0.0;
  double confidence = 0.0;  // |raw - count|
  bool reliable = false;
  long evaluations = 0;
};

namespace detail {

struct BoundaryPiece {
  std::function<cplx(double)> point;
  std::function<cplx(double)> tangent;
};

/// f'/f at z from log-scaled evaluations.
inline cplx log_derivative(const SolutionHandle& s, cplx z, double tol, long& evals) {
  const QuadResult f = s(z, 0, tol), d = s(z, 1, tol);
  evals += 2;
  return d.value / f.value * std::exp(d.log_scale - f.log_scale);
}

/// (1/2 pi i) \int f'/f dz along one piece, refined until GK15/G7 agree and
/// each step changes arg f by less than pi/4.
inline cplx winding_piece(const SolutionHandle& s, const BoundaryPiece& bp, double tol, long& evals, int depth_max = 14) {
  struct Job {
    double a, b;
    int depth;
  };
  std::vector<Job> stack{{0.0, 1.0, 0}};
  cplx total = 0.0;
  while (!stack.empty()) {
    const Job jb = stack.back();
    stack.pop_back();
    const double c = 0.5 * (jb.a + jb.b), h = 0.5 * (jb.b - jb.a);
    auto g = [&](double u) { return log_derivative(s, bp.point(u), tol, evals) * bp.tangent(u); };
    cplx k15 = kWgk[7] * g(c), g7 = kWg[3] * g(c) ;
    for (std::size_t i = 0; i < 7; ++i) {
      const cplx sm = g(c - h * kXgk[i]) + g(c + h * kXgk[i]);
      k15 += kWgk[i] * sm;
      if (i % 2 == 1) g7 += kWg[i / 2] * sm;
    }
    k15 *= h;
    g7 *= h;
    const bool ok = std::abs(k15 - g7) <= 1e-6 * std::max(1.0, std::abs(k15)) && std::abs(k15.imag()) < kPi / 4;
    if (ok || jb.depth >= depth_max) {
      total += k15;
    } else {
      stack.push_back({c, jb.b, jb.depth + 1});
      stack.push_back({jb.a, c, jb.depth + 1});
    }
  }
  return total / cplx(0.0, 2 * kPi);
}

}  // namespace detail

/// Zeros of s in the closed sector; a span of 2 pi or more means the full disk.
inline ZeroCount zero_count_sector(const SolutionHandle& s, double theta1, double theta2, double r, double tol = 1e-10) {
  if (!(theta2 > theta1) || !(r > 0)) throw std::invalid_argument("zero_count_sector: need theta2 > theta1 and r > 0");
  ZeroCount best;
  best.confidence = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 4; ++attempt) {
    // Nudge the boundary outward if the previous pass grazed a zero.
    const double rr = r * (1.0 + 0.003 * attempt);
    const double t1 = theta1 - 1e-3 * attempt, t2 = theta2 + 1e-3 * attempt;
    std::vector<detail::BoundaryPiece> pieces;
    const bool disk = t2 - t1 >= 2 * kPi - 1e-12;
    if (!disk)
      pieces.push_back({[=](double u) { return std::polar(rr * u, t1); }, [=](double) { return std::polar(rr, t1); }});
    const double span = disk ? 2 * kPi : t2 - t1;
    pieces.push_back({[=](double u) { return std::polar(rr, t1 + span * u); },
                      [=](double u) { return cplx(0.0, span) * std::polar(rr, t1 + span * u); }});
    if (!disk)
      pieces.push_back({[=](double u) { return std::polar(rr * (1 - u), t2); }, [=](double) { return -std::polar(rr, t2); }});
    ZeroCount zc;
    cplx raw = 0.0;
    try {
      for (const auto& bp : pieces) raw += detail::winding_piece(s, bp, tol, zc.evaluations);
    } catch (const NumericError&) {
      continue;
    }
    zc.raw = raw.real();
    zc.count = std::lround(zc.raw);
    zc.confidence = std::abs(zc.raw - static_cast<double>(zc.count)) + std::abs(raw.imag());
    zc.reliable = zc.confidence <= 0.2;
    if (zc.confidence < best.confidence) best = zc;
    if (zc.confidence < 1e-3) break;
  }
  return best;
}

}  // namespace lci
