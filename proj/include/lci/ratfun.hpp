// Root finding with multiplicity clustering, partial fractions and residues
// of Q0/Q1.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "lci/exact.hpp"
#include "lci/odespec.hpp"
#include "lci/poly.hpp"

namespace lci {

struct RootCluster {
  cplx center;
  int multiplicity = 1;
  double cluster_radius = 0.0;
  std::optional<GaussRational> exact_center;  // set when verified exactly
};

struct RootOptions {
  int max_iterations = 500;
  double residual_tol = 1e-10;
};

namespace detail {

inline double coeff_max(const CPoly& p) {
  double m = 0.0;
  for (const auto& c : p.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

/// Bound for |p^(k)(x)|/k! obtained from absolute coefficients.
inline double deriv_scale(const CPoly& p, int k, double ax) {
  double s = 0.0, binom_pow = 0.0;
  const auto& c = p.coeffs();
  for (int i = k; i < static_cast<int>(c.size()); ++i) {
    binom_pow = std::exp(std::lgamma(i + 1.0) - std::lgamma(k + 1.0) - std::lgamma(i - k + 1.0)) * std::pow(ax, i - k);
    s += std::abs(c[static_cast<std::size_t>(i)]) * binom_pow;
  }
  return s;
}

/// Aberth-Ehrlich simultaneous iteration. Returns deg P approximations.
inline std::vector<cplx> aberth(const CPoly& p, const RootOptions& opt, double& worst) {
  const int n = p.degree();
  const CPoly dp = p.derivative();
  // Initial radius from the Cauchy-type bound (max |a_k/a_n|)^(1/(n-k)).
  double rad = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = std::abs(p[static_cast<std::size_t>(k)] / p.leading());
    if (r > 0) rad = std::max(rad, std::pow(r, 1.0 / (n - k)));
  }
  if (rad == 0.0) rad = 1.0;
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    z[static_cast<std::size_t>(k)] = std::polar(rad, 2.0 * std::numbers::pi * k / n + 0.4);

  std::vector<bool> done(z.size(), false);
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool all = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      const cplx pv = p(z[k]);
      const cplx dv = dp(z[k]);
      if (pv == cplx()) {
        done[k] = true;
        continue;
      }
      cplx s{};
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      const cplx ratio = pv / dv;
      cplx corr = ratio / (1.0 - ratio * s);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) corr = cplx(1e-8 * (1 + std::abs(z[k])), 0);
      z[k] -= corr;
      if (std::abs(corr) <= 4e-16 * (1.0 + std::abs(z[k])))
        done[k] = true;
      else
        all = false;
    }
    if (all) break;
  }
  worst = 0.0;
  const double cm = coeff_max(p);
  for (const auto& r : z) worst = std::max(worst, std::abs(p(r)) / (cm * std::pow(std::max(1.0, std::abs(r)), n)));
  return z;
}

inline CPoly nth_derivative(CPoly p, int k) {
  for (int i = 0; i < k; ++i) p = p.derivative();
  return p;
}

/// Newton on p^(m-1), where a root of multiplicity m is simple.
inline cplx polish(const CPoly& p, int m, cplx x) {
  const CPoly f = nth_derivative(p, m - 1);
  const CPoly df = f.derivative();
  for (int it = 0; it < 50; ++it) {
    const cplx d = df(x);
    if (d == cplx()) break;
    const cplx step = f(x) / d;
    x -= step;
    if (std::abs(step) <= 1e-17 * (1.0 + std::abs(x))) break;
  }
  return x;
}

/// Radius of a disk about x that holds the g roots of the degree-g Taylor
/// truncation of p at x (Fujiwara-type bound on the truncated polynomial).
inline double local_root_radius(const CPoly& p, int g, cplx x) {
  std::vector<double> t(static_cast<std::size_t>(g + 1));
  CPoly d = p;
  double fact = 1.0;
  for (int k = 0; k <= g; ++k) {
    t[static_cast<std::size_t>(k)] = std::abs(d(x)) / fact;
    d = d.derivative();
    fact *= (k + 1);
  }
  const double tg = t[static_cast<std::size_t>(g)];
  if (!(tg > 0)) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (int k = 0; k < g; ++k) r = std::max(r, 2.0 * std::pow(t[static_cast<std::size_t>(k)] / tg, 1.0 / (g - k)));
  return r;
}

template <class T>
int exact_multiplicity(const Poly<T>& p, const T& x) {
  Poly<T> d = p;
  int m = 0;
  while (!d.is_zero() && is_exact_zero(d(x))) {
    d = d.derivative();
    ++m;
  }
  return m;
}

}  // namespace detail

/// Roots of P grouped into clusters of equal roots.
///
/// Candidates within 1e-6*(1+|c|) merge unconditionally; wider groups (up to
/// 1e-2*(1+|c|), the spread a multiple root shows in double precision) merge
/// only when a local Taylor bound confirms the multiplicity.
inline std::vector<RootCluster> poly_roots(const CPoly& P, const RootOptions& opt = {}) {
  if (P.degree() < 1) throw std::domain_error("poly_roots: degree must be >= 1");
  std::vector<RootCluster> out;
  CPoly p = P;
  // Zero roots are read off directly.
  const int low = p.lowest_index();
  if (low > 0) {
    out.push_back({cplx(0.0), low, 0.0, GaussRational(0)});
    std::vector<cplx> c(p.coeffs().begin() + low, p.coeffs().end());
    p = CPoly(std::move(c));
  }
  if (p.degree() >= 1) {
    double worst = 0.0;
    std::vector<cplx> z = detail::aberth(p, opt, worst);
    const double cm = detail::coeff_max(p);
    std::vector<bool> used(z.size(), false);
    // Process in a deterministic order.
    std::vector<std::size_t> order(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (z[a].real() != z[b].real()) return z[a].real() < z[b].real();
      return z[a].imag() < z[b].imag();
    });
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const std::size_t i = order[oi];
      if (used[i]) continue;
      // Candidates sorted by distance.
      std::vector<std::size_t> near;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (!used[j] && std::abs(z[j] - z[i]) <= 1e-2 * (1.0 + std::abs(z[i]))) near.push_back(j);
      std::sort(near.begin(), near.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(z[a] - z[i]) < std::abs(z[b] - z[i]);
      });
      // Largest confirmed prefix wins; the tight group always merges. A wider
      // group is confirmed when the Taylor expansion at its polished center
      // confines exactly g roots to a disk no larger than the group itself
      // (up to a factor 4), the remaining candidates lie outside that disk, and
      // the polished center passes the residual test.
      std::size_t take = 1;
      for (std::size_t g = 1; g <= near.size(); ++g) {
        cplx c{};
        for (std::size_t k = 0; k < g; ++k) c += z[near[k]];
        c /= static_cast<double>(g);
        double spread = 0.0;
        for (std::size_t k = 0; k < g; ++k) spread = std::max(spread, std::abs(z[near[k]] - c));
        if (spread <= 1e-6 * (1.0 + std::abs(c))) {
          take = g;
          continue;
        }
        if (g == 1) continue;
        const cplx pc = detail::polish(p, static_cast<int>(g), c);
        const double r = detail::local_root_radius(p, static_cast<int>(g), pc);
        const double gap = g < near.size() ? std::abs(z[near[g]] - pc) : std::numeric_limits<double>::infinity();
        const double res = std::abs(p(pc)) / (cm * std::pow(std::max(1.0, std::abs(pc)), p.degree()));
        if (r <= 4.0 * spread && gap > 2.0 * std::max(r, spread) && res <= opt.residual_tol) take = g;
      }
      cplx c{};
      for (std::size_t k = 0; k < take; ++k) c += z[near[k]];
      c /= static_cast<double>(take);
      if (take > 1) c = detail::polish(p, static_cast<int>(take), c);
      double spread = 0.0;
      for (std::size_t k = 0; k < take; ++k) {
        spread = std::max(spread, std::abs(z[near[k]] - c));
        used[near[k]] = true;
      }
      out.push_back({c, static_cast<int>(take), spread, std::nullopt});
    }
    for (const auto& cl : out) {
      if (cl.exact_center) continue;
      const double res = std::abs(p(cl.center)) / (cm * std::pow(std::max(1.0, std::abs(cl.center)), p.degree()));
      if (!(res <= opt.residual_tol)) {
        std::ostringstream os;
        os << "poly_roots: no convergence, worst residual " << res;
        throw NumericError(os.str());
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
    if (std::abs(a.center.real() - b.center.real()) > 1e-12) return a.center.real() < b.center.real();
    return a.center.imag() < b.center.imag();
  });
  return out;
}

/// Root clusters of an exact polynomial; centers are snapped to Gaussian
/// rationals and multiplicities re-derived exactly where possible.
inline std::vector<RootCluster> poly_roots_exact(const QPoly& P, const RootOptions& opt = {}) {
  auto cl = poly_roots(to_cpoly(P), opt);
  for (auto& c : cl) {
    if (c.exact_center) continue;
    auto g = GaussRational::approximate(c.center, 10'000, 1e-7 * (1.0 + std::abs(c.center)));
    if (!g) continue;
    try {
      const int m = detail::exact_multiplicity(P, *g);
      if (m >= 1) {
        c.exact_center = *g;
        c.center = g->to_complex();
        c.multiplicity = m;
      }
    } catch (const OverflowError&) {
    }
  }
  return cl;
}

/// One pole t_nu of Q0/Q1 (a root of Q1 of multiplicity m_nu) with the Laurent
/// principal part  sum_{k=1}^{m} laurent[k-1] / (t - t_nu)^k.
struct PoleData {
  cplx location;
  int multiplicity = 1;
  cplx residue;                // lambda_nu = laurent[0]
  std::vector<cplx> laurent;   // size multiplicity
  double cluster_radius = 0.0;
  std::optional<GaussRational> exact_location;
  std::optional<std::vector<GaussRational>> exact_laurent;

  std::optional<GaussRational> exact_residue() const {
    if (!exact_laurent) return std::nullopt;
    return (*exact_laurent)[0];
  }
};

struct PartialFractions {
  CPoly outer;
  std::vector<PoleData> poles;
  std::optional<QPoly> exact_outer;
  bool exact() const { return exact_outer.has_value(); }
};

namespace detail {

/// Series quotient num/den to the given order (den[0] != 0).
template <class T>
std::vector<T> series_div(const std::vector<T>& num, const std::vector<T>& den, std::size_t order) {
  std::vector<T> q(order, T(0));
  auto at = [](const std::vector<T>& v, std::size_t k) { return k < v.size() ? v[k] : T(0); };
  for (std::size_t k = 0; k < order; ++k) {
    T acc = at(num, k);
    for (std::size_t j = 1; j <= k; ++j) acc = acc - at(den, j) * q[k - j];
    q[k] = acc / den[0];
  }
  return q;
}

/// Laurent principal part of Q0/Q1 at roots[nu].
template <class T>
std::vector<T> laurent_at(const Poly<T>& Q0, const T& lead, const std::vector<T>& roots, const std::vector<int>& mult,
                          std::size_t nu) {
  const T t0 = roots[nu];
  const int m = mult[nu];
  Poly<T> g{lead};
  for (std::size_t mu = 0; mu < roots.size(); ++mu) {
    if (mu == nu) continue;
    const Poly<T> lin{t0 - roots[mu], T(1)};
    for (int e = 0; e < mult[mu]; ++e) g = g * lin;
  }
  const Poly<T> q0s = Q0.taylor_shift(t0);
  const auto ser = series_div(q0s.coeffs(), g.coeffs(), static_cast<std::size_t>(m));
  std::vector<T> lau(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) lau[static_cast<std::size_t>(k - 1)] = ser[static_cast<std::size_t>(m - k)];
  return lau;
}

}  // namespace detail

inline PartialFractions partial_fractions(const CPoly& Q0, const CPoly& Q1,
                                          const std::optional<QPoly>& Q0x = std::nullopt,
                                          const std::optional<QPoly>& Q1x = std::nullopt) {
  if (Q1.is_zero()) throw std::domain_error("partial_fractions: Q1 is identically zero");
  PartialFractions pf;
  pf.outer = divmod(Q0, Q1).first;
  if (Q1.degree() == 0) {
    if (Q0x && Q1x) {
      try {
        auto outer = divmod(*Q0x, *Q1x).first;
        pf.outer = to_cpoly(outer);
        pf.exact_outer = std::move(outer);
      } catch (const OverflowError&) {
      }
    }
    return pf;
  }

  const bool try_exact = Q0x && Q1x;
  std::vector<RootCluster> cl = try_exact ? poly_roots_exact(*Q1x) : poly_roots(Q1);
  std::vector<cplx> roots;
  std::vector<int> mult;
  for (const auto& c : cl) {
    roots.push_back(c.center);
    mult.push_back(c.multiplicity);
  }
  for (std::size_t nu = 0; nu < cl.size(); ++nu) {
    PoleData pd;
    pd.location = cl[nu].center;
    pd.multiplicity = cl[nu].multiplicity;
    pd.cluster_radius = cl[nu].cluster_radius;
    pd.laurent = detail::laurent_at(Q0, Q1.leading(), roots, mult, nu);
    pd.residue = pd.laurent[0];
    pf.poles.push_back(std::move(pd));
  }

  bool all_exact = try_exact;
  int total = 0;
  for (const auto& c : cl) {
    all_exact = all_exact && c.exact_center.has_value();
    total += c.multiplicity;
  }
  if (all_exact && total == Q1.degree()) {
    try {
      std::vector<GaussRational> xr;
      for (const auto& c : cl) xr.push_back(*c.exact_center);
      std::vector<std::vector<GaussRational>> lau;
      for (std::size_t nu = 0; nu < cl.size(); ++nu) lau.push_back(detail::laurent_at(*Q0x, Q1x->leading(), xr, mult, nu));
      auto outer = divmod(*Q0x, *Q1x).first;
      for (std::size_t nu = 0; nu < cl.size(); ++nu) {
        auto& pd = pf.poles[nu];
        pd.exact_location = xr[nu];
        pd.location = xr[nu].to_complex();
        for (std::size_t k = 0; k < lau[nu].size(); ++k) pd.laurent[k] = lau[nu][k].to_complex();
        pd.residue = pd.laurent[0];
        pd.exact_laurent = std::move(lau[nu]);
      }
      pf.outer = to_cpoly(outer);
      pf.exact_outer = std::move(outer);
    } catch (const OverflowError&) {
    }
  }
  return pf;
}

/// Laurent coefficient of 1/(t - pole) of Q0/Q1.
inline cplx residue_at(const CPoly& Q0, const CPoly& Q1, cplx pole) {
  const auto pf = partial_fractions(Q0, Q1);
  for (const auto& p : pf.poles)
    if (std::abs(p.location - pole) <= std::max(1e-6 * (1.0 + std::abs(pole)), 2.0 * p.cluster_radius)) return p.residue;
  throw std::invalid_argument("residue_at: point is not a root of Q1");
}

/// lambda is declared an integer when |lambda - round(lambda)| < 1e-8 (and, if
/// an exact value is known, when it is an exact integer).
inline std::optional<long> integer_value(cplx lambda, const std::optional<GaussRational>& exact = std::nullopt) {
  if (exact) {
    if (!exact->imag().is_zero() || !exact->real().is_integer()) return std::nullopt;
    return static_cast<long>(exact->real().num());
  }
  const double r = std::round(lambda.real());
  if (std::abs(lambda - cplx(r, 0.0)) < 1e-8) return static_cast<long>(r);
  return std::nullopt;
}

}  // namespace lci
