// Contours C_{R,alpha,beta} and overflow-safe adaptive evaluation of
//   (1/2 pi i) \int_C phi(t) (-t)^j e^{-zt} dt.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "lci/kernel.hpp"

namespace lci {

/// Incoming ray at angle alpha from infinity down to radius R, arc on |t| = R
/// through the midpoint angle (alpha+beta)/2, outgoing ray at angle beta.
struct Contour {
  double R = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double T_max = 0.0;  // ray truncation radius; 0 means "choose per evaluation"
};

/// Mantissa * e^{log_scale}.
struct QuadResult {
  cplx value;  // mantissa
  double est_error = 0.0;
  double log_scale = 0.0;
  long nodes_used = 0;
  bool converged = true;

  cplx folded() const { return value * std::exp(log_scale); }
  double log_abs() const { return std::log(std::abs(value)) + log_scale; }
  /// This result re-expressed at another scale.
  QuadResult rescaled(double new_scale) const {
    QuadResult r = *this;
    const double f = std::exp(log_scale - new_scale);
    r.value *= f;
    r.est_error *= f;
    r.log_scale = new_scale;
    return r;
  }
};

/// a + b with a common scale.
inline QuadResult combine(const QuadResult& a, const QuadResult& b, cplx wb = 1.0) {
  const double s = std::max(a.log_scale, b.log_scale);
  QuadResult ra = a.rescaled(s), rb = b.rescaled(s);
  ra.value += wb * rb.value;
  ra.est_error += std::abs(wb) * rb.est_error;
  ra.nodes_used += rb.nodes_used;
  ra.converged = ra.converged && rb.converged;
  return ra;
}

struct ContourError : NumericError {
  using NumericError::NumericError;
};

inline bool in_decay_valley(const KernelData& kd, double angle) {
  return std::cos(kd.valley_degree() * angle) < -1e-12;
}

inline void validate_contour(const KernelData& kd, const Contour& c) {
  if (!in_decay_valley(kd, c.alpha) || !in_decay_valley(kd, c.beta))
    throw ContourError("decay condition violated: cos((n-q+1)*angle) must be negative on both rays");
  if (kd.has_poles() && !(c.R > kd.singular_radius))
    throw ContourError("contour radius must exceed the singular radius of the kernel");
  if (c.R < 0) throw ContourError("negative contour radius");
}

inline Path contour_path(const Contour& c, double T) {
  Path p;
  const cplx ea = std::polar(1.0, c.alpha), eb = std::polar(1.0, c.beta);
  p.segments.push_back(Segment::line(T * ea, c.R * ea));
  if (c.R > 0) p.segments.push_back(Segment::arc(c.R, c.alpha, c.beta));
  p.segments.push_back(Segment::line(c.R * eb, T * eb));
  p.start_angle = c.alpha;
  return p;
}

namespace detail {

/// Upper bound for log|phi(t) (-t)^j e^{-zt}| on the ray t = r e^{i theta}, r >= R_0^* + 1.
inline double ray_log_bound(const KernelData& kd, double C, double theta, cplx z, int j, double r) {
  const int k = kd.valley_degree();
  double u = std::cos(k * theta) * std::pow(r, k) / k + C * std::pow(r, k - 1) - (z * std::polar(1.0, theta)).real() * r;
  if (j > 0) u += j * std::log(r);
  for (const auto& kp : kd.poles) {
    const double a = std::abs(kp.pole.location);
    const double re = kp.exponent.real();
    u += std::max(-re * std::log(r + a), -re * std::log(std::max(r - a, 1e-300)));
    u += std::abs(kp.exponent.imag()) * (std::abs(theta) + kPi / 2);
  }
  return u;
}

inline double sample_log_magnitude(const KernelData& kd, cplx t, double ref, cplx z) {
  const auto args = branch_args_near(kd, t, ref);
  return (log_kernel_with_args(kd, t, args) - z * t).real();
}

/// Peak of Re[log phi - zt] over a coarse sampling of the finite part of c.
inline double coarse_peak(const KernelData& kd, const Contour& c, cplx z, double rmax, int samples = 24) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double r = c.R + (rmax - c.R) * i / samples;
    peak = std::max(peak, sample_log_magnitude(kd, std::polar(r, c.alpha), c.alpha, z));
    peak = std::max(peak, sample_log_magnitude(kd, std::polar(r, c.beta), c.alpha, z));
    if (c.R > 0) {
      const double ph = c.alpha + (c.beta - c.alpha) * i / samples;
      peak = std::max(peak, sample_log_magnitude(kd, std::polar(c.R, ph), c.alpha, z));
    }
  }
  return peak;
}

inline double saddle_radius(const KernelData& kd, cplx z) {
  return std::pow(std::abs(z), 1.0 / (kd.valley_degree() - 1));
}

}  // namespace detail

/// Ray truncation radius: the tail of each ray beyond T_max contributes at most
/// tol * e^{log_scale} (with a 1e-3 safety factor), from the bound
/// Re R0 <= cos(k theta) r^k / k + C r^(k-1).
inline double truncation_bound(const KernelData& kd, const Contour& c, cplx z, double tol, int j = 0) {
  if (!in_decay_valley(kd, c.alpha) || !in_decay_valley(kd, c.beta))
    throw ContourError("decay condition violated: cos((n-q+1)*angle) must be negative on both rays");
  const double C = psi_bound_constant(kd);
  const double r_lo = std::max({c.R, kd.has_poles() ? kd.singular_radius + 1.0 : 1.0, 1.0});
  const double r_peak = std::max(r_lo, 2.0 * detail::saddle_radius(kd, z) + 2.0);
  const double scale = detail::coarse_peak(kd, c, z, r_peak, 48);
  const double target = std::log(tol) + std::log(1e-3) + scale;

  double T = r_lo;
  for (double theta : {c.alpha, c.beta}) {
    auto U = [&](double r) { return detail::ray_log_bound(kd, C, theta, z, j, r); };
    double r = r_lo;
    for (int it = 0; it < 200000; ++it) {
      const double h = 1e-4 * r;
      const double u = U(r);
      const double d1 = (U(r + h) - U(r - h)) / (2 * h);
      const double d2 = (U(r + h) - 2 * u + U(r - h)) / (h * h);
      if (d1 < 0 && d2 < 0 && u - std::log(-d1) <= target) break;
      r += std::max(0.01, 0.01 * r);
    }
    T = std::max(T, r);
  }
  return T;
}

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b;
  cplx value;      // at scale
  double err;      // at scale
  double resabs;   // at scale
  double scale;
  double log_err() const { return err > 0 ? std::log(err) + scale : -std::numeric_limits<double>::infinity(); }
};

template <class F>
Interval gk15(const F& log_integrand, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<cplx, 15> lv;
  lv[0] = log_integrand(c);
  for (int i = 0; i < 7; ++i) {
    lv[1 + 2 * i] = log_integrand(c - h * kXgk[static_cast<std::size_t>(i)]);
    lv[2 + 2 * i] = log_integrand(c + h * kXgk[static_cast<std::size_t>(i)]);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : lv)
    if (std::isfinite(v.real())) m = std::max(m, v.real());
  Interval iv{a, b, cplx(), 0.0, 0.0, m};
  if (!std::isfinite(m)) return iv;  // integrand vanishes on every node
  std::array<cplx, 15> fv;
  for (std::size_t i = 0; i < 15; ++i) fv[i] = std::isfinite(lv[i].real()) ? std::exp(lv[i] - iv.scale) : cplx();
  cplx k15 = kWgk[7] * fv[0], g7 = kWg[3] * fv[0];
  double rabs = kWgk[7] * std::abs(fv[0]);
  for (int i = 0; i < 7; ++i) {
    const cplx s = fv[static_cast<std::size_t>(1 + 2 * i)] + fv[static_cast<std::size_t>(2 + 2 * i)];
    k15 += kWgk[static_cast<std::size_t>(i)] * s;
    rabs += kWgk[static_cast<std::size_t>(i)] *
            (std::abs(fv[static_cast<std::size_t>(1 + 2 * i)]) + std::abs(fv[static_cast<std::size_t>(2 + 2 * i)]));
    if (i % 2 == 1) g7 += kWg[static_cast<std::size_t>(i / 2)] * s;
  }
  const cplx mean = 0.5 * k15;
  double rasc = kWgk[7] * std::abs(fv[0] - mean);
  for (int i = 0; i < 7; ++i)
    rasc += kWgk[static_cast<std::size_t>(i)] *
            (std::abs(fv[static_cast<std::size_t>(1 + 2 * i)] - mean) + std::abs(fv[static_cast<std::size_t>(2 + 2 * i)] - mean));
  iv.value = k15 * h;
  iv.resabs = rabs * std::abs(h);
  rasc *= std::abs(h);
  double err = std::abs((k15 - g7) * h);
  if (rasc > 0 && err > 0) err = rasc * std::min(1.0, std::pow(200.0 * err / rasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (iv.resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * iv.resabs, err);
  iv.err = err;
  return iv;
}

}  // namespace detail

struct QuadOptions {
  long node_budget = 20000;
  int initial_pieces = 4;
};

/// Globally adaptive GK15 over a parametrized path. log_integrand(s) returns
/// the complex logarithm of the integrand including dt/ds; values are summed
/// re-centered on the running maximum exponent.
template <class F>
QuadResult integrate_log(const F& log_integrand, const std::vector<std::pair<double, double>>& ranges, double tol,
                         const QuadOptions& opt = {}) {
  auto cmp = [](const detail::Interval& x, const detail::Interval& y) { return x.log_err() < y.log_err(); };
  std::priority_queue<detail::Interval, std::vector<detail::Interval>, decltype(cmp)> heap(cmp);
  long nodes = 0;
  for (const auto& [a, b] : ranges) {
    for (int i = 0; i < opt.initial_pieces; ++i) {
      const double x0 = a + (b - a) * i / opt.initial_pieces, x1 = a + (b - a) * (i + 1) / opt.initial_pieces;
      heap.push(detail::gk15(log_integrand, x0, x1));
      nodes += 15;
    }
  }
  auto totals = [&heap](double& scale, cplx& val, double& err, double& rabs) {
    auto copy = heap;
    std::vector<detail::Interval> all;
    scale = -std::numeric_limits<double>::infinity();
    while (!copy.empty()) {
      all.push_back(copy.top());
      scale = std::max(scale, copy.top().scale);
      copy.pop();
    }
    // Fixed summation order: by interval start.
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    val = 0.0;
    err = 0.0;
    rabs = 0.0;
    if (!std::isfinite(scale)) scale = 0.0;
    for (const auto& iv : all) {
      if (!std::isfinite(iv.scale)) continue;
      const double f = std::exp(iv.scale - scale);
      val += iv.value * f;
      err += iv.err * f;
      rabs += iv.resabs * f;
    }
  };
  QuadResult out;
  int since_check = 0;
  while (true) {
    if (since_check == 0 || nodes + 30 > opt.node_budget) {
      double scale, err, rabs;
      cplx val;
      totals(scale, val, err, rabs);
      const double floor = 50 * std::numeric_limits<double>::epsilon() * rabs;
      if (err <= std::max(tol * std::abs(val), floor) || nodes + 30 > opt.node_budget) {
        out.value = val;
        out.est_error = err;
        out.log_scale = scale;
        out.nodes_used = nodes;
        out.converged = err <= std::max(tol * std::abs(val), floor);
        return out;
      }
      since_check = 16;
    }
    --since_check;
    const detail::Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    heap.push(detail::gk15(log_integrand, worst.a, mid));
    heap.push(detail::gk15(log_integrand, mid, worst.b));
    nodes += 30;
  }
}

/// (1/2 pi i) \int_c phi_L(t) (-t)^j e^{-zt} dt as mantissa * e^{log_scale}.
/// log_scale is the largest Re[log phi - zt] over the quadrature nodes.
inline QuadResult laplace_eval(const KernelData& kd, const Contour& c, cplx z, int j, double tol,
                               const QuadOptions& opt = {}) {
  if (j < 0) throw std::invalid_argument("laplace_eval: j must be >= 0");
  validate_contour(kd, c);
  const double T = std::max(c.T_max, truncation_bound(kd, c, z, std::max(tol, 1e-16), j));
  const Path path = contour_path(c, T);
  const BranchState branch(kd, path);
  const cplx two_pi_i(0.0, 2.0 * kPi);
  double peak = -std::numeric_limits<double>::infinity();
  auto f = [&](double s) {
    const cplx t = path.point(s);
    const cplx L = branch.log_kernel(s) - z * t;
    peak = std::max(peak, L.real());
    cplx v = L + std::log(path.tangent(s) / two_pi_i);
    if (j > 0) {
      if (t == cplx()) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
      v += static_cast<double>(j) * std::log(-t);
    }
    return v;
  };
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t i = 0; i < path.size(); ++i) ranges.emplace_back(static_cast<double>(i), static_cast<double>(i + 1));
  QuadResult r = integrate_log(f, ranges, tol, opt);
  if (std::isfinite(peak)) r = r.rescaled(peak);
  return r;
}

/// Canonical contour for Lambda_nu: alpha = theta_{2nu+1}, beta = theta_{2nu-1},
/// theta_k = k pi / (n-q+1); R = 0 without poles, else R_0^* + 1.
inline Contour canonical_contour(const KernelData& kd, int nu) {
  const int k = kd.valley_degree();
  if (nu < 0 || nu > k - 1) throw std::invalid_argument("canonical_contour: nu must lie in [0, n-q]");
  Contour c;
  c.alpha = (2 * nu + 1) * kPi / k;
  c.beta = (2 * nu - 1) * kPi / k;
  c.R = kd.has_poles() ? kd.singular_radius + 1.0 : 0.0;
  c.T_max = truncation_bound(kd, c, 0.0, 1e-16);
  return c;
}

/// Member of the admissible family for Lambda_nu (rays in the same decay
/// valleys, R > R_0^*) with the smallest integrand peak at this z. All members
/// give the same integral; a low peak avoids cancellation for large |z|.
inline Contour select_contour(const KernelData& kd, int nu, cplx z) {
  const Contour base = canonical_contour(kd, nu);
  const int k = kd.valley_degree();
  const double half = kPi / (2 * k);
  const double rmin = base.R;
  const double ts = detail::saddle_radius(kd, z);
  if (std::abs(z) < 1.0) return base;
  std::vector<double> radii{rmin};
  for (double f : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) {
    const double r = std::max(rmin, f * ts);
    if (r > rmin * (1 + 1e-9) + 1e-9) radii.push_back(r);
  }
  Contour best = base;
  double best_peak = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    if (kd.has_poles() && !(r > kd.singular_radius)) continue;
    for (int ia = -4; ia <= 4; ++ia) {
      for (int ib = -4; ib <= 4; ++ib) {
        Contour c;
        c.R = r;
        c.alpha = base.alpha + 0.2 * ia * half;
        c.beta = base.beta + 0.2 * ib * half;
        const double rmax = std::max(r, 2.0 * ts + 2.0);
        const double pk = detail::coarse_peak(kd, c, z, rmax, 16);
        if (pk < best_peak - 1e-9) {
          best_peak = pk;
          best = c;
        }
      }
    }
  }
  best.T_max = 0.0;
  return best;
}

}  // namespace lci
