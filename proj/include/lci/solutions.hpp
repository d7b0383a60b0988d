// Solution families: Lambda_nu, residue solutions at kernel singularities,
// the symmetry sum, closed-form checks and a Wronskian independence test.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lci/contour.hpp"
#include "lci/kernel.hpp"
#include "lci/odespec.hpp"

namespace lci {

enum class SolutionKind { Contour, Residue, ClosedForm, Circle };

/// Evaluates the j-th derivative at z.
using Evaluator = std::function<QuadResult(cplx z, int j, double tol)>;

struct SolutionHandle {
  SolutionKind kind = SolutionKind::Contour;
  Evaluator evaluator;
  std::string label;

  QuadResult operator()(cplx z, int j = 0, double tol = 1e-10) const { return evaluator(z, j, tol); }
};

/// Lambda_nu with contour C_{R, theta_{2nu+1}, theta_{2nu-1}}; for nu = 0 this is Lambda_L.
inline SolutionHandle lambda_solution(const KernelData& kd, int nu, const QuadOptions& opt = {}) {
  (void)canonical_contour(kd, nu);  // validates nu
  auto shared = std::make_shared<const KernelData>(kd);
  SolutionHandle h;
  h.kind = SolutionKind::Contour;
  h.label = "Lambda_" + std::to_string(nu);
  h.evaluator = [shared, nu, opt](cplx z, int j, double tol) {
    const Contour c = select_contour(*shared, nu, z);
    return laplace_eval(*shared, c, z, j, tol, opt);
  };
  return h;
}

// ---------------------------------------------------------------------------
// Closed forms (sum c_k z^k) e^{c z}

struct ClosedForm {
  CPoly poly;
  cplx exp_factor;
  std::optional<QPoly> exact_poly;
  std::optional<GaussRational> exact_exp_factor;

  bool exact() const { return exact_poly.has_value() && exact_exp_factor.has_value(); }
};

/// JSON {"poly": [c_0..c_d], "exp_factor": c}.
inline ClosedForm parse_closed_form(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("closed form syntax error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("poly") || !j["poly"].is_array())
    throw SpecError("closed form must be an object with a \"poly\" array");
  ClosedForm cf;
  std::vector<cplx> c;
  for (std::size_t k = 0; k < j["poly"].size(); ++k)
    c.push_back(detail::parse_coefficient(j["poly"][k], "poly[" + std::to_string(k) + "]"));
  cf.exp_factor = j.contains("exp_factor") ? detail::parse_coefficient(j["exp_factor"], "exp_factor") : cplx();
  std::vector<GaussRational> xc;
  bool ok = true;
  for (const auto& v : c) {
    auto e = detail::exact_of(v);
    if (!e) {
      ok = false;
      break;
    }
    xc.push_back(*e);
  }
  auto xe = detail::exact_of(cf.exp_factor);
  cf.poly = CPoly(std::move(c));
  if (ok && xe) {
    cf.exact_poly = QPoly(std::move(xc));
    cf.exact_exp_factor = *xe;
  }
  return cf;
}

namespace detail {

/// Derivatives of p(z)e^{cz}: e^{cz} (D + c)^j p.
template <class T>
std::vector<Poly<T>> exp_poly_derivatives(const Poly<T>& p, const T& c, int n) {
  std::vector<Poly<T>> d{p};
  for (int j = 1; j <= n; ++j) d.push_back(d.back().derivative() + c * d.back());
  return d;
}

inline cplx log_poly(const CPoly& p, cplx z) {
  // log p(z) for large |z| without overflow: factor out z^deg.
  if (p.is_zero()) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
  if (std::abs(z) <= 1.0) return std::log(p(z));
  const int d = p.degree();
  cplx acc = 0.0;
  const cplx iz = 1.0 / z;
  for (int k = 0; k <= d; ++k) acc = acc * iz + p[static_cast<std::size_t>(k)];
  return std::log(acc) + static_cast<double>(d) * std::log(z);
}

}  // namespace detail

inline SolutionHandle closed_form_solution(const ClosedForm& cf, std::string label = "closed_form") {
  SolutionHandle h;
  h.kind = SolutionKind::ClosedForm;
  h.label = std::move(label);
  h.evaluator = [cf](cplx z, int j, double) {
    const auto d = detail::exp_poly_derivatives(cf.poly, cf.exp_factor, j);
    const cplx lg = detail::log_poly(d.back(), z) + cf.exp_factor * z;
    QuadResult r;
    r.log_scale = lg.real();
    r.value = std::isfinite(lg.real()) ? std::polar(1.0, lg.imag()) : cplx();
    if (!std::isfinite(lg.real())) r.log_scale = 0.0;
    r.est_error = 4 * std::numeric_limits<double>::epsilon() * (1 + d.back().degree());
    return r;
  };
  return h;
}

// ---------------------------------------------------------------------------
// Residue solutions

enum class ResidueForm { Polynomial, ExpTimesPolynomial, ExpTimesEntire, IdenticallyZero };

struct ResidueSolution {
  cplx t0;
  cplx lambda0;
  int m = 1;          // multiplicity of t0 as a root of Q1
  int pole_order = 0; // order of t0 as a pole of Q0/Q1
  ResidueForm form = ResidueForm::IdenticallyZero;
  // Polynomial / ExpTimesPolynomial: w(z) = e^{log_const} e^{-t0 z} P(z).
  CPoly poly;
  std::optional<QPoly> exact_poly;  // P up to the constant e^{log_const}
  cplx log_const;
  std::string branch_note;
  SolutionHandle handle;
};

namespace detail {

inline std::size_t find_pole(const KernelData& kd, cplx pole) {
  for (std::size_t i = 0; i < kd.poles.size(); ++i) {
    const auto& p = kd.poles[i].pole;
    if (std::abs(p.location - pole) <= std::max(1e-6 * (1.0 + std::abs(pole)), 2.0 * p.cluster_radius)) return i;
  }
  throw std::invalid_argument("point is not a singularity of the kernel");
}

template <class T>
struct KernelView;

template <>
struct KernelView<cplx> {
  const KernelData& kd;
  cplx loc(std::size_t i) const { return kd.poles[i].pole.location; }
  cplx expo(std::size_t i) const { return kd.poles[i].exponent; }
  const CPoly& rnu(std::size_t i) const { return kd.poles[i].principal_exp; }
  const CPoly& r0() const { return kd.R0; }
};

template <>
struct KernelView<GaussRational> {
  const KernelData& kd;
  GaussRational loc(std::size_t i) const { return *kd.poles[i].pole.exact_location; }
  GaussRational expo(std::size_t i) const { return *kd.poles[i].exact_exponent; }
  const QPoly& rnu(std::size_t i) const { return *kd.poles[i].exact_principal_exp; }
  const QPoly& r0() const { return *kd.exact_R0; }
};

template <class T>
Series<T> poly_of_series(const Poly<T>& p, const Series<T>& v) {
  Series<T> acc(v.order());
  for (int k = p.degree(); k >= 0; --k) {
    acc = acc * v;
    acc[0] = acc[0] + p[static_cast<std::size_t>(k)];
  }
  return acc;
}

/// Taylor coefficients at t0 = pole nu of H(t) = phi(t) (t - t0)^N, normalized
/// so that the constant term is 1 (the dropped constant is reported separately).
template <class T>
std::vector<T> regular_factor_series(const KernelData& kd, std::size_t nu, std::size_t order) {
  KernelView<T> kv{kd};
  const T t0 = kv.loc(nu);
  Series<T> shift(order);
  {
    const Poly<T> r0s = kv.r0().taylor_shift(t0);
    for (std::size_t k = 1; k < order; ++k) shift[k] = r0s[k];
  }
  Series<T> prod(order, T(1));
  for (std::size_t mu = 0; mu < kd.poles.size(); ++mu) {
    if (mu == nu) continue;
    const T d = t0 - kv.loc(mu);
    Series<T> s(order);
    if (order > 1) s[1] = T(1) / d;
    prod = prod * s.pow_one_plus(kv.expo(mu));
    if (!kv.rnu(mu).is_zero()) {
      // v = 1/(d + u)
      Series<T> v(order);
      T pw = T(1) / d;
      for (std::size_t k = 0; k < order; ++k) {
        v[k] = pw;
        pw = pw * (-(T(1) / d));
      }
      Series<T> rv = poly_of_series(kv.rnu(mu), v);
      for (std::size_t k = 1; k < order; ++k) shift[k] = shift[k] + rv[k];
    }
  }
  return (prod * shift.exp_zero_const()).coeffs();
}

/// log of the dropped constant: prod d_mu^{e_mu} exp(R0(t0) + sum R_mu(1/d_mu)),
/// principal branch for every d_mu.
inline cplx regular_factor_log_const(const KernelData& kd, std::size_t nu) {
  const cplx t0 = kd.poles[nu].pole.location;
  cplx v = kd.R0(t0);
  for (std::size_t mu = 0; mu < kd.poles.size(); ++mu) {
    if (mu == nu) continue;
    const cplx d = t0 - kd.poles[mu].pole.location;
    v += kd.poles[mu].exponent * std::log(d);
    if (!kd.poles[mu].principal_exp.is_zero()) v += kd.poles[mu].principal_exp(1.0 / d);
  }
  return v;
}

/// (1/2 pi i) \oint_{|t - center| = rho} exp(L(t)) dt by the trapezoid rule,
/// doubling from 2^8 nodes until two levels agree to tol.
template <class LogF>
QuadResult circle_trapezoid(const LogF& logf, cplx center, double rho, double tol, int kmax = 16) {
  auto level = [&](int N, double& peak, std::vector<cplx>& logs) {
    logs.resize(static_cast<std::size_t>(N));
    peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      const cplx e = std::polar(1.0, 2 * kPi * i / N);
      // f(t) dt / (2 pi i) = f(t) rho e^{i theta} d theta / (2 pi)
      logs[static_cast<std::size_t>(i)] = logf(center + rho * e, e) + std::log(rho * e);
      peak = std::max(peak, logs[static_cast<std::size_t>(i)].real());
    }
  };
  auto sum_at = [](const std::vector<cplx>& logs, double scale, double& abs_sum) {
    cplx s = 0.0;
    abs_sum = 0.0;
    for (const auto& l : logs) {
      if (!std::isfinite(l.real())) continue;
      const cplx v = std::exp(l - scale);
      s += v;
      abs_sum += std::abs(v);
    }
    return s / static_cast<double>(logs.size());
  };
  std::vector<cplx> logs;
  double peak;
  int N = 256;
  level(N, peak, logs);
  double abs_sum;
  cplx prev = sum_at(logs, peak, abs_sum);
  QuadResult r;
  r.nodes_used = N;
  for (int k = 9; k <= kmax; ++k) {
    N *= 2;
    double p2;
    level(N, p2, logs);
    const double scale = std::max(peak, p2);
    const cplx prev_s = prev * std::exp(peak - scale);
    const cplx cur = sum_at(logs, scale, abs_sum);
    r.nodes_used += N;
    const double diff = std::abs(cur - prev_s);
    const double floor = 64 * std::numeric_limits<double>::epsilon() * abs_sum / static_cast<double>(N);
    r.value = cur;
    r.log_scale = scale;
    r.est_error = diff;
    if (diff <= std::max(tol * std::abs(cur), floor)) {
      r.converged = true;
      return r;
    }
    prev = cur;
    peak = scale;
  }
  r.converged = false;
  return r;
}

/// Radius in (0, rho_max] minimizing the sampled peak of Re L on the circle.
template <class LogF>
double best_circle_radius(const LogF& logf, cplx center, double rho_max) {
  double best = rho_max, best_peak = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 48; ++i) {
    const double rho = rho_max * std::pow(2.0, -0.5 * i);
    double pk = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
      const cplx e = std::polar(1.0, 2 * kPi * k / 64);
      pk = std::max(pk, logf(center + rho * e, e).real() + std::log(rho));
    }
    if (pk < best_peak) {
      best_peak = pk;
      best = rho;
    }
  }
  return best;
}

}  // namespace detail

/// w(z) = res_{t0} [phi_L(t) e^{-zt}].
inline ResidueSolution residue_solution(const KernelData& kd, cplx pole, double tol = 1e-12) {
  const std::size_t nu = detail::find_pole(kd, pole);
  const KernelPole& kp = kd.poles[nu];
  ResidueSolution rs;
  rs.t0 = kp.pole.location;
  rs.lambda0 = kp.pole.residue;
  rs.m = kp.pole.multiplicity;
  rs.pole_order = 0;
  for (int k = rs.m; k >= 1; --k)
    if (std::abs(kp.pole.laurent[static_cast<std::size_t>(k - 1)]) > 1e-12 * (1.0 + std::abs(rs.lambda0))) {
      rs.pole_order = k;
      break;
    }
  const auto lam_int = integer_value(rs.lambda0, kp.pole.exact_residue());
  if (!lam_int) {
    std::ostringstream os;
    os << "residue of Q0/Q1 at " << rs.t0 << " is not an integer (" << rs.lambda0 << ")";
    throw NumericError(os.str());
  }
  rs.branch_note = "principal arg(t0 - t_mu) for every other singularity";
  const bool essential = !kp.principal_exp.is_zero();
  const long N = rs.m + *lam_int;
  const cplx t0 = rs.t0;
  auto shared = std::make_shared<const KernelData>(kd);

  if (!essential) {
    if (N <= 0) {
      rs.form = ResidueForm::IdenticallyZero;
      rs.handle.kind = SolutionKind::Residue;
      rs.handle.label = "res_zero";
      rs.handle.evaluator = [](cplx, int, double) {
        QuadResult r;
        r.value = 0.0;
        return r;
      };
      return rs;
    }
    const auto order = static_cast<std::size_t>(N);
    std::vector<cplx> h;
    bool exact_done = false;
    if (kd.exact() && kp.pole.exact_location) {
      bool all = true;
      for (const auto& other : kd.poles) all = all && other.exact_exponent && other.pole.exact_location;
      if (all) {
        try {
          const auto hx = detail::regular_factor_series<GaussRational>(kd, nu, order);
          std::vector<GaussRational> pc(order);
          GaussRational fact(1);
          for (std::size_t k = 0; k < order; ++k) {
            if (k > 0) fact = fact * GaussRational(static_cast<std::int64_t>(k));
            const GaussRational sg(k % 2 == 0 ? 1 : -1);
            pc[k] = hx[order - 1 - k] * sg / fact;
          }
          rs.exact_poly = QPoly(std::move(pc));
          rs.poly = to_cpoly(*rs.exact_poly);
          exact_done = true;
        } catch (const OverflowError&) {
        }
      }
    }
    if (!exact_done) {
      h = detail::regular_factor_series<cplx>(kd, nu, order);
      std::vector<cplx> pc(order);
      double fact = 1.0;
      for (std::size_t k = 0; k < order; ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        pc[k] = h[order - 1 - k] * (k % 2 == 0 ? 1.0 : -1.0) / fact;
      }
      rs.poly = CPoly(std::move(pc));
    }
    rs.log_const = detail::regular_factor_log_const(kd, nu);
    rs.form = t0 == cplx() ? ResidueForm::Polynomial : ResidueForm::ExpTimesPolynomial;
    ClosedForm cf;
    cf.poly = rs.poly;
    cf.exp_factor = -t0;
    SolutionHandle inner = closed_form_solution(cf);
    const cplx lc = rs.log_const;
    rs.handle.kind = SolutionKind::Residue;
    std::ostringstream lab;
    lab << "res_" << t0;
    rs.handle.label = lab.str();
    rs.handle.evaluator = [inner, lc](cplx z, int j, double tol2) {
      QuadResult r = inner(z, j, tol2);
      r.log_scale += lc.real();
      r.value *= std::polar(1.0, lc.imag());
      return r;
    };
    return rs;
  }

  // Essential singularity: circle quadrature with e^{-t0 z} factored out.
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t mu = 0; mu < kd.poles.size(); ++mu)
    if (mu != nu) dist = std::min(dist, std::abs(kd.poles[mu].pole.location - t0));
  const double rho_max = std::isfinite(dist) ? 0.5 * dist : 4.0;
  if (!(rho_max > 1e-12)) throw NumericError("residue circle radius underflow");
  rs.form = ResidueForm::ExpTimesEntire;
  rs.handle.kind = SolutionKind::Residue;
  std::ostringstream lab;
  lab << "res_" << t0;
  rs.handle.label = lab.str();
  rs.handle.evaluator = [shared, nu, t0, rho_max](cplx z, int j, double tol2) {
    const KernelData& k = *shared;
    std::vector<double> base(k.poles.size());
    for (std::size_t mu = 0; mu < k.poles.size(); ++mu)
      base[mu] = mu == nu ? 0.0 : std::arg(t0 - k.poles[mu].pole.location);
    auto logf = [&](cplx t, cplx e) {
      std::vector<double> args(k.poles.size());
      for (std::size_t mu = 0; mu < k.poles.size(); ++mu) {
        const cplx c = k.poles[mu].pole.location;
        args[mu] = mu == nu ? std::arg(e) : base[mu] + std::arg((t - c) / (t0 - c));
      }
      cplx v = log_kernel_with_args(k, t, args) - z * (t - t0);
      if (j > 0) v += static_cast<double>(j) * std::log(-t);
      return v;
    };
    const double rho = detail::best_circle_radius(logf, t0, rho_max);
    QuadResult r = detail::circle_trapezoid(logf, t0, rho, std::max(tol2, 1e-15));
    const cplx ez = -t0 * z;
    r.log_scale += ez.real();
    r.value *= std::polar(1.0, ez.imag());
    return r;
  };
  return rs;
}

// ---------------------------------------------------------------------------
// Symmetry sum

enum class SymmetryClass { IdenticallyZero, ResidueCombination, Subnormal };

inline const char* to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::IdenticallyZero: return "identically_zero";
    case SymmetryClass::ResidueCombination: return "residue_combination";
    case SymmetryClass::Subnormal: return "subnormal";
  }
  return "?";
}

struct SymmetrySum {
  SolutionHandle value;
  SymmetryClass classification;
  double radius = 0.0;
};

/// Lambda = sum_nu Lambda_nu = -(1/2 pi i) \oint_{|t| = R_0^* + 1} phi e^{-zt} dt.
inline SymmetrySum symmetry_sum(const KernelData& kd) {
  if (!kd.single_valued_outside()) {
    std::ostringstream os;
    os << "sum of residues " << kd.residue_sum << " is not an integer; phi_L is not single-valued outside the poles";
    throw NumericError(os.str());
  }
  SymmetrySum out;
  out.radius = kd.has_poles() ? kd.singular_radius + 1.0 : 1.0;
  if (!kd.has_poles()) {
    out.classification = SymmetryClass::IdenticallyZero;
  } else {
    bool all_int = true;
    for (const auto& kp : kd.poles) all_int = all_int && integer_value(kp.pole.residue, kp.pole.exact_residue()).has_value();
    out.classification = all_int ? SymmetryClass::ResidueCombination : SymmetryClass::Subnormal;
  }
  out.value.kind = SolutionKind::Circle;
  out.value.label = "Lambda_sum";
  if (!kd.has_poles()) {
    // The integrand is entire, so the circle integral vanishes.
    out.value.evaluator = [](cplx, int, double) { return QuadResult{}; };
    return out;
  }
  auto shared = std::make_shared<const KernelData>(kd);
  const double R = out.radius;
  out.value.evaluator = [shared, R](cplx z, int j, double tol) {
    const KernelData& k = *shared;
    auto logf = [&](cplx t, cplx e) {
      // Continuous branch from angle 0: arg(t - c) = theta + arg(1 - c/t).
      double th = std::arg(e);
      if (th < 0) th += 2 * kPi;
      std::vector<double> args(k.poles.size());
      for (std::size_t mu = 0; mu < k.poles.size(); ++mu) args[mu] = th + std::arg(1.0 - k.poles[mu].pole.location / t);
      cplx v = log_kernel_with_args(k, t, args) - z * t;
      if (j > 0) v += static_cast<double>(j) * std::log(-t);
      return v;
    };
    QuadResult r = detail::circle_trapezoid(logf, 0.0, R, std::max(tol, 1e-15));
    r.value = -r.value;
    return r;
  };
  return out;
}

// ---------------------------------------------------------------------------
// Checks

struct ResidualPoint {
  cplx z;
  double relative_residual = 0.0;
  bool ok = false;
};

struct ResidualReport {
  std::vector<ResidualPoint> points;
  double max_relative = 0.0;
  bool exact = false;       // decided by exact substitution
  bool exact_zero = false;  // exact residual vanished
  bool pass = false;
};

/// Exact substitution of (sum c_k z^k) e^{cz}; returns true iff L[w] == 0.
inline bool exact_residual_zero(const OdeSpec& spec, const ClosedForm& cf) {
  const auto d = detail::exp_poly_derivatives(*cf.exact_poly, *cf.exact_exp_factor, spec.n);
  QPoly res = d[static_cast<std::size_t>(spec.n)];
  for (int j = 0; j < spec.n; ++j) {
    const QPoly coeff{(*spec.exact_a)[static_cast<std::size_t>(j)], (*spec.exact_b)[static_cast<std::size_t>(j)]};
    res = res + coeff * d[static_cast<std::size_t>(j)];
  }
  return res.is_zero();
}

/// Relative ODE residual |L[w]| / sum |terms| at each point.
inline ResidualReport check_solution(const OdeSpec& spec, const SolutionHandle& s, const std::vector<cplx>& points,
                                     double tol) {
  ResidualReport rep;
  std::vector<QuadResult> d(static_cast<std::size_t>(spec.n + 1));
  for (const auto& z : points) {
    double scale = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= spec.n; ++j) {
      d[static_cast<std::size_t>(j)] = s(z, j, std::min(tol * 1e-2, 1e-12));
      scale = std::max(scale, d[static_cast<std::size_t>(j)].log_scale);
    }
    cplx sum = 0.0;
    double mag = 0.0;
    for (int j = 0; j <= spec.n; ++j) {
      const cplx c = j == spec.n ? cplx(1.0) : spec.a[static_cast<std::size_t>(j)] + spec.b[static_cast<std::size_t>(j)] * z;
      const cplx term = c * d[static_cast<std::size_t>(j)].rescaled(scale).value;
      sum += term;
      mag += std::abs(term);
    }
    ResidualPoint rp{z, mag > 0 ? std::abs(sum) / mag : 0.0, false};
    rp.ok = rp.relative_residual <= tol;
    rep.max_relative = std::max(rep.max_relative, rp.relative_residual);
    rep.points.push_back(rp);
  }
  rep.pass = rep.max_relative <= tol;
  return rep;
}

/// Closed-form overload: exact substitution when both the spec and the form are exact.
inline ResidualReport check_solution(const OdeSpec& spec, const ClosedForm& cf, const std::vector<cplx>& points,
                                     double tol) {
  if (spec.exact() && cf.exact()) {
    ResidualReport rep;
    rep.exact = true;
    rep.exact_zero = exact_residual_zero(spec, cf);
    rep.pass = rep.exact_zero;
    rep.max_relative = rep.exact_zero ? 0.0 : 1.0;
    for (const auto& z : points) rep.points.push_back({z, rep.max_relative, rep.exact_zero});
    return rep;
  }
  return check_solution(spec, closed_form_solution(cf), points, tol);
}

enum class Verdict { Independent, DependentSuspected };

struct IndependenceResult {
  QuadResult wronskian;
  double normalized_det = 0.0;  // |det| / prod of column norms after equilibration
  Verdict verdict = Verdict::DependentSuspected;
};

/// Wronskian at z0 from derivative evaluations. Numerical verdict only.
inline IndependenceResult independence_check(const std::vector<SolutionHandle>& hs, cplx z0, double tol = 1e-7,
                                             double eval_tol = 1e-12) {
  const std::size_t m = hs.size();
  if (m == 0) throw std::invalid_argument("independence_check: empty list");
  std::vector<std::vector<cplx>> a(m, std::vector<cplx>(m));
  double log_scale = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<QuadResult> col;
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      col.push_back(hs[c](z0, static_cast<int>(r), eval_tol));
      s = std::max(s, col.back().log_scale);
    }
    for (std::size_t r = 0; r < m; ++r) a[r][c] = col[r].rescaled(s).value;
    log_scale += s;
  }
  // Row equilibration is a positive diagonal scaling; remember it for the Wronskian.
  for (std::size_t r = 0; r < m; ++r) {
    double mx = 0.0;
    for (std::size_t c = 0; c < m; ++c) mx = std::max(mx, std::abs(a[r][c]));
    if (mx > 0) {
      for (auto& v : a[r]) v /= mx;
      log_scale += std::log(mx);
    }
  }
  double hadamard = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    double nrm = 0.0;
    for (std::size_t r = 0; r < m; ++r) nrm += std::norm(a[r][c]);
    hadamard *= std::sqrt(nrm);
  }
  // Gaussian elimination with partial pivoting.
  cplx det = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < m; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    if (a[piv][k] == cplx()) {
      det = 0.0;
      break;
    }
    if (piv != k) {
      std::swap(a[piv], a[k]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t r = k + 1; r < m; ++r) {
      const cplx f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < m; ++c) a[r][c] -= f * a[k][c];
    }
  }
  IndependenceResult res;
  res.wronskian.value = det;
  res.wronskian.log_scale = log_scale;
  res.normalized_det = hadamard > 0 ? std::abs(det) / hadamard : 0.0;
  res.verdict = res.normalized_det > tol ? Verdict::Independent : Verdict::DependentSuspected;
  return res;
}

/// Handle for the original (unnormalized) variable: w(z) = v(z / scale).
inline SolutionHandle in_original_variable(const SolutionHandle& h, cplx scale) {
  if (scale == cplx(1.0)) return h;
  SolutionHandle out = h;
  out.evaluator = [h, scale](cplx z, int j, double tol) {
    QuadResult r = h(z / scale, j, tol);
    const cplx f = std::pow(scale, -j);
    r.value *= f / std::abs(f);
    r.log_scale += std::log(std::abs(f));
    return r;
  };
  return out;
}

}  // namespace lci
