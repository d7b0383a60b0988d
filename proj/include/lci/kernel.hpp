// The kernel phi_L(t) = prod (t - t_nu)^(-m_nu - lambda_nu)
//                       * exp[R0(t) + sum R_nu(1/(t - t_nu))]
// and its logarithm continued along paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lci/odespec.hpp"
#include "lci/poly.hpp"
#include "lci/ratfun.hpp"

namespace lci {

inline constexpr double kPi = std::numbers::pi;

struct KernelPole {
  PoleData pole;
  cplx exponent;        // -(m + lambda)
  CPoly principal_exp;  // R_nu(u), u = 1/(t - t_nu); degree <= m - 1, zero constant term
  std::optional<GaussRational> exact_exponent;
  std::optional<QPoly> exact_principal_exp;

  double clearance() const { return 1e-3 * (1.0 + std::abs(pole.location)); }
};

struct KernelData {
  int n = 0;
  int q = 0;
  int p = 0;
  CPoly R0;  // leading term t^(n-q+1)/(n-q+1), zero constant term
  std::optional<QPoly> exact_R0;
  std::vector<KernelPole> poles;
  double singular_radius = 0.0;  // R_0^*
  cplx residue_sum;
  std::optional<GaussRational> exact_residue_sum;

  /// n - q + 1, the degree of R0.
  int valley_degree() const { return n - q + 1; }
  bool single_valued_outside() const { return integer_value(residue_sum, exact_residue_sum).has_value(); }
  bool exact() const { return exact_R0.has_value(); }
  bool has_poles() const { return !poles.empty(); }
};

/// Kernel of a normalized spec (b_q = (-1)^(n-q+1)).
inline KernelData build_kernel(const OdeSpec& spec) {
  const auto idx = struct_indices(spec);
  const auto Q = build_Q(spec);
  const auto pf = partial_fractions(Q.Q0, Q.Q1, Q.Q0x, Q.Q1x);
  KernelData kd;
  kd.n = spec.n;
  kd.q = idx.q;
  kd.p = idx.p;
  kd.R0 = -pf.outer.integral();
  if (pf.exact()) kd.exact_R0 = -pf.exact_outer->integral();
  const int k = kd.valley_degree();
  const cplx lead = kd.R0.leading();
  if (std::abs(lead - cplx(1.0 / k)) > 1e-12)
    throw SpecError("build_kernel: spec is not normalized (b_q must equal (-1)^(n-q+1))");

  kd.residue_sum = 0.0;
  std::optional<GaussRational> xsum = pf.exact() ? std::optional<GaussRational>(GaussRational(0)) : std::nullopt;
  for (const auto& pd : pf.poles) {
    KernelPole kp;
    kp.pole = pd;
    kp.exponent = -(static_cast<double>(pd.multiplicity) + pd.residue);
    std::vector<cplx> rc(static_cast<std::size_t>(pd.multiplicity), cplx());
    for (int kk = 2; kk <= pd.multiplicity; ++kk)
      rc[static_cast<std::size_t>(kk - 1)] = pd.laurent[static_cast<std::size_t>(kk - 1)] / static_cast<double>(kk - 1);
    kp.principal_exp = CPoly(std::move(rc));
    if (pd.exact_laurent) {
      const auto& xl = *pd.exact_laurent;
      kp.exact_exponent = -(GaussRational(pd.multiplicity) + xl[0]);
      std::vector<GaussRational> xr(static_cast<std::size_t>(pd.multiplicity), GaussRational(0));
      for (int kk = 2; kk <= pd.multiplicity; ++kk)
        xr[static_cast<std::size_t>(kk - 1)] = xl[static_cast<std::size_t>(kk - 1)] / GaussRational(kk - 1);
      kp.exact_principal_exp = QPoly(std::move(xr));
      if (xsum) *xsum += xl[0];
    }
    kd.residue_sum += pd.residue;
    kd.singular_radius = std::max(kd.singular_radius, std::abs(pd.location));
    kd.poles.push_back(std::move(kp));
  }
  kd.exact_residue_sum = xsum;
  return kd;
}

/// log phi at t with the supplied argument of (t - t_nu) for every pole.
inline cplx log_kernel_with_args(const KernelData& kd, cplx t, const std::vector<double>& args) {
  cplx v = kd.R0(t);
  for (std::size_t i = 0; i < kd.poles.size(); ++i) {
    const auto& kp = kd.poles[i];
    const cplx d = t - kp.pole.location;
    v += kp.exponent * cplx(std::log(std::abs(d)), args[i]);
    if (!kp.principal_exp.is_zero()) v += kp.principal_exp(1.0 / d);
  }
  return v;
}

/// Arguments of (t - t_nu) chosen in (ref - pi, ref + pi].
inline std::vector<double> branch_args_near(const KernelData& kd, cplx t, double ref) {
  std::vector<double> a(kd.poles.size());
  for (std::size_t i = 0; i < kd.poles.size(); ++i) {
    double x = std::arg(t - kd.poles[i].pole.location);
    while (x > ref + kPi) x -= 2 * kPi;
    while (x <= ref - kPi) x += 2 * kPi;
    a[i] = x;
  }
  return a;
}

/// d/dt log phi, from the stored factored form.
inline cplx log_kernel_derivative(const KernelData& kd, cplx t) {
  cplx v = kd.R0.derivative()(t);
  for (const auto& kp : kd.poles) {
    const cplx u = 1.0 / (t - kp.pole.location);
    v += kp.exponent * u;
    if (!kp.principal_exp.is_zero()) v += kp.principal_exp.derivative()(u) * (-u * u);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Paths

/// Straight line a -> b or circular arc R e^{i phi}, phi from phi0 to phi1.
struct Segment {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  cplx a, b;
  double radius = 0.0, phi0 = 0.0, phi1 = 0.0;

  static Segment line(cplx from, cplx to) { return {Kind::Line, from, to, 0.0, 0.0, 0.0}; }
  static Segment arc(double r, double from, double to) { return {Kind::Arc, {}, {}, r, from, to}; }

  cplx point(double s) const {
    if (kind == Kind::Line) return a + s * (b - a);
    return std::polar(radius, phi0 + s * (phi1 - phi0));
  }
  cplx tangent(double s) const {
    if (kind == Kind::Line) return b - a;
    const double ph = phi0 + s * (phi1 - phi0);
    return cplx(0.0, phi1 - phi0) * std::polar(radius, ph);
  }
  double length() const { return kind == Kind::Line ? std::abs(b - a) : radius * std::abs(phi1 - phi0); }
};

/// Piecewise path; the global parameter s runs over [0, segments.size()].
struct Path {
  std::vector<Segment> segments;
  double start_angle = 0.0;  // branch reference angle at the start point

  std::size_t size() const { return segments.size(); }
  std::pair<std::size_t, double> locate(double s) const {
    const double top = static_cast<double>(segments.size());
    s = std::clamp(s, 0.0, top);
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i >= segments.size()) i = segments.size() - 1;
    return {i, s - static_cast<double>(i)};
  }
  cplx point(double s) const {
    auto [i, u] = locate(s);
    return segments[i].point(u);
  }
  cplx tangent(double s) const {
    auto [i, u] = locate(s);
    return segments[i].tangent(u);
  }
};

inline Path circle_path(double radius, double start_angle) {
  Path p;
  // Four quarter arcs keep the branch-tracker bisection shallow.
  for (int k = 0; k < 4; ++k)
    p.segments.push_back(Segment::arc(radius, start_angle + k * kPi / 2, start_angle + (k + 1) * kPi / 2));
  p.start_angle = start_angle;
  return p;
}

struct BranchError : NumericError {
  using NumericError::NumericError;
};

/// Per-path continuation of arg(t - t_nu): anchors at which the argument is
/// tracked continuously, spaced so that each step is below pi/8.
class BranchState {
 public:
  BranchState(const KernelData& kd, const Path& path) : kd_(&kd), path_(&path) {
    if (path.segments.empty()) throw std::invalid_argument("BranchState: empty path");
    check_clearance();
    const cplx t0 = path.point(0.0);
    std::vector<double> a0 = branch_args_near(kd, t0, path.start_angle);
    s_.push_back(0.0);
    args_.push_back(a0);
    for (std::size_t seg = 0; seg < path.size(); ++seg) extend(static_cast<double>(seg), static_cast<double>(seg + 1), 0);
  }

  /// Continued arguments at parameter s.
  std::vector<double> args_at(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin() - 1);
    const cplx ta = path_->point(s_[i]);
    const cplx t = path_->point(s);
    std::vector<double> out(args_[i].size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const cplx c = kd_->poles[k].pole.location;
      out[k] = args_[i][k] + std::arg((t - c) / (ta - c));
    }
    return out;
  }

  cplx log_kernel(double s) const { return log_kernel_with_args(*kd_, path_->point(s), args_at(s)); }

  /// Accumulated argument change of each (t - t_nu) from start to end.
  std::vector<double> total_winding() const {
    std::vector<double> w(args_.back().size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = args_.back()[k] - args_.front()[k];
    return w;
  }

  std::size_t anchors() const { return s_.size(); }

 private:
  void check_clearance() const {
    for (const auto& kp : kd_->poles) {
      for (std::size_t seg = 0; seg < path_->size(); ++seg) {
        const Segment& sg = path_->segments[seg];
        double dmin;
        if (sg.kind == Segment::Kind::Line) {
          const cplx ab = sg.b - sg.a;
          const double l2 = std::norm(ab);
          double u = l2 > 0 ? ((kp.pole.location - sg.a) * std::conj(ab)).real() / l2 : 0.0;
          u = std::clamp(u, 0.0, 1.0);
          dmin = std::abs(sg.a + u * ab - kp.pole.location);
        } else {
          dmin = 1e300;
          for (int i = 0; i <= 512; ++i) dmin = std::min(dmin, std::abs(sg.point(i / 512.0) - kp.pole.location));
        }
        if (dmin < kp.clearance()) throw BranchError("path passes too close to a kernel pole");
      }
    }
  }

  void extend(double s0, double s1, int depth) {
    const cplx ta = path_->point(s0);
    const cplx tb = path_->point(s1);
    const auto& prev = args_.back();
    double worst = 0.0;
    std::vector<double> next(prev.size());
    for (std::size_t k = 0; k < prev.size(); ++k) {
      const cplx c = kd_->poles[k].pole.location;
      const double step = std::arg((tb - c) / (ta - c));
      worst = std::max(worst, std::abs(step));
      next[k] = prev[k] + step;
    }
    if (worst >= kPi / 8) {
      if (depth > 60) throw BranchError("branch step too large; path must be refined");
      const double sm = 0.5 * (s0 + s1);
      extend(s0, sm, depth + 1);
      extend(sm, s1, depth + 1);
      return;
    }
    s_.push_back(s1);
    args_.push_back(std::move(next));
  }

  const KernelData* kd_;
  const Path* path_;
  std::vector<double> s_;
  std::vector<std::vector<double>> args_;
};

struct LogKernelValue {
  cplx value;
  std::vector<double> args;
};

/// log phi_L at path(s), continued from the start of the path.
inline LogKernelValue log_kernel(const KernelData& kd, const Path& path, double s) {
  const BranchState st(kd, path);
  auto args = st.args_at(s);
  return {log_kernel_with_args(kd, path.point(s), args), std::move(args)};
}

/// Constant C with |R0(t) - t^k/k + sum ...| <= C |t|^(k-1) for |t| >= R_0^* + 1,
/// collecting the lower-order part of R0 and bounded pole contributions.
inline double psi_bound_constant(const KernelData& kd) {
  double c = 0.0;
  const int k = kd.valley_degree();
  for (int i = 0; i < k; ++i) c += std::abs(kd.R0[static_cast<std::size_t>(i)]);
  for (const auto& kp : kd.poles) {
    double rs = 0.0;
    for (const auto& v : kp.principal_exp.coeffs()) rs += std::abs(v);
    c += rs;
  }
  return c;
}

}  // namespace lci
