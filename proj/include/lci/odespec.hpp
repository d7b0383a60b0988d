// ODE specifications  w^(n) + sum_{j<n} (a_j + b_j z) w^(j) = 0.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "lci/exact.hpp"
#include "lci/poly.hpp"

namespace lci {

/// Malformed or inadmissible user input.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not reach its contract.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OdeSpec {
  int n = 0;
  std::vector<cplx> a;  // a_0 .. a_{n-1}
  std::vector<cplx> b;  // b_0 .. b_{n-1}
  // Present when every coefficient is a small Gaussian rational.
  std::optional<std::vector<GaussRational>> exact_a;
  std::optional<std::vector<GaussRational>> exact_b;

  bool exact() const { return exact_a.has_value() && exact_b.has_value(); }
};

struct StructIndices {
  int q = 0;
  int p = 0;
  Rational rho_max;  // 1 + 1/(n-q)
};

struct QPolys {
  CPoly Q0;
  CPoly Q1;
  std::optional<QPoly> Q0x;
  std::optional<QPoly> Q1x;
};

namespace detail {

inline std::optional<GaussRational> exact_of(cplx v) {
  auto tol_of = [](double x) { return 4e-16 * std::max(1.0, std::abs(x)); };
  auto re = Rational::approximate(v.real(), 1'000'000, tol_of(v.real()));
  auto im = Rational::approximate(v.imag(), 1'000'000, tol_of(v.imag()));
  if (!re || !im) return std::nullopt;
  return GaussRational(*re, *im);
}

inline cplx parse_coefficient(const nlohmann::json& c, const std::string& where) {
  if (c.is_number()) return {c.get<double>(), 0.0};
  if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
    return {c[0].get<double>(), c[1].get<double>()};
  throw SpecError(where + ": coefficient must be a number or a [re, im] pair");
}

inline void attach_exact(OdeSpec& s) {
  std::vector<GaussRational> ea, eb;
  for (const auto& v : s.a) {
    auto e = exact_of(v);
    if (!e) return;
    ea.push_back(*e);
  }
  for (const auto& v : s.b) {
    auto e = exact_of(v);
    if (!e) return;
    eb.push_back(*e);
  }
  s.exact_a = std::move(ea);
  s.exact_b = std::move(eb);
}

}  // namespace detail

/// Checks the invariants; throws SpecError naming the violated rule.
inline void validate(const OdeSpec& s) {
  if (s.n < 2) throw SpecError("invariant violated: n >= 2 (got n = " + std::to_string(s.n) + ")");
  if (static_cast<int>(s.a.size()) != s.n || static_cast<int>(s.b.size()) != s.n)
    throw SpecError("invariant violated: a and b must each hold exactly n coefficients");
  for (const auto& v : s.a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SpecError("invariant violated: coefficients must be finite");
  for (const auto& v : s.b)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SpecError("invariant violated: coefficients must be finite");
  bool any_b = false;
  for (const auto& v : s.b) any_b = any_b || v != cplx();
  if (!any_b) throw SpecError("invariant violated: all b_j are zero (at least one b_j must be nonzero)");
  if (s.a[0] == cplx() && s.b[0] == cplx()) throw SpecError("invariant violated: a_0 + b_0 z must not vanish identically");
}

/// Builds a spec from complex coefficients; the exact fast path is attached
/// automatically when all inputs are small Gaussian rationals.
inline OdeSpec make_spec(int n, std::vector<cplx> a, std::vector<cplx> b) {
  OdeSpec s;
  s.n = n;
  s.a = std::move(a);
  s.b = std::move(b);
  validate(s);
  detail::attach_exact(s);
  return s;
}

inline OdeSpec parse_ode(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::ostringstream os;
    os << "syntax error at byte " << e.byte << ": " << e.what();
    throw SpecError(os.str());
  }
  if (!j.is_object()) throw SpecError("syntax error: top-level value must be an object");
  for (const char* key : {"n", "a", "b"})
    if (!j.contains(key)) throw SpecError(std::string("syntax error: missing key \"") + key + "\"");
  if (!j["n"].is_number_integer()) throw SpecError("syntax error: \"n\" must be an integer");
  if (!j["a"].is_array() || !j["b"].is_array()) throw SpecError("syntax error: \"a\" and \"b\" must be arrays");
  OdeSpec s;
  s.n = j["n"].get<int>();
  for (std::size_t k = 0; k < j["a"].size(); ++k)
    s.a.push_back(detail::parse_coefficient(j["a"][k], "a[" + std::to_string(k) + "]"));
  for (std::size_t k = 0; k < j["b"].size(); ++k)
    s.b.push_back(detail::parse_coefficient(j["b"][k], "b[" + std::to_string(k) + "]"));
  validate(s);
  detail::attach_exact(s);
  return s;
}

inline nlohmann::json spec_to_json(const OdeSpec& s) {
  auto enc = [](const std::vector<cplx>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : v) {
      if (c.imag() == 0.0)
        arr.push_back(c.real());
      else
        arr.push_back({c.real(), c.imag()});
    }
    return arr;
  };
  return {{"n", s.n}, {"a", enc(s.a)}, {"b", enc(s.b)}};
}

inline StructIndices struct_indices(const OdeSpec& s) {
  StructIndices r;
  r.q = -1;
  r.p = -1;
  for (int j = 0; j < s.n; ++j) {
    if (s.b[static_cast<std::size_t>(j)] == cplx()) continue;
    if (r.p < 0) r.p = j;
    r.q = j;
  }
  r.rho_max = Rational(1) + Rational(1, s.n - r.q);
  return r;
}

namespace detail {

template <class T>
std::pair<Poly<T>, Poly<T>> build_q_impl(int n, const std::vector<T>& a, const std::vector<T>& b) {
  // (-t)^j has coefficient (-1)^j at degree j.
  auto sgn = [](int j) { return T(static_cast<std::int64_t>(j % 2 == 0 ? 1 : -1)); };
  std::vector<T> q0(static_cast<std::size_t>(n + 1), T(0)), q1(static_cast<std::size_t>(n), T(0));
  q0[static_cast<std::size_t>(n)] = sgn(n);
  for (int j = 0; j < n; ++j) {
    q0[static_cast<std::size_t>(j)] = sgn(j) * a[static_cast<std::size_t>(j)];
    q1[static_cast<std::size_t>(j)] = sgn(j) * b[static_cast<std::size_t>(j)];
  }
  return {Poly<T>(std::move(q0)), Poly<T>(std::move(q1))};
}

}  // namespace detail

/// Q0(t) = (-t)^n + sum a_j (-t)^j,  Q1(t) = sum b_j (-t)^j.
inline QPolys build_Q(const OdeSpec& s) {
  QPolys r;
  std::tie(r.Q0, r.Q1) = detail::build_q_impl<cplx>(s.n, s.a, s.b);
  if (s.exact()) {
    auto [q0, q1] = detail::build_q_impl<GaussRational>(s.n, *s.exact_a, *s.exact_b);
    r.Q0x = std::move(q0);
    r.Q1x = std::move(q1);
  }
  return r;
}

/// Inverse of build_Q: reads (a, b) back from (Q0, Q1).
inline OdeSpec spec_from_Q(int n, const CPoly& Q0, const CPoly& Q1) {
  std::vector<cplx> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double sg = j % 2 == 0 ? 1.0 : -1.0;
    a[static_cast<std::size_t>(j)] = sg * Q0[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(j)] = sg * Q1[static_cast<std::size_t>(j)];
  }
  return make_spec(n, std::move(a), std::move(b));
}

struct Normalized {
  OdeSpec spec;
  cplx scale{1.0, 0.0};
};

/// Substitutes z -> scale*z so that b_q = (-1)^(n-q+1).
///
/// Among the n-q+1 admissible scales a real one is preferred (positive first);
/// otherwise the one with smallest |arg|, ties going to positive imaginary part.
inline Normalized normalize(const OdeSpec& s) {
  const auto idx = struct_indices(s);
  const int k = s.n - idx.q + 1;
  const cplx target = (k % 2 == 0) ? cplx(1.0) : cplx(-1.0);
  const cplx bq = s.b[static_cast<std::size_t>(idx.q)];
  if (bq == target) return {s, cplx(1.0)};

  const cplx w = target / bq;  // scale^k = w
  std::vector<cplx> cands;
  const double mod = std::pow(std::abs(w), 1.0 / k);
  for (int m = 0; m < k; ++m) cands.push_back(std::polar(mod, (std::arg(w) + 2.0 * std::numbers::pi * m) / k));

  auto is_real = [&](cplx c) { return std::abs(c.imag()) <= 1e-14 * std::abs(c); };
  cplx best = cands.front();
  bool have = false;
  for (const auto& c : cands)
    if (is_real(c) && c.real() > 0) best = c, have = true;
  if (!have)
    for (const auto& c : cands)
      if (is_real(c)) best = c, have = true;
  if (!have) {
    best = cands.front();
    for (const auto& c : cands) {
      const double da = std::abs(std::arg(c)), db = std::abs(std::arg(best));
      if (da < db - 1e-12 || (std::abs(da - db) <= 1e-12 && c.imag() > best.imag())) best = c;
    }
  }
  if (is_real(best)) best = cplx(best.real(), 0.0);
  if (std::abs(best.real()) <= 1e-14 * std::abs(best)) best = cplx(0.0, best.imag());

  std::vector<cplx> a(s.a.size()), b(s.b.size());
  for (int j = 0; j < s.n; ++j) {
    a[static_cast<std::size_t>(j)] = s.a[static_cast<std::size_t>(j)] * std::pow(best, s.n - j);
    b[static_cast<std::size_t>(j)] = s.b[static_cast<std::size_t>(j)] * std::pow(best, s.n - j + 1);
  }
  OdeSpec out;
  out.n = s.n;
  out.a = std::move(a);
  out.b = std::move(b);

  // Exact path survives when the scale is a Gaussian rational.
  if (s.exact()) {
    if (auto sx = detail::exact_of(best)) {
      try {
        std::vector<GaussRational> ea, eb;
        for (int j = 0; j < s.n; ++j) {
          GaussRational pa(1), pb(1);
          for (int e = 0; e < s.n - j; ++e) pa *= *sx;
          pb = pa * *sx;
          ea.push_back((*s.exact_a)[static_cast<std::size_t>(j)] * pa);
          eb.push_back((*s.exact_b)[static_cast<std::size_t>(j)] * pb);
        }
        if (eb[static_cast<std::size_t>(idx.q)] == GaussRational(target.real() > 0 ? 1 : -1)) {
          for (int j = 0; j < s.n; ++j) {
            out.a[static_cast<std::size_t>(j)] = ea[static_cast<std::size_t>(j)].to_complex();
            out.b[static_cast<std::size_t>(j)] = eb[static_cast<std::size_t>(j)].to_complex();
          }
          out.exact_a = std::move(ea);
          out.exact_b = std::move(eb);
        }
      } catch (const OverflowError&) {
      }
    }
  }
  if (!out.exact()) out.b[static_cast<std::size_t>(idx.q)] = target;
  validate(out);
  return {std::move(out), best};
}

}  // namespace lci
