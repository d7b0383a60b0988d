// Command-line front end: eval, verify, report, indicator, zeros, residues, symmetry.
//
// Exit codes: 0 ok, 1 verification failed, 2 input error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lci/analysis.hpp"
#include "lci/solutions.hpp"

namespace {

using lci::cplx;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kVerifyFail = 1, kInputError = 2, kNumericError = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(cplx z) {
  if (z.imag() == 0.0) return fmt(z.real());
  return fmt(z.real()) + (std::signbit(z.imag()) ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

// Doubles are stored through a string round trip so JSON output is 17 digits.
ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return ordered_json::parse(fmt(x));
}

ordered_json cnum(cplx z) { return ordered_json::array({num(z.real()), num(z.imag())}); }

double parse_real(const std::string& t, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size() || t.empty()) throw InputError("cannot parse complex number '" + whole + "'");
  return v;
}

/// Accepts "1.5", "-2i", "1+2i", "3-0.5i", "i".
cplx parse_complex(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) throw InputError("empty complex number");
  if (t.back() != 'i' && t.back() != 'j') return {parse_real(t, text), 0.0};
  t.pop_back();
  // Split at the last sign that is not a leading sign or an exponent sign.
  std::size_t cut = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      cut = k;
      break;
    }
  std::string re_s = cut == std::string::npos ? "" : t.substr(0, cut);
  std::string im_s = cut == std::string::npos ? t : t.substr(cut);
  if (im_s.empty() || im_s == "+") im_s = "1";
  if (im_s == "-") im_s = "-1";
  return {re_s.empty() ? 0.0 : parse_real(re_s, text), parse_real(im_s, text)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Config {
  std::string spec_path;
  double tol = 1e-10;
  std::vector<std::string> z;
  std::vector<int> j{0};
  int nu = 0;
  int theta_grid = 60;
  std::vector<double> radii{10, 20, 40};
  std::string format = "json";
  std::string out;
  std::string closed_form;
  double threshold = 1e-8;
  int points = 20;
  double theta1 = -lci::kPi / 2, theta2 = lci::kPi / 2, radius = 6.0;
  double zero_radius = 4.0;
};

struct Loaded {
  lci::OdeSpec original;
  lci::Normalized norm;
  lci::KernelData kd;
};

Loaded load(const Config& c) {
  Loaded L;
  L.original = lci::parse_ode(read_file(c.spec_path));
  L.norm = lci::normalize(L.original);
  L.kd = lci::build_kernel(L.norm.spec);
  return L;
}

std::vector<cplx> parse_points(const Config& c) {
  std::vector<cplx> zs;
  for (const auto& s : c.z) zs.push_back(parse_complex(s));
  return zs;
}

/// Deterministic sample points in |z| <= 3 (golden-angle spiral).
std::vector<cplx> default_points(int count) {
  std::vector<cplx> zs;
  const double golden = lci::kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) zs.push_back(std::polar(3.0 * std::sqrt((k + 0.5) / count), k * golden));
  return zs;
}

void emit(const Config& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(c.out);
  if (!o) throw InputError("cannot write '" + c.out + "'");
  o << text;
}

ordered_json spec_json(const lci::OdeSpec& s) {
  ordered_json a = ordered_json::array(), b = ordered_json::array();
  for (const auto& v : s.a) a.push_back(cnum(v));
  for (const auto& v : s.b) b.push_back(cnum(v));
  return {{"n", s.n}, {"a", a}, {"b", b}};
}

std::string rational_text(const lci::Rational& r) {
  return r.den() == 1 ? std::to_string(r.num()) : std::to_string(r.num()) + "/" + std::to_string(r.den());
}

const char* form_name(lci::ResidueForm f) {
  switch (f) {
    case lci::ResidueForm::Polynomial: return "polynomial";
    case lci::ResidueForm::ExpTimesPolynomial: return "exp_times_polynomial";
    case lci::ResidueForm::ExpTimesEntire: return "exp_times_entire";
    case lci::ResidueForm::IdenticallyZero: return "identically_zero";
  }
  return "?";
}

// ---------------------------------------------------------------------------

int cmd_eval(const Config& c) {
  const auto zs = parse_points(c);
  if (zs.empty()) throw InputError("eval: at least one --z value is required");
  const Loaded L = load(c);
  const auto h = lci::in_original_variable(lci::lambda_solution(L.kd, c.nu), L.norm.scale);
  std::ostringstream os;
  ordered_json rows = ordered_json::array();
  if (c.format == "csv") os << "z_re,z_im,j,mantissa_re,mantissa_im,log_scale,est_error,value_re,value_im\n";
  bool failed = false;
  for (const auto& z : zs)
    for (int j : c.j) {
      const auto r = h(z, j, c.tol);
      failed = failed || !r.converged;
      const cplx v = r.folded();
      if (c.format == "csv") {
        os << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << j << ',' << fmt(r.value.real()) << ',' << fmt(r.value.imag())
           << ',' << fmt(r.log_scale) << ',' << fmt(r.est_error) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
      } else {
        rows.push_back({{"z", cnum(z)},
                        {"j", j},
                        {"mantissa", cnum(r.value)},
                        {"log_scale", num(r.log_scale)},
                        {"est_error", num(r.est_error)},
                        {"value", cnum(v)},
                        {"converged", r.converged}});
      }
    }
  if (c.format != "csv") os << ordered_json{{"solution", "Lambda_" + std::to_string(c.nu)}, {"rows", rows}}.dump(2) << '\n';
  emit(c, os.str());
  return failed ? kNumericError : kOk;
}

int cmd_verify(const Config& c) {
  const Loaded L = load(c);
  const auto zs = c.z.empty() ? default_points(c.points) : parse_points(c);
  ordered_json outj;
  outj["spec"] = c.spec_path;
  outj["threshold"] = num(c.threshold);
  bool pass = true;
  if (!c.closed_form.empty()) {
    const auto cf = lci::parse_closed_form(read_file(c.closed_form));
    const auto rep = lci::check_solution(L.original, cf, zs, c.threshold);
    outj["closed_form"] = {{"file", c.closed_form},
                           {"exact", rep.exact},
                           {"max_relative_residual", num(rep.max_relative)},
                           {"pass", rep.pass}};
    pass = pass && rep.pass;
  } else {
    const auto h = lci::lambda_solution(L.kd, 0);
    std::vector<cplx> zn;
    for (const auto& z : zs) zn.push_back(z / L.norm.scale);
    const auto rep = lci::check_solution(L.norm.spec, h, zn, c.threshold);
    outj["Lambda_0"] = {{"points", zs.size()}, {"max_relative_residual", num(rep.max_relative)}, {"pass", rep.pass}};
    pass = pass && rep.pass;
  }
  outj["pass"] = pass;
  emit(c, outj.dump(2) + "\n");
  return pass ? kOk : kVerifyFail;
}

ordered_json residues_json(const lci::KernelData& kd, double tol) {
  ordered_json arr = ordered_json::array();
  for (const auto& kp : kd.poles) {
    ordered_json e{{"pole", cnum(kp.pole.location)},
                   {"multiplicity", kp.pole.multiplicity},
                   {"lambda", cnum(kp.pole.residue)}};
    try {
      const auto rs = lci::residue_solution(kd, kp.pole.location, tol);
      e["form"] = form_name(rs.form);
      if (rs.form == lci::ResidueForm::Polynomial || rs.form == lci::ResidueForm::ExpTimesPolynomial) {
        ordered_json p = ordered_json::array();
        for (int k = 0; k <= rs.poly.degree(); ++k) p.push_back(cnum(rs.poly[static_cast<std::size_t>(k)]));
        e["poly"] = p;
        e["exp_factor"] = cnum(-rs.t0);
        e["log_const"] = cnum(rs.log_const);
        if (rs.exact_poly) {
          std::ostringstream os;
          for (int k = 0; k <= rs.exact_poly->degree(); ++k) os << (k ? " " : "") << (*rs.exact_poly)[static_cast<std::size_t>(k)];
          e["poly_exact"] = os.str();
        }
      }
      if (rs.form == lci::ResidueForm::ExpTimesEntire) {
        e["exp_factor"] = cnum(-rs.t0);
        const auto v = rs.handle(cplx(1.0), 0, tol);
        e["value_at_1"] = cnum(v.folded());
      }
    } catch (const lci::NumericError& ex) {
      e["form"] = nullptr;
      e["note"] = ex.what();
    }
    arr.push_back(e);
  }
  return arr;
}

int cmd_residues(const Config& c) {
  const Loaded L = load(c);
  emit(c, ordered_json{{"scale", cnum(L.norm.scale)}, {"residues", residues_json(L.kd, c.tol)}}.dump(2) + "\n");
  return kOk;
}

int cmd_symmetry(const Config& c) {
  const Loaded L = load(c);
  const auto ss = lci::symmetry_sum(L.kd);
  const auto zs = c.z.empty() ? std::vector<cplx>{0.5, cplx(0, 1), cplx(-1, 0.5)} : parse_points(c);
  ordered_json rows = ordered_json::array();
  std::vector<lci::SolutionHandle> ls;
  for (int nu = 0; nu < L.kd.valley_degree(); ++nu) ls.push_back(lci::lambda_solution(L.kd, nu));
  for (const auto& z : zs) {
    const auto circ = ss.value(z, 0, c.tol);
    lci::QuadResult sum = ls[0](z, 0, c.tol);
    for (std::size_t k = 1; k < ls.size(); ++k) sum = lci::combine(sum, ls[k](z, 0, c.tol));
    rows.push_back({{"z", cnum(z)}, {"circle", cnum(circ.folded())}, {"sum_lambda", cnum(sum.folded())}});
  }
  emit(c, ordered_json{{"classification", lci::to_string(ss.classification)}, {"radius", num(ss.radius)}, {"samples", rows}}
              .dump(2) + "\n");
  return kOk;
}

lci::IndicatorProfile run_indicator(const Loaded& L, const Config& c) {
  const auto idx = lci::struct_indices(L.norm.spec);
  const double rho = idx.rho_max.to_double();
  return lci::indicator_empirical(lci::lambda_solution(L.kd, 0), rho, lci::midpoint_theta_grid(c.theta_grid), c.radii,
                                  c.tol, lci::indicator_case(L.norm.spec));
}

int cmd_indicator(const Config& c) {
  const Loaded L = load(c);
  const auto p = run_indicator(L, c);
  std::ostringstream os;
  if (c.format == "json") {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < p.thetas.size(); ++i)
      for (std::size_t k = 0; k < p.radii.size(); ++k)
        rows.push_back({{"theta", num(p.thetas[i])},
                        {"r", num(p.radii[k])},
                        {"h_emp", num(p.h_emp(i, k))},
                        {"h_pred", num(p.h_pred[i])},
                        {"deviation", num(std::abs(p.h_emp(i, k) - p.h_pred[i]))}});
    os << ordered_json{{"rho", num(p.rho)}, {"rows", rows}}.dump(2) << '\n';
  } else {
    os << "theta,r,h_emp,h_pred,deviation\n";
    for (std::size_t i = 0; i < p.thetas.size(); ++i)
      for (std::size_t k = 0; k < p.radii.size(); ++k)
        os << fmt(p.thetas[i]) << ',' << fmt(p.radii[k]) << ',' << fmt(p.h_emp(i, k)) << ',' << fmt(p.h_pred[i]) << ','
           << fmt(std::abs(p.h_emp(i, k) - p.h_pred[i])) << '\n';
  }
  emit(c, os.str());
  return kOk;
}

int cmd_zeros(const Config& c) {
  const Loaded L = load(c);
  const auto h = lci::lambda_solution(L.kd, 0);
  const auto zc = lci::zero_count_sector(h, c.theta1, c.theta2, c.radius / std::abs(L.norm.scale), std::max(c.tol, 1e-8));
  emit(c, ordered_json{{"theta1", num(c.theta1)},
                       {"theta2", num(c.theta2)},
                       {"r", num(c.radius)},
                       {"count", zc.count},
                       {"raw", num(zc.raw)},
                       {"confidence", num(zc.confidence)},
                       {"reliable", zc.reliable}}
              .dump(2) + "\n");
  return zc.reliable ? kOk : kNumericError;
}

int cmd_report(const Config& c) {
  const Loaded L = load(c);
  ordered_json b;
  int successes = 0;
  b["version"] = kVersion;
  b["spec"] = spec_json(L.original);
  b["normalized_spec"] = spec_json(L.norm.spec);
  b["scale"] = cnum(L.norm.scale);
  b["tolerances"] = {{"quadrature", num(c.tol)}};
  const auto idx = lci::struct_indices(L.norm.spec);
  b["indices"] = {{"n", L.norm.spec.n}, {"q", idx.q}, {"p", idx.p}, {"rho_max", rational_text(idx.rho_max)}};
  ordered_json errors = ordered_json::object();
  auto attempt = [&](const char* key, auto&& fn) {
    try {
      b[key] = fn();
      ++successes;
    } catch (const std::exception& e) {
      b[key] = nullptr;
      errors[key] = e.what();
    }
  };
  attempt("catalog", [&] {
    ordered_json arr = ordered_json::array();
    for (const auto& e : lci::order_catalog(L.norm.spec).entries)
      arr.push_back({{"order", rational_text(e.order)}, {"status", lci::to_string(e.status)}, {"condition", e.condition}});
    return arr;
  });
  attempt("poles", [&] {
    ordered_json arr = ordered_json::array();
    for (const auto& kp : L.kd.poles) {
      const auto li = lci::integer_value(kp.pole.residue, kp.pole.exact_residue());
      arr.push_back({{"location", cnum(kp.pole.location)},
                     {"multiplicity", kp.pole.multiplicity},
                     {"lambda", cnum(kp.pole.residue)},
                     {"lambda_integer", li.has_value()}});
    }
    return ordered_json{{"list", arr},
                        {"residue_sum", cnum(L.kd.residue_sum)},
                        {"residue_sum_integer", L.kd.single_valued_outside()}};
  });
  attempt("residues", [&] { return residues_json(L.kd, c.tol); });
  attempt("subnormal", [&] {
    ordered_json arr = ordered_json::array();
    for (const auto& kp : L.kd.poles) {
      if (!lci::integer_value(kp.pole.residue, kp.pole.exact_residue())) continue;
      const auto rs = lci::residue_solution(L.kd, kp.pole.location, c.tol);
      if (rs.form != lci::ResidueForm::ExpTimesEntire) continue;
      const auto g = lci::growth_exponent(rs.handle, {10, 20, 40});
      arr.push_back({{"pole", cnum(rs.t0)},
                     {"exponent_at_r40", num(g.samples.back().exponent)},
                     {"loglog_slope", num(g.slope)}});
    }
    return arr;
  });
  attempt("symmetry", [&] {
    const auto ss = lci::symmetry_sum(L.kd);
    return ordered_json{{"classification", lci::to_string(ss.classification)}};
  });
  std::optional<lci::IndicatorProfile> prof;
  attempt("indicator", [&] {
    prof = run_indicator(L, c);
    ordered_json dev = ordered_json::array();
    for (std::size_t k = 0; k < prof->radii.size(); ++k)
      dev.push_back({{"r", num(prof->radii[k])}, {"sup_deviation", num(prof->deviation_per_radius[k])}});
    return ordered_json{{"rho", num(prof->rho)}, {"thetas", prof->thetas.size()}, {"deviation", dev}};
  });
  attempt("nevanlinna", [&] {
    if (!prof) throw lci::NumericError("indicator profile unavailable");
    const auto ne = lci::nevanlinna_estimates(*prof);
    auto enc = [](const lci::NevanlinnaCoeffs& x) {
      return ordered_json{{"T_coeff", num(x.T_coeff)}, {"m_inv_coeff", num(x.m_inv_coeff)}, {"N_coeff", num(x.N_coeff)}};
    };
    return ordered_json{{"predicted", enc(ne.predicted)}, {"empirical", enc(ne.empirical)}};
  });
  attempt("zeros", [&] {
    const auto h = lci::lambda_solution(L.kd, 0);
    const double r = c.zero_radius;
    const auto right = lci::zero_count_sector(h, -lci::kPi / 2, lci::kPi / 2, r, 1e-8);
    const auto disk = lci::zero_count_sector(h, -lci::kPi, lci::kPi, r, 1e-8);
    return ordered_json{{"r", num(r)},
                        {"right_half", {{"count", right.count}, {"reliable", right.reliable}}},
                        {"disk", {{"count", disk.count}, {"reliable", disk.reliable}}}};
  });
  b["errors"] = errors;
  emit(c, b.dump(2) + "\n");
  return successes > 0 ? kOk : kNumericError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplace contour integral solutions of linear ODEs with linear coefficients"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Config c;

  auto common = [&c](CLI::App* sub) {
    sub->add_option("--spec", c.spec_path, "ODE spec JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--tol", c.tol, "quadrature tolerance")->check(CLI::Range(1e-14, 1e-4));
    sub->add_option("--out", c.out, "output file (default stdout)");
  };
  auto* eval = app.add_subcommand("eval", "evaluate Lambda_nu and derivatives");
  common(eval);
  eval->add_option("--z", c.z, "evaluation points, e.g. 1.5 or 1-2i")->delimiter(',');
  eval->add_option("--j", c.j, "derivative orders")->delimiter(',');
  eval->add_option("--nu", c.nu, "contour index 0..n-q");
  eval->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));

  auto* verify = app.add_subcommand("verify", "ODE residual of Lambda_0 or of a closed form");
  common(verify);
  verify->add_option("--z", c.z)->delimiter(',');
  verify->add_option("--closed-form", c.closed_form, "JSON {\"poly\": [...], \"exp_factor\": c}")->check(CLI::ExistingFile);
  verify->add_option("--threshold", c.threshold, "relative residual threshold");
  verify->add_option("--points", c.points, "number of default sample points in |z| <= 3");

  auto* report = app.add_subcommand("report", "full JSON analysis bundle");
  common(report);
  report->add_option("--theta-grid", c.theta_grid)->check(CLI::Range(4, 2000));
  report->add_option("--radii", c.radii)->delimiter(',');
  report->add_option("--zero-radius", c.zero_radius);

  auto* indicator = app.add_subcommand("indicator", "empirical Phragmen-Lindelof indicator of Lambda_0");
  common(indicator);
  indicator->add_option("--theta-grid", c.theta_grid)->check(CLI::Range(4, 2000));
  indicator->add_option("--radii", c.radii)->delimiter(',');
  indicator->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));

  auto* zeros = app.add_subcommand("zeros", "zeros of Lambda_0 in a sector by the argument principle");
  common(zeros);
  zeros->add_option("--theta1", c.theta1);
  zeros->add_option("--theta2", c.theta2);
  zeros->add_option("--r", c.radius);

  auto* residues = app.add_subcommand("residues", "residue solutions at the kernel singularities");
  common(residues);
  auto* symmetry = app.add_subcommand("symmetry", "symmetry sum classification and values");
  common(symmetry);
  symmetry->add_option("--z", c.z)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }
  if (indicator->parsed() && indicator->get_option("--format")->count() == 0) c.format = "csv";
  try {
    if (eval->parsed()) return cmd_eval(c);
    if (verify->parsed()) return cmd_verify(c);
    if (report->parsed()) return cmd_report(c);
    if (indicator->parsed()) return cmd_indicator(c);
    if (zeros->parsed()) return cmd_zeros(c);
    if (residues->parsed()) return cmd_residues(c);
    if (symmetry->parsed()) return cmd_symmetry(c);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const lci::SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
  return kInputError;
}
