#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "common.hpp"
#include "lci/contour.hpp"

using lci::cplx;
using testing_util::fixture;
using testing_util::rel;

namespace {

lci::KernelData kernel_of(const std::string& name) { return lci::build_kernel(lci::normalize(fixture(name)).spec); }

cplx eval(const lci::KernelData& kd, const lci::Contour& c, cplx z, int j, double tol = 1e-13) {
  return lci::laplace_eval(kd, c, z, j, tol).folded();
}

}  // namespace

TEST(CanonicalContour, Airy) {
  const auto kd = kernel_of("airy");
  const auto c0 = lci::canonical_contour(kd, 0);
  EXPECT_DOUBLE_EQ(c0.alpha, lci::kPi / 3);
  EXPECT_DOUBLE_EQ(c0.beta, -lci::kPi / 3);
  EXPECT_EQ(c0.R, 0.0);
  const auto c1 = lci::canonical_contour(kd, 1);
  EXPECT_DOUBLE_EQ(c1.alpha, lci::kPi);
  EXPECT_DOUBLE_EQ(c1.beta, lci::kPi / 3);
  EXPECT_THROW(lci::canonical_contour(kd, 3), std::invalid_argument);
}

TEST(CanonicalContour, TransformedFourthOrder) {
  const auto kd = kernel_of("ex7_3");
  const auto c = lci::canonical_contour(kd, 0);
  EXPECT_DOUBLE_EQ(c.alpha, lci::kPi / 2);
  EXPECT_DOUBLE_EQ(c.beta, -lci::kPi / 2);
  EXPECT_DOUBLE_EQ(c.R, 1.0);
}

TEST(ValidateContour, RejectsBoundaryAndGrowthAngles) {
  const auto kd = kernel_of("airy");
  lci::Contour c{0.0, lci::kPi / 6, -lci::kPi / 3, 0.0};
  EXPECT_THROW(lci::validate_contour(kd, c), lci::ContourError);
  c.alpha = 0.0;
  EXPECT_THROW(lci::validate_contour(kd, c), lci::ContourError);
  c.alpha = 0.4 * lci::kPi;
  EXPECT_NO_THROW(lci::validate_contour(kd, c));
}

TEST(ValidateContour, RejectsSmallRadiusAroundPoles) {
  const auto kd = kernel_of("ex7_1");
  lci::Contour c = lci::canonical_contour(kd, 0);
  c.R = 0.5;
  EXPECT_ANY_THROW(lci::laplace_eval(kd, c, 0.0, 0, 1e-10));
}

TEST(TruncationBound, AiryTailAndMonotonicity) {
  const auto kd = kernel_of("airy");
  const auto c = lci::canonical_contour(kd, 0);
  const double T16 = lci::truncation_bound(kd, c, 0.0, 1e-16);
  // On the rays Re R0 = -r^3/3; the tail beyond T is below e^{-T^3/3}/T^2.
  EXPECT_LE(std::exp(-T16 * T16 * T16 / 3) / (T16 * T16), 1e-16);
  EXPECT_GT(T16, 4.0);
  EXPECT_LT(T16, 7.0);
  EXPECT_LE(lci::truncation_bound(kd, c, 0.0, 1e-8), T16);
  // Along the negative axis e^{-zt} grows on both rays, so the tail moves out with |z|.
  double prev = 0.0;
  for (double r : {0.0, 1.0, 4.0, 10.0, 30.0}) {
    const double T = lci::truncation_bound(kd, c, cplx(-r, 0.0), 1e-12);
    EXPECT_GE(T, prev) << r;
    prev = T;
  }
}

TEST(LaplaceEval, AiryAtOrigin) {
  const auto kd = kernel_of("airy");
  const auto c = lci::canonical_contour(kd, 0);
  // The contour runs from infinity e^{i pi/3} to infinity e^{-i pi/3}, giving -Ai.
  EXPECT_LT(rel(eval(kd, c, 0.0, 0), cplx(-0.35502805388781723926)), 1e-10);
  EXPECT_LT(rel(eval(kd, c, 0.0, 1), cplx(0.25881940379280679840)), 1e-10);
}

TEST(LaplaceEval, LeadingGrowthOnPositiveAxis) {
  const auto kd = kernel_of("airy");
  const double rho = 1.5;
  double prev_gap = 1e300;
  for (double x : {10.0, 40.0, 160.0}) {
    const auto c = lci::select_contour(kd, 0, x);
    const auto r = lci::laplace_eval(kd, c, x, 0, 1e-12);
    const double ratio = r.log_abs() * rho / std::pow(x, rho);
    EXPECT_LT(ratio, -0.9) << x;
    const double gap = std::abs(ratio + 1.0);
    EXPECT_LT(gap, prev_gap) << x;
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.01);
}

TEST(LaplaceEval, ContourIndependence) {
  const auto kd = kernel_of("airy");
  const lci::Contour a{0.0, lci::kPi / 3, -lci::kPi / 3, 0.0};
  const lci::Contour b{2.0, 0.4 * lci::kPi, -0.4 * lci::kPi, 0.0};
  for (cplx z : {cplx(0.0), cplx(2.0), cplx(0.0, 2.0), cplx(-3.0)})
    EXPECT_LT(rel(eval(kd, a, z, 0), eval(kd, b, z, 0)), 1e-9) << z;
}

TEST(LaplaceEval, DerivativeConsistency) {
  const auto kd = kernel_of("ex7_2");
  const auto c = lci::canonical_contour(kd, 0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const cplx z = std::polar(3.0 * std::abs(u(rng)), lci::kPi * u(rng));
    const double h = 1e-5;
    const auto p = lci::laplace_eval(kd, c, z + h, 0, 1e-14), m = lci::laplace_eval(kd, c, z - h, 0, 1e-14);
    const double s = std::max(p.log_scale, m.log_scale);
    const cplx fd = (p.rescaled(s).value - m.rescaled(s).value) / (2 * h) * std::exp(s);
    EXPECT_LT(rel(fd, eval(kd, c, z, 1)), 1e-5) << z;
  }
}

TEST(LaplaceEval, OdeResidualOnFixtures) {
  for (const char* name : {"airy", "ex7_1", "ex7_2", "ex7_3", "ex7_4", "ex7_5", "ex7_6"}) {
    const auto s = lci::normalize(fixture(name)).spec;
    const auto kd = lci::build_kernel(s);
    const double golden = lci::kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < 20; ++k) {
      const cplx z = std::polar(3.0 * std::sqrt((k + 0.5) / 20), k * golden);
      const auto c = lci::select_contour(kd, 0, z);
      std::vector<lci::QuadResult> w;
      for (int j = 0; j <= s.n; ++j) w.push_back(lci::laplace_eval(kd, c, z, j, 1e-13));
      double scale = -1e300;
      for (const auto& r : w) scale = std::max(scale, r.log_scale);
      cplx res = w[static_cast<std::size_t>(s.n)].rescaled(scale).value;
      double mag = std::abs(res);
      for (int j = 0; j < s.n; ++j) {
        const cplx term = (s.a[static_cast<std::size_t>(j)] + s.b[static_cast<std::size_t>(j)] * z) *
                          w[static_cast<std::size_t>(j)].rescaled(scale).value;
        res += term;
        mag += std::abs(term);
      }
      EXPECT_LE(std::abs(res) / mag, 1e-8) << name << " z=" << z;
    }
  }
}

TEST(LaplaceEval, NodeBudgetExhaustionIsFlagged) {
  const auto kd = kernel_of("ex7_2");
  lci::QuadOptions opt;
  opt.node_budget = 60;
  const auto r = lci::laplace_eval(kd, lci::canonical_contour(kd, 0), cplx(2.0, 1.0), 0, 1e-14, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.nodes_used, 200);
}

TEST(LaplaceEval, NegativeDerivativeOrderThrows) {
  const auto kd = kernel_of("airy");
  EXPECT_THROW(lci::laplace_eval(kd, lci::canonical_contour(kd, 0), 0.0, -1, 1e-10), std::invalid_argument);
}

TEST(LaplaceEval, ConcurrentCallsMatchSerial) {
  const auto kd = kernel_of("ex7_6");
  const auto c = lci::canonical_contour(kd, 1);
  std::vector<cplx> zs;
  for (int k = 0; k < 16; ++k) zs.push_back(std::polar(0.2 * k, 0.7 * k));
  std::vector<cplx> serial(zs.size()), parallel(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) serial[i] = eval(kd, c, zs[i], 1);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < zs.size(); ++i) pool.emplace_back([&, i] { parallel[i] = eval(kd, c, zs[i], 1); });
  for (auto& t : pool) t.join();
  EXPECT_EQ(serial, parallel);
}
