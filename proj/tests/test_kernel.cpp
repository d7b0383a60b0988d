#include <gtest/gtest.h>

#include "common.hpp"
#include "lci/kernel.hpp"
#include "properties.hpp"

using lci::cplx;
using testing_util::fixture;

namespace {

lci::KernelData kernel_of(const std::string& name) { return lci::build_kernel(lci::normalize(fixture(name)).spec); }

cplx phi_at(const lci::KernelData& kd, cplx t) {
  return std::exp(lci::log_kernel_with_args(kd, t, lci::branch_args_near(kd, t, 0.0)));
}

}  // namespace

TEST(BuildKernel, AiryIsPureExponential) {
  const auto kd = kernel_of("airy");
  EXPECT_FALSE(kd.has_poles());
  ASSERT_TRUE(kd.exact_R0.has_value());
  EXPECT_EQ(kd.exact_R0->degree(), 3);
  EXPECT_EQ((*kd.exact_R0)[3], lci::GaussRational(lci::Rational(1, 3)));
  EXPECT_TRUE((*kd.exact_R0)[0].is_zero());
  EXPECT_TRUE(kd.single_valued_outside());
}

TEST(BuildKernel, SixthOrderMatchesClosedForm) {
  const auto kd = kernel_of("ex7_2");
  EXPECT_EQ(kd.poles.size(), 3u);
  for (cplx t : {cplx(1.3, 0.4), cplx(-0.7, 1.9), cplx(2.5, -0.3)}) {
    const cplx ref = std::exp(t * t * t / 3.0 - t - 1.0 / t) / (std::pow(t, 4) + t * t);
    EXPECT_LT(testing_util::rel(phi_at(kd, t), ref), 1e-12) << t;
  }
}

TEST(BuildKernel, TransformedFourthOrderMatchesClosedForm) {
  const auto kd = kernel_of("ex7_3");
  ASSERT_EQ(kd.poles.size(), 1u);
  ASSERT_TRUE(kd.poles[0].exact_exponent.has_value());
  EXPECT_EQ(*kd.poles[0].exact_exponent, lci::GaussRational(-3));
  for (cplx t : {cplx(1.1, 0.2), cplx(-0.5, -1.4)}) {
    const cplx ref = std::exp(t * t / 2.0 + 1.0 / (2.0 * t * t)) / std::pow(t, 3);
    EXPECT_LT(testing_util::rel(phi_at(kd, t), ref), 1e-12) << t;
  }
}

TEST(BuildKernel, ExponentsOfFifthOrder) {
  const auto kd = kernel_of("ex7_1");
  ASSERT_TRUE(kd.exact());
  // R0 = t^3/3 + t from the outer part -t^2 - 1 of Q0/Q1.
  EXPECT_EQ((*kd.exact_R0)[3], lci::GaussRational(lci::Rational(1, 3)));
  EXPECT_EQ((*kd.exact_R0)[1], lci::GaussRational(1));
  for (const auto& kp : kd.poles) {
    const double loc = kp.pole.location.real();
    const int expected = loc > 0.5 ? -3 : loc < -0.5 ? -4 : -3;
    EXPECT_EQ(*kp.exact_exponent, lci::GaussRational(expected)) << loc;
  }
  EXPECT_EQ(kd.exact_residue_sum, lci::GaussRational(7));
  EXPECT_DOUBLE_EQ(kd.singular_radius, 1.0);
}

TEST(BuildKernel, RejectsUnnormalizedSpec) {
  const auto s = lci::make_spec(2, {0, -1}, {1, 0});
  EXPECT_THROW(lci::build_kernel(s), lci::SpecError);
  EXPECT_NO_THROW(lci::build_kernel(lci::normalize(s).spec));
}

TEST(LogKernel, AiryRealValue) {
  const auto kd = kernel_of("airy");
  const auto path = lci::circle_path(2.0, 0.0);
  const auto v = lci::log_kernel(kd, path, 0.0);
  EXPECT_NEAR(std::abs(v.value - cplx(8.0 / 3.0)), 0.0, 1e-14);
}

TEST(LogKernel, FullCircleWinding) {
  for (const char* name : {"ex7_1", "ex7_2", "ex7_5", "ex7_6"}) {
    const auto kd = kernel_of(name);
    const auto path = lci::circle_path(kd.singular_radius + 1.0, 0.1);
    const lci::BranchState st(kd, path);
    cplx expected = 0.0;
    for (const auto& kp : kd.poles) expected += cplx(0.0, 2 * lci::kPi) * kp.exponent;
    const cplx gain = st.log_kernel(4.0) - st.log_kernel(0.0);
    EXPECT_NEAR(std::abs(gain - expected), 0.0, 1e-10) << name;
    for (double w : st.total_winding()) EXPECT_NEAR(w, 2 * lci::kPi, 1e-12) << name;
  }
}

TEST(LogKernel, SingleValuedOutsideForIntegerResidueSum) {
  const auto kd = kernel_of("ex7_6");
  EXPECT_TRUE(kd.single_valued_outside());
  const auto path = lci::circle_path(2.0, 0.3);
  const lci::BranchState st(kd, path);
  EXPECT_LT(testing_util::rel(std::exp(st.log_kernel(4.0)), std::exp(st.log_kernel(0.0))), 1e-10);
}

TEST(LogKernel, HomotopicPathsAgree) {
  const auto kd = kernel_of("ex7_6");
  const double r = kd.singular_radius + 1.5;
  const cplx a = r, b = cplx(0.0, r);
  lci::Path line, arc;
  line.segments = {lci::Segment::line(a, b)};
  arc.segments = {lci::Segment::arc(r, 0.0, lci::kPi / 2)};
  const auto v1 = lci::log_kernel(kd, line, 1.0), v2 = lci::log_kernel(kd, arc, 1.0);
  EXPECT_LT(testing_util::rel(std::exp(v1.value), std::exp(v2.value)), 1e-9);
  EXPECT_NEAR(std::abs(v1.value - v2.value), 0.0, 1e-9);
}

TEST(LogKernel, PathTooCloseToPoleThrows) {
  const auto kd = kernel_of("ex7_1");
  lci::Path p;
  p.segments = {lci::Segment::line(cplx(-0.5, 0.0), cplx(0.5, 0.0))};
  EXPECT_THROW(lci::log_kernel(kd, p, 0.5), lci::BranchError);
}

TEST(LogKernel, DerivativeProperty) {
  const auto out = props::kernel_log_derivative(100);
  EXPECT_TRUE(out.ok()) << out.passed << "/" << out.total << ": " << out.first_failure;
}

TEST(LogKernel, LowerOrderPartGrowth) {
  for (const char* name : {"airy", "ex7_1", "ex7_2", "ex7_3", "ex7_5", "ex7_6"}) {
    const auto kd = kernel_of(name);
    const int k = kd.valley_degree();
    auto psi_max = [&](double r) {
      double m = 0.0;
      for (int i = 0; i < 16; ++i) {
        const cplx t = std::polar(r, -lci::kPi + (i + 0.5) * 2 * lci::kPi / 16);
        const cplx lead = std::pow(t, k) / static_cast<double>(k);
        m = std::max(m, std::abs(lci::log_kernel_with_args(kd, t, lci::branch_args_near(kd, t, std::arg(t))) - lead));
      }
      return m;
    };
    const double p10 = psi_max(10.0), p100 = psi_max(100.0);
    // Identically zero up to rounding of the leading term.
    if (p100 <= 1e-13 * std::pow(100.0, k)) continue;
    EXPECT_LE(std::log(p100 / p10) / std::log(10.0), (k - 1) + 0.1) << name;
  }
}
