#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "common.hpp"
#include "lci/ratfun.hpp"
#include "properties.hpp"

using lci::cplx;
using lci::CPoly;
using testing_util::fixture;

namespace {

// Multiplicity of the cluster nearest to c, or 0 when none is within 1e-8.
int multiplicity_at(const std::vector<lci::RootCluster>& cl, cplx c) {
  for (const auto& r : cl)
    if (std::abs(r.center - c) < 1e-8) return r.multiplicity;
  return 0;
}

const lci::PoleData& pole_at(const lci::PartialFractions& pf, cplx c) {
  auto it = std::find_if(pf.poles.begin(), pf.poles.end(),
                         [&](const lci::PoleData& p) { return std::abs(p.location - c) < 1e-8; });
  if (it == pf.poles.end()) throw std::runtime_error("no pole near requested point");
  return *it;
}

}  // namespace

TEST(PolyRoots, CubicDistinct) {
  const auto cl = lci::poly_roots(CPoly{0, -1, 0, 1});
  ASSERT_EQ(cl.size(), 3u);
  EXPECT_EQ(multiplicity_at(cl, 0.0), 1);
  EXPECT_EQ(multiplicity_at(cl, 1.0), 1);
  EXPECT_EQ(multiplicity_at(cl, -1.0), 1);
}

TEST(PolyRoots, DoubleRootAtZero) {
  const auto cl = lci::poly_roots(CPoly{0, 0, -1, 0, -1});
  ASSERT_EQ(cl.size(), 3u);
  EXPECT_EQ(multiplicity_at(cl, 0.0), 2);
  EXPECT_EQ(multiplicity_at(cl, cplx(0, 1)), 1);
  EXPECT_EQ(multiplicity_at(cl, cplx(0, -1)), 1);
}

TEST(PolyRoots, TripleRoot) {
  const auto cl = lci::poly_roots(CPoly{-8, 12, -6, 1});
  ASSERT_EQ(cl.size(), 1u);
  EXPECT_EQ(cl[0].multiplicity, 3);
  EXPECT_NEAR(std::abs(cl[0].center - cplx(2.0)), 0.0, 1e-10);
}

TEST(PolyRoots, MultiplicitiesSumToDegree) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(-4, 4);
  for (int inst = 0; inst < 30; ++inst) {
    CPoly p{1.0};
    for (int k = 0; k < 2 + inst % 5; ++k) p = p * CPoly{cplx(d(rng), d(rng)), 1.0};
    const auto cl = lci::poly_roots(p);
    int total = 0;
    for (const auto& r : cl) {
      total += r.multiplicity;
      EXPECT_LE(std::abs(p(r.center)), 1e-6 * std::max(1.0, std::pow(std::abs(r.center), p.degree())) *
                                           lci::detail::coeff_max(p));
    }
    EXPECT_EQ(total, p.degree());
  }
}

TEST(PolyRoots, ExactPathConfirmsRationalRoots) {
  const auto Q = lci::build_Q(fixture("ex7_1"));
  ASSERT_TRUE(Q.Q1x.has_value());
  const auto cl = lci::poly_roots_exact(*Q.Q1x);
  ASSERT_EQ(cl.size(), 3u);
  for (const auto& r : cl) EXPECT_TRUE(r.exact_center.has_value());
}

TEST(PartialFractions, AiryHasNoPoles) {
  const auto Q = lci::build_Q(fixture("airy"));
  const auto pf = lci::partial_fractions(Q.Q0, Q.Q1);
  EXPECT_TRUE(pf.poles.empty());
  ASSERT_EQ(pf.outer.degree(), 2);
  EXPECT_EQ(pf.outer[2], cplx(-1.0));
}

TEST(PartialFractions, TriplePoleWithZeroResidue) {
  const auto Q = lci::build_Q(fixture("ex7_3"));
  const auto pf = lci::partial_fractions(Q.Q0, Q.Q1, Q.Q0x, Q.Q1x);
  ASSERT_EQ(pf.outer.degree(), 1);
  EXPECT_EQ(pf.outer[1], cplx(-1.0));
  EXPECT_EQ(pf.outer[0], cplx(0.0));
  ASSERT_EQ(pf.poles.size(), 1u);
  const auto& p = pf.poles[0];
  EXPECT_EQ(p.multiplicity, 3);
  ASSERT_TRUE(p.exact_laurent.has_value());
  EXPECT_TRUE((*p.exact_laurent)[0].is_zero());
  EXPECT_TRUE((*p.exact_laurent)[1].is_zero());
  EXPECT_EQ((*p.exact_laurent)[2], lci::GaussRational(1));
}

TEST(PartialFractions, FifthOrderResidues) {
  const auto Q = lci::build_Q(fixture("ex7_1"));
  const auto pf = lci::partial_fractions(Q.Q0, Q.Q1, Q.Q0x, Q.Q1x);
  ASSERT_TRUE(pf.exact());
  EXPECT_EQ(pole_at(pf, 0.0).exact_residue(), lci::GaussRational(2));
  EXPECT_EQ(pole_at(pf, 1.0).exact_residue(), lci::GaussRational(2));
  EXPECT_EQ(pole_at(pf, -1.0).exact_residue(), lci::GaussRational(3));
}

TEST(PartialFractions, ReexpansionProperty) {
  const auto out = props::partial_fraction_reexpansion(100);
  EXPECT_TRUE(out.ok()) << out.passed << "/" << out.total << ": " << out.first_failure;
}

TEST(PartialFractions, ZeroDenominatorThrows) { EXPECT_THROW(lci::partial_fractions(CPoly{1.0}, CPoly{}), std::domain_error); }

TEST(ResidueAt, Examples) {
  const auto Q = lci::build_Q(fixture("ex7_1"));
  EXPECT_NEAR(std::abs(lci::residue_at(Q.Q0, Q.Q1, 1.0) - cplx(2.0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(lci::residue_at(Q.Q0, Q.Q1, -1.0) - cplx(3.0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(lci::residue_at(CPoly{1.0}, CPoly{0.0, 1.0}, 0.0) - cplx(1.0)), 0.0, 1e-14);
}

TEST(ResidueAt, NonPoleIsRejected) {
  const auto Q = lci::build_Q(fixture("ex7_1"));
  EXPECT_ANY_THROW(lci::residue_at(Q.Q0, Q.Q1, 0.5));
}

TEST(ResidueAt, AgreesWithCircleTrapezoid) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<cplx> roots;
    CPoly Q1{1.0};
    for (int k = 0; k < 3; ++k) {
      cplx r(d(rng), d(rng));
      while (std::any_of(roots.begin(), roots.end(), [&](cplx x) { return x == r; })) r += cplx(0.5, 0.25);
      roots.push_back(r);
      for (int e = 0; e <= k % 2; ++e) Q1 = Q1 * CPoly{-r, 1.0};
    }
    const CPoly Q0{cplx(d(rng), 1.0), cplx(d(rng), 0.0), 2.0, 1.0, 0.5};
    for (std::size_t i = 0; i < roots.size(); ++i) {
      double dist = 1e300;
      for (std::size_t k = 0; k < roots.size(); ++k)
        if (k != i) dist = std::min(dist, std::abs(roots[k] - roots[i]));
      const double rad = dist / 2;
      cplx sum = 0.0;
      const int N = 256;
      for (int k = 0; k < N; ++k) {
        const cplx u = std::polar(1.0, 2 * lci::kPi * k / N);
        const cplx t = roots[i] + rad * u;
        sum += Q0(t) / Q1(t) * rad * u;
      }
      sum /= static_cast<double>(N);
      EXPECT_NEAR(std::abs(lci::residue_at(Q0, Q1, roots[i]) - sum), 0.0, 1e-9 * std::max(1.0, std::abs(sum)));
    }
  }
}

TEST(IntegerValue, ToleranceAndExactConfirmation) {
  EXPECT_EQ(lci::integer_value(cplx(3.0 + 1e-10)), 3);
  EXPECT_FALSE(lci::integer_value(cplx(3.0 + 1e-6)).has_value());
  EXPECT_FALSE(lci::integer_value(cplx(3.0, 0.5)).has_value());
  EXPECT_FALSE(lci::integer_value(cplx(3.0), lci::GaussRational(lci::Rational(7, 2))).has_value());
}
