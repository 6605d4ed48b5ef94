#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "weinstock/domain.hpp"
#include "weinstock/gfun.hpp"
#include "weinstock/steklov.hpp"

using namespace weinstock;

namespace {

SteklovOptions coarse() {
  SteklovOptions o;
  o.elements = 24;
  return o;
}

double sigma_star(const RadialProfile& p) {
  const auto geo = geometry(p);
  return sigma1_exact_ball(p.dim(), geo.area_radius);
}

ShapeSpec wobble(double r0, double eps) {
  return ShapeSpec::perturbed(r0, {0, 0, eps, -0.5 * eps, 0.4 * eps});
}

}  // namespace

TEST(Steklov, SectorMultiplicity) {
  EXPECT_EQ(sector_multiplicity(Dimension(3), 0), 1);
  EXPECT_EQ(sector_multiplicity(Dimension(3), 1), 2);
  EXPECT_EQ(sector_multiplicity(Dimension(3), 4), 2);
  EXPECT_EQ(sector_multiplicity(Dimension(4), 1), 3);
  EXPECT_EQ(sector_multiplicity(Dimension(4), 2), 5);
  EXPECT_EQ(sector_multiplicity(Dimension(5), 1), 4);
  EXPECT_EQ(sector_multiplicity(Dimension(5), 2), 9);
}

TEST(Steklov, FourDimensionalUnitBall) {
  const Dimension d(4);
  EXPECT_NEAR(sigma1_exact_ball(d, 1.0), 0.72049006156787049, 1e-13);
  const auto s = solve(make_profile(d, ShapeSpec::sphere(1.0)), {0, 1});
  EXPECT_NEAR(s.sigma1() / 0.72049006156787049, 1.0, 1e-3);
  EXPECT_NEAR(s.sigma1() / 0.72049006156787049, 1.0, 1e-10);
}

TEST(Steklov, BallFirstEigenspaceHasDimensionN) {
  for (int n : {3, 4, 5}) {
    const Dimension d(n);
    for (double r : {0.5, 2.0}) {
      const auto s = solve(make_profile(d, ShapeSpec::sphere(r)), {0, 1, 2}, coarse());
      const double exact = sigma1_exact_ball(d, r);
      const auto first = s.expanded(n + 1);
      for (int i = 0; i < n; ++i) EXPECT_NEAR(first[i] / exact, 1.0, 1e-8) << n << " " << r;
      EXPECT_GT(first[n] / exact, 1.05);
      EXPECT_NEAR(harmonic_mean_lhs(s), (n - 1) / exact, 1e-8 * n / exact);
    }
  }
}

TEST(Steklov, BallConvergence) {
  const Dimension d(5);
  const auto p = make_profile(d, ShapeSpec::sphere(2.0));
  const double exact = sigma1_exact_ball(d, 2.0);
  double previous = 1.0;
  for (int e : {8, 12, 16, 24}) {
    SteklovOptions o;
    o.elements = e;
    const double err = std::abs(solve(p, {0}, o).sector(0).eigenvalues[0] / exact - 1.0);
    EXPECT_LT(err, previous) << e;
    previous = err;
  }
  EXPECT_LT(previous, 1e-10);
}

TEST(Steklov, EigenvectorNormalisation) {
  const auto p = make_profile(Dimension(4), wobble(1.0, 0.12));
  const auto s = solve(p, {0, 1, 2}, coarse());
  for (const auto& sec : s.sectors) {
    const Eigen::MatrixXd gram = sec.traces.transpose() * sec.mass * sec.traces;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(),
              1e-8);
    for (double v : sec.eigenvalues) EXPECT_GT(v, 0.0);
    for (std::size_t i = 1; i < sec.eigenvalues.size(); ++i) {
      EXPECT_GE(sec.eigenvalues[i], sec.eigenvalues[i - 1]);
    }
  }
  const auto& zero = s.sector(0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(zero.mass.rows());
  const Eigen::VectorXd mean = zero.traces.transpose() * zero.mass * ones;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Steklov, PerturbedSphereBounds) {
  for (int n : {4, 5}) {
    const Dimension d(n);
    const GFunction g(d);
    const auto p = make_profile(d, wobble(0.8, 0.14));
    const auto s = solve(p, {0, 1, 2}, coarse());
    const double star = sigma_star(p);
    EXPECT_LT(s.sigma1(), star);
    const auto c = recenter(p, [&](double t) { return g(t) / t; });
    const double bound = test_function_bound(c.profile);
    EXPECT_LE(s.sigma1(), bound + 1e-6);
    EXPECT_LE(bound, star);
    EXPECT_GE(harmonic_mean_lhs(s), (n - 1) / star);
    // sectors beyond l = 1 do not carry sigma_1
    EXPECT_GT(s.sector(2).eigenvalues[0], s.sigma1());
  }
}

TEST(Steklov, BallTestFunctionBoundIsExact) {
  for (int n : {3, 4, 6}) {
    const Dimension d(n);
    for (double r : {0.4, 1.5}) {
      EXPECT_NEAR(test_function_bound(make_profile(d, ShapeSpec::sphere(r))) /
                      sigma1_exact_ball(d, r),
                  1.0, 1e-10);
    }
  }
}

TEST(Steklov, HarmonicMeanApproachesBall) {
  const Dimension d(4);
  const double ball = harmonic_mean_lhs(solve(make_profile(d, ShapeSpec::sphere(1.0)), {0, 1}, coarse()));
  double previous = 1e300;
  for (double eps : {0.12, 0.06, 0.03, 0.015}) {
    const double lhs = harmonic_mean_lhs(solve(make_profile(d, wobble(1.0, eps)), {0, 1}, coarse()));
    const double gap = std::abs(lhs - ball);
    EXPECT_LT(gap, previous) << eps;
    previous = gap;
  }
}

TEST(Steklov, RejectsUnsupported) {
  EXPECT_THROW(solve(make_profile(Dimension(2), ShapeSpec::sphere(1.0)), {0}), DomainError);
  const auto s = solve(make_profile(Dimension(4), ShapeSpec::sphere(1.0)), {0}, coarse());
  EXPECT_THROW(s.expanded(100), DomainError);
  EXPECT_THROW(s.sector(3), DomainError);
}

TEST(Steklov, SpectrumCsv) {
  SteklovOptions o = coarse();
  o.count = 2;
  const auto s = solve(make_profile(Dimension(4), ShapeSpec::sphere(1.0)), {0, 1}, o);
  std::ostringstream os;
  write_spectrum_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "sector,index,eigenvalue,multiplicity");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_NE(os.str().find("\n1,0,"), std::string::npos);
}
