#include <gtest/gtest.h>

#include <cmath>

#include "gbcm/error.hpp"
#include "gbcm/mean.hpp"

using namespace gbcm;

TEST(Mean, GeometricValues) {
  AdmissibleMean g{MeanKind::geometric};
  EXPECT_DOUBLE_EQ(g(4.0, 9.0), 6.0);
  EXPECT_DOUBLE_EQ(g(0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(g(2.0, 2.0), 2.0);
}

TEST(Mean, LogarithmicAgainstDirectFormula) {
  AdmissibleMean l{MeanKind::logarithmic};
  for (double s : {0.1, 0.5, 1.0, 3.0, 10.0})
    for (double t : {0.2, 0.7, 2.0, 5.0}) {
      if (s == t) continue;
      EXPECT_NEAR(l(s, t), (s - t) / (std::log(s) - std::log(t)), 1e-13 * (s + t));
    }
  EXPECT_DOUBLE_EQ(l(3.0, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(l(0.0, 2.0), 0.0);
  // continuity through the series branch
  double x = 1.0, y = 1.0 + 1e-5;
  EXPECT_NEAR(l(x, y), 1.0 + 0.5e-5, 1e-11);
}

TEST(Mean, SymmetricHomogeneousAndBetweenArguments) {
  for (MeanKind k : {MeanKind::geometric, MeanKind::logarithmic}) {
    AdmissibleMean m{k};
    for (double s : {0.3, 1.0, 4.0})
      for (double t : {0.1, 2.0, 7.0}) {
        EXPECT_NEAR(m(s, t), m(t, s), 1e-15 * (s + t));
        EXPECT_NEAR(m(3.0 * s, 3.0 * t), 3.0 * m(s, t), 1e-13 * (s + t));
        EXPECT_LE(m(s, t), std::max(s, t));
        EXPECT_GE(m(s, t), std::min(s, t));
        // geometric <= logarithmic <= arithmetic
        EXPECT_LE(std::sqrt(s * t), AdmissibleMean{MeanKind::logarithmic}(s, t) + 1e-14);
        EXPECT_LE(AdmissibleMean{MeanKind::logarithmic}(s, t), 0.5 * (s + t) + 1e-14);
      }
  }
}

TEST(Mean, ParseAndErrors) {
  EXPECT_EQ(AdmissibleMean::parse("geometric").kind, MeanKind::geometric);
  EXPECT_EQ(AdmissibleMean::parse("logarithmic").kind, MeanKind::logarithmic);
  EXPECT_EQ(AdmissibleMean::parse("logarithmic").name(), "logarithmic");
  EXPECT_THROW(AdmissibleMean::parse("harmonic"), DomainError);
  EXPECT_THROW(mean_eval(AdmissibleMean{}, -1.0, 1.0), DomainError);
}
