#include <gtest/gtest.h>

#include "nullnet/polylog.hpp"
#include "oracles.hpp"

using namespace nullnet;

TEST(Polylog, ClosedFormsForIntegerOrders) {
  for (int t = 1; t <= 9; ++t) {
    const double z = 0.1 * t;
    EXPECT_NEAR(polylog_negative_order(0.0, z), z / (1.0 - z), 1e-12);
    EXPECT_NEAR(polylog_negative_order(1.0, z), z / ((1.0 - z) * (1.0 - z)), 1e-12);
    EXPECT_NEAR(polylog_negative_order(2.0, z), z * (1.0 + z) / std::pow(1.0 - z, 3), 1e-12 * std::pow(1.0 - z, -3));
  }
}

TEST(Polylog, ClosedFormsCloseToOne) {
  for (double z : {0.95, 0.99, 0.999, 0.9999}) {
    const double li0 = z / (1.0 - z);
    const double li1 = z / ((1.0 - z) * (1.0 - z));
    EXPECT_NEAR(polylog_negative_order(0.0, z), li0, 1e-12 * li0);
    EXPECT_NEAR(polylog_negative_order(1.0, z), li1, 1e-12 * li1);
  }
}

TEST(Polylog, CubeRootOrderAgainstLongSummation) {
  EXPECT_NEAR(polylog_negative_order(1.0 / 3.0, 0.5), oracle::polylog_sum(1.0 / 3.0, 0.5), 1e-10);
  EXPECT_NEAR(0.5 * polylog_negative_order(1.0 / 3.0, 0.5), 0.603729919604102644, 1e-13);
}

TEST(Polylog, HighPrecisionReferenceValues) {
  // Reference values computed with 30-digit arithmetic.
  const std::pair<double, double> refs[] = {{0.5, 1.20745983920820528889665423021},
                                            {0.9, 17.6716749206340342},
                                            {0.95, 46.5802345657534948},
                                            {0.99, 411.441888166913795},
                                            {0.999999, 89297891.3441857524}};
  for (auto [z, ref] : refs) EXPECT_NEAR(polylog_negative_order(1.0 / 3.0, z), ref, 1e-13 * ref) << z;
}

TEST(Polylog, BothRoutesAgreeAcrossTheSwitch) {
  for (double gamma : {0.0, 1.0 / 3.0, 0.5, 1.0, 2.5}) {
    for (double z : {0.5, 0.8, 0.89, 0.9, 0.91, 0.95}) {
      const double a = polylog_detail::series(gamma, z);
      const double b = polylog_detail::near_one(gamma, z);
      EXPECT_NEAR(a, b, 1e-12 * std::abs(a)) << gamma << " " << z;
    }
  }
}

TEST(Polylog, MonotoneInZ) {
  double prev = 0.0;
  for (int t = 1; t < 2000; ++t) {
    const double z = t / 2000.0;
    const double v = polylog_negative_order(1.0 / 3.0, z);
    EXPECT_GT(v, prev) << z;
    prev = v;
  }
}

TEST(Polylog, ZeroArgumentAndDomain) {
  EXPECT_EQ(polylog_negative_order(1.0 / 3.0, 0.0), 0.0);
  EXPECT_THROW(polylog_negative_order(1.0, 1.0), DomainError);
  EXPECT_THROW(polylog_negative_order(1.0, -0.1), DomainError);
  EXPECT_THROW(polylog_negative_order(-1.0, 0.5), DomainError);
  EXPECT_THROW(polylog_negative_order(std::nan(""), 0.5), DomainError);
}

TEST(Polylog, MatchesOracleOnGrid) {
  for (double gamma : {0.25, 1.0 / 3.0, 0.75, 1.5})
    for (int t = 1; t <= 8; ++t) {
      const double z = 0.1 * t;
      const double ref = oracle::polylog_sum(gamma, z);
      EXPECT_NEAR(polylog_negative_order(gamma, z), ref, 1e-13 * ref);
    }
}
