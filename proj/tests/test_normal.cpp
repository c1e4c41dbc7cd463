#include <gtest/gtest.h>

#include <cmath>

#include "hammerpuf/detail/normal.hpp"
#include "hammerpuf/errors.hpp"

using hammerpuf::detail::inverse_normal_cdf;
using hammerpuf::detail::normal_cdf;

// Reference values from standard normal tables (15+ significant digits).
TEST(NormalCdf, KnownValues) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(normal_cdf(-1.0), 0.15865525393145707, 1e-15);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-15);
  EXPECT_NEAR(normal_cdf(3.0), 0.9986501019683699, 1e-15);
}

TEST(InverseNormalCdf, KnownQuantiles) {
  EXPECT_DOUBLE_EQ(inverse_normal_cdf(0.5), 0.0);
  EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(inverse_normal_cdf(0.025), -1.9599639845400545, 1e-12);
  EXPECT_NEAR(inverse_normal_cdf(0.9), 1.2815515655446004, 1e-12);
  EXPECT_NEAR(inverse_normal_cdf(1e-12), -7.034483825301131, 1e-9);
}

TEST(InverseNormalCdf, RoundTripAgainstCdf) {
  // The p -> z map steepens as 1/phi(z), so a fixed cdf rounding error
  // grows into ~1e-8 of z by |z| = 6.
  for (double z = -6.0; z <= 6.0; z += 0.125) {
    const double tol = std::abs(z) <= 5.25 ? 1e-9 : 2e-8;
    EXPECT_NEAR(inverse_normal_cdf(normal_cdf(z)), z, tol) << "z=" << z;
  }
}

TEST(InverseNormalCdf, SymmetricAndMonotone) {
  double prev = -1e300;
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const double z = inverse_normal_cdf(p);
    EXPECT_GT(z, prev);
    EXPECT_NEAR(z, -inverse_normal_cdf(1.0 - p), 1e-12);
    prev = z;
  }
}
