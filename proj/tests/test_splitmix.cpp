#include <gtest/gtest.h>

#include <set>

#include "hammerpuf/detail/splitmix.hpp"

namespace hp = hammerpuf;
using hp::detail::cell_hash;
using hp::detail::combine;
using hp::detail::mix64;
using hp::detail::to_unit_open;

// Published splitmix64 reference outputs: with the standard algorithm, the
// first value of the stream seeded with s equals finalize(s + gamma), which
// is exactly mix64(s).
TEST(Splitmix, KnownVectors) {
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(mix64(1), 0x910a2dec89025cc1ULL);
  EXPECT_EQ(mix64(0xdeadbeefULL), 0x4adfb90f68c9eb9bULL);
}

TEST(Splitmix, CombineDependsOnOrder) {
  EXPECT_NE(combine(combine(mix64(1), 2), 3), combine(combine(mix64(1), 3), 2));
  EXPECT_EQ(combine(mix64(7), 9), combine(mix64(7), 9));
}

TEST(CellHash, DistinctAcrossCoordinatesAndParams) {
  std::set<std::uint64_t> seen;
  for (std::uint32_t bank = 0; bank < 2; ++bank) {
    for (std::uint32_t row = 0; row < 4; ++row) {
      for (std::uint64_t col = 0; col < 4; ++col) {
        for (std::uint32_t pid = 1; pid <= 4; ++pid) {
          seen.insert(cell_hash(42, bank, row, col, pid));
        }
      }
    }
  }
  EXPECT_EQ(seen.size(), 2u * 4 * 4 * 4);
}

TEST(CellHash, Deterministic) {
  EXPECT_EQ(cell_hash(1, 0, 5, 1000, 2), cell_hash(1, 0, 5, 1000, 2));
  EXPECT_NE(cell_hash(1, 0, 5, 1000, 2), cell_hash(2, 0, 5, 1000, 2));
}

TEST(ToUnitOpen, StrictlyInsideUnitInterval) {
  EXPECT_GT(to_unit_open(0), 0.0);
  EXPECT_LT(to_unit_open(0), 1e-15);
  EXPECT_LT(to_unit_open(~0ULL), 1.0);
  EXPECT_GT(to_unit_open(~0ULL), 1.0 - 1e-15);
  // Midpoint offset: value is (q + 0.5) / 2^53 for the top 53 bits q.
  EXPECT_DOUBLE_EQ(to_unit_open(1ULL << 63), 0.5 + 0x1.0p-54);
}
