#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "hammerpuf/detail/hex.hpp"
#include "hammerpuf/detail/sha256.hpp"
#include "hammerpuf/errors.hpp"

namespace hpd = hammerpuf::detail;

// FIPS 180-2 test vectors.
TEST(Sha256, KnownVectors) {
  EXPECT_EQ(
      hpd::sha256_hex(""),
      "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(
      hpd::sha256_hex("abc"),
      "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(
      hpd::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
      "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Hex, RoundTrip) {
  const std::vector<std::uint8_t> bytes{0x00, 0x0f, 0xa5, 0xff};
  EXPECT_EQ(hpd::to_hex(bytes), "000fa5ff");
  EXPECT_EQ(hpd::from_hex("000fa5ff"), bytes);
  EXPECT_EQ(hpd::from_hex("000FA5FF"), bytes);
  EXPECT_TRUE(hpd::from_hex("").empty());
}

TEST(Hex, RejectsMalformedInput) {
  EXPECT_THROW(hpd::from_hex("abc"), hammerpuf::ConfigError);   // odd length
  EXPECT_THROW(hpd::from_hex("zz"), hammerpuf::ConfigError);    // bad digit
}
