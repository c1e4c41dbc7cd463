#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hammerpuf/detail/hex.hpp"

namespace hammerpuf::detail {

using Sha256Digest = std::array<std::uint8_t, 32>;

inline Sha256Digest sha256(const void* data, std::size_t len) {
  Sha256Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != out.size()) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return out;
}

inline Sha256Digest sha256(const std::string& s) {
  return sha256(s.data(), s.size());
}

inline Sha256Digest sha256(const std::vector<std::uint8_t>& v) {
  return sha256(v.data(), v.size());
}

inline std::string sha256_hex(const std::string& s) {
  const Sha256Digest d = sha256(s);
  return to_hex(d.data(), d.size());
}

}  // namespace hammerpuf::detail
