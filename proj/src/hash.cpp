#include "stranglerkit/hash.hpp"

#include <array>

namespace stranglerkit {

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

DigestBuilder& DigestBuilder::add(std::string_view field) {
  add_u64(field.size());
  h_ = fnv1a64(field, h_);
  return *this;
}

DigestBuilder& DigestBuilder::add_u64(std::uint64_t value) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) {
    bytes[static_cast<std::size_t>(i)] = static_cast<char>(value >> (i * 8));
  }
  h_ = fnv1a64(std::string_view(bytes.data(), bytes.size()), h_);
  return *this;
}

std::string DigestBuilder::hex() const { return hex64(h_); }

}  // namespace stranglerkit
