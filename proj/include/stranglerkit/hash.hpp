#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stranglerkit {

// FNV-1a, 64-bit. Used for routing-key buckets, row digests and response
// digests. Test vectors (also in the README):
//   fnv1a64("")      == 0xcbf29ce484222325
//   fnv1a64("a")     == 0xaf63dc4c8601ec8c
//   fnv1a64("hello") == 0xa430d84680aabd0b
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = kFnvOffsetBasis) {
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// Traffic-shift bucket in [0, 100): a key routes to the extracted target
/// iff bucket_of(key) < shift_percent.
constexpr int bucket_of(std::string_view key) {
  return static_cast<int>(fnv1a64(key) % 100);
}

std::string hex64(std::uint64_t value);

/// Incremental digest over a sequence of fields. Fields are length-prefixed
/// before hashing so that add("ab"), add("c") differs from add("a"), add("bc").
class DigestBuilder {
 public:
  explicit DigestBuilder(std::uint64_t seed = 0) { h_ = kFnvOffsetBasis ^ seed; }

  DigestBuilder& add(std::string_view field);
  DigestBuilder& add_u64(std::uint64_t value);

  std::uint64_t value() const { return h_; }
  std::string hex() const;

 private:
  std::uint64_t h_;
};

}  // namespace stranglerkit
