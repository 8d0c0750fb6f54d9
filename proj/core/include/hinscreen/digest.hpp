#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hinscreen {

// FNV-1a, 64-bit. Used for input fingerprints in run manifests and for
// pairing serialized artifacts (feature matrices reference the core graph
// they were built from).
class Fnv1a64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ull;
    }
  }
  void update_byte(unsigned char c) {
    hash_ ^= c;
    hash_ *= 0x100000001b3ull;
  }
  std::uint64_t value() const { return hash_; }
  std::string hex() const;

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string Fnv1a64::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = hash_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Digest of a file's raw bytes. Throws std::runtime_error if unreadable.
std::uint64_t digest_file(const std::string& path, std::uint64_t* size_out = nullptr);
std::string digest_file_hex(const std::string& path, std::uint64_t* size_out = nullptr);

}  // namespace hinscreen
