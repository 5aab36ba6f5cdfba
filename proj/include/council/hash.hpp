#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace council {

// FNV-1a, 64 bit. Used for content addressing (response cache keys, request
// fingerprints, config hashes). Stable across processes and platforms.
class Fnv1a64 {
  public:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime  = 0x100000001b3ULL;

    Fnv1a64& update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= static_cast<std::uint64_t>(c);
            state_ *= kPrime;
        }
        return *this;
    }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return out;
    }

  private:
    std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    return Fnv1a64().update(bytes).value();
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    return Fnv1a64().update(bytes).hex();
}

} // namespace council
