#ifndef GASTMIX_HASH_HPP
#define GASTMIX_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace gastmix {

// FNV-1a, 64 bit. Used for sentence ids, subword buckets and file manifests.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(std::string_view hex);

} // namespace gastmix

#endif
