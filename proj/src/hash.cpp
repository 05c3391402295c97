#include "gastmix/hash.hpp"

#include "gastmix/error.hpp"

namespace gastmix {

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::uint64_t from_hex(std::string_view hex) {
    std::uint64_t v = 0;
    if (hex.empty() || hex.size() > 16) throw DataError("bad hex value: '" + std::string(hex) + "'");
    for (char c : hex) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
        else throw DataError("bad hex value: '" + std::string(hex) + "'");
    }
    return v;
}

} // namespace gastmix
