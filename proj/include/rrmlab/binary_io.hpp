#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "rrmlab/errors.hpp"

namespace rrm::io {

// Little-endian fixed-width encoding, independent of host byte order.

template <typename U>
void put_le(std::ostream& os, U value) {
    char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xffu);
    os.write(buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& is, const char* what) {
    unsigned char buf[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) {
        throw FormatError(std::string("unexpected end of file while reading ") + what);
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buf[i]) << (8 * i);
    return value;
}

inline void put_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
inline void put_f32(std::ostream& os, float v) { put_le(os, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& is, const char* what) { return get_le<std::uint32_t>(is, what); }
inline float get_f32(std::istream& is, const char* what) {
    return std::bit_cast<float>(get_le<std::uint32_t>(is, what));
}
inline double get_f64(std::istream& is, const char* what) {
    return std::bit_cast<double>(get_le<std::uint64_t>(is, what));
}

}  // namespace rrm::io
