#pragma once

// Little-endian primitives shared by the tensor and weight file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mvxray/errors.hpp"

namespace mvx::detail {

template <class UInt>
void put_le(std::ostream& os, UInt v)
{
    char buf[sizeof(UInt)];
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(buf, sizeof(UInt));
}

template <class UInt>
UInt get_le(std::istream& is)
{
    unsigned char buf[sizeof(UInt)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(UInt))) {
        throw FormatError("unexpected end of file");
    }
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(buf[i]) << (8 * i);
    return v;
}

inline void put_f32(std::ostream& os, float f) { put_le(os, std::bit_cast<std::uint32_t>(f)); }
inline void put_f64(std::ostream& os, double d) { put_le(os, std::bit_cast<std::uint64_t>(d)); }
inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_le<std::uint32_t>(is)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

inline void expect_magic(std::istream& is, const char (&magic)[5])
{
    char got[4];
    if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
        throw FormatError(std::string("bad magic, expected ") + magic);
    }
}

}  // namespace mvx::detail
