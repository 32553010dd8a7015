#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "rdd/error.hpp"

// Explicit little-endian encoding for the binary model formats, independent
// of host byte order.
namespace rdd::binary {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b.data(), 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b.data(), 4);
}
inline void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void get_bytes(std::istream& in, char* dst, std::size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw ParseError(std::string("truncated binary file reading ") + what);
}
inline std::uint64_t get_u64(std::istream& in, const char* what) {
    std::array<unsigned char, 8> b;
    get_bytes(in, reinterpret_cast<char*>(b.data()), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}
inline std::uint32_t get_u32(std::istream& in, const char* what) {
    std::array<unsigned char, 4> b;
    get_bytes(in, reinterpret_cast<char*>(b.data()), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}
inline std::int32_t get_i32(std::istream& in, const char* what) { return static_cast<std::int32_t>(get_u32(in, what)); }
inline double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get_u64(in, what)); }

inline void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }
inline void expect_magic(std::istream& in, const char (&magic)[5]) {
    std::array<char, 4> b{};
    in.read(b.data(), 4);
    if (in.gcount() != 4 || std::string(b.data(), 4) != std::string(magic, 4)) {
        throw ParseError(std::string("not a ") + magic + " file (bad magic bytes)");
    }
}

}  // namespace rdd::binary
