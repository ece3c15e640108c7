#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermoforge {

// Little-endian binary readers/writers. All on-disk formats in this project
// are declared little-endian; these keep that true on any host.

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> buf;
    std::memcpy(buf.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> buf;
    is.read(reinterpret_cast<char*>(buf.data()), sizeof(T));
    if (!is) throw std::runtime_error("unexpected end of file");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, buf.data(), sizeof(T));
    return value;
}

inline void write_magic(std::ostream& os, const char (&magic)[9]) {
    os.write(magic, 8);
}

inline void expect_magic(std::istream& is, const char (&magic)[9], const std::string& what) {
    char buf[8];
    is.read(buf, 8);
    if (!is || std::memcmp(buf, magic, 8) != 0)
        throw std::runtime_error(what + ": bad magic");
}

inline std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& flags) {
    std::vector<std::uint8_t> out((flags.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

inline std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t n) {
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    return out;
}

} // namespace thermoforge
