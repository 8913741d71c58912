#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dgs/error.hpp"

namespace dgs {

/// Little-endian binary writer used by checkpoint files. The byte layout is
/// documented in docs/checkpoint_format.md and must stay stable across
/// platforms, so integers are encoded byte by byte instead of memcpy'd.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { put(&v, 1); }

    void u32(std::uint32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        put(b, 4);
    }

    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        put(b, 8);
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void magic(const char tag[4]) { put(tag, 4); }

    void str(const std::string& s) {
        u64(s.size());
        put(s.data(), s.size());
    }

    void f64_vec(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }

private:
    void put(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out_) throw IoError("checkpoint write failed");
    }

    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    std::uint8_t u8() {
        std::uint8_t v;
        get(&v, 1);
        return v;
    }

    std::uint32_t u32() {
        std::uint8_t b[4];
        get(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint8_t b[8];
        get(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    void expect_magic(const char tag[4], const char* what) {
        char b[4];
        get(b, 4);
        if (std::memcmp(b, tag, 4) != 0) throw IoError(std::string("bad checkpoint header: ") + what);
    }

    std::string str() {
        const std::uint64_t n = u64();
        if (n > (1u << 26)) throw IoError("checkpoint string length implausible");
        std::string s(n, '\0');
        get(s.data(), n);
        return s;
    }

    std::vector<double> f64_vec() {
        const std::uint64_t n = u64();
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }

private:
    void get(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw IoError("checkpoint truncated");
    }

    std::istream& in_;
};

}  // namespace dgs
