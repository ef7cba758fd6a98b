#pragma once
// Versioned little-endian binary container used for every persisted artifact.
//
// Layout: 4-byte magic, 1-byte format version, then a payload of
// length-prefixed fields. Readers bounds-check every field and require the
// payload to end exactly at EOF, so a truncated file never yields a partial
// object.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "scholink/error.hpp"

namespace scholink::binio {

inline constexpr std::uint8_t kFormatVersion = 1;

class Writer {
public:
    Writer(std::string_view magic, std::uint8_t version = kFormatVersion) {
        buf_.append(magic.substr(0, 4));
        buf_.push_back(static_cast<char>(version));
    }

    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }

    void f64s(const std::vector<double>& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        for (double d : v) f64(d);
    }

    const std::string& bytes() const noexcept { return buf_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw IoError("write failed for '" + path + "'");
    }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string bytes, std::string_view magic, std::string source = "<memory>")
        : buf_(std::move(bytes)), source_(std::move(source)) {
        if (buf_.size() < 5 || std::string_view(buf_).substr(0, 4) != magic.substr(0, 4))
            throw FormatVersionError(source_ + ": bad magic, expected '" +
                                     std::string(magic.substr(0, 4)) + "'");
        version_ = static_cast<std::uint8_t>(buf_[4]);
        if (version_ != kFormatVersion)
            throw FormatVersionError(source_ + ": unsupported format version " +
                                     std::to_string(version_));
        pos_ = 5;
    }

    static Reader open(const std::string& path, std::string_view magic) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path + "'");
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad()) throw IoError("read failed for '" + path + "'");
        return Reader(std::move(bytes), magic, path);
    }

    std::uint8_t version() const noexcept { return version_; }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::vector<double> f64s() {
        std::uint32_t n = u32();
        need(static_cast<std::size_t>(n) * 8);
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }

    // Upper bound check for element counts read from the file.
    std::uint32_t count(std::size_t min_bytes_each) {
        std::uint32_t n = u32();
        if (min_bytes_each > 0 && static_cast<std::size_t>(n) * min_bytes_each > remaining())
            throw FormatVersionError(source_ + ": element count exceeds payload (truncated?)");
        return n;
    }

    std::size_t remaining() const noexcept { return buf_.size() - pos_; }

    void expect_end() const {
        if (pos_ != buf_.size())
            throw FormatVersionError(source_ + ": trailing bytes after payload");
    }

private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n)
            throw FormatVersionError(source_ + ": truncated payload");
    }

    std::string buf_;
    std::string source_;
    std::size_t pos_ = 0;
    std::uint8_t version_ = 0;
};

}  // namespace scholink::binio
