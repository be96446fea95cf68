#include "sae/binary_io.hpp"

#include "sae/errors.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sae::binio {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in pieces.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const std::size_t len = std::min(kChunk, bytes.size() - off);
        crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(len));
    }
    return static_cast<std::uint32_t>(crc);
}

void Writer::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void Writer::u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void Writer::f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int shift = 0; shift < 64; shift += 8)
        buf_.push_back(static_cast<std::uint8_t>(bits >> shift));
}

void Writer::f64s(std::span<const double> values) {
    buf_.reserve(buf_.size() + values.size() * 8);
    for (double v : values)
        f64(v);
}

void Writer::bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

void Writer::seal() { u32(crc32(buf_)); }

bool Reader::verify_and_strip_crc() {
    if (bytes_.size() < 4)
        return false;
    const auto body = bytes_.first(bytes_.size() - 4);
    const auto* tail = bytes_.data() + body.size();
    const std::uint32_t stored = static_cast<std::uint32_t>(tail[0]) | (static_cast<std::uint32_t>(tail[1]) << 8) |
                                 (static_cast<std::uint32_t>(tail[2]) << 16) |
                                 (static_cast<std::uint32_t>(tail[3]) << 24);
    if (stored != crc32(body))
        return false;
    bytes_ = body;
    return true;
}

const std::uint8_t* Reader::take(std::size_t n) {
    if (!has(n)) {
        truncated_ = true;
        pos_ = bytes_.size();
        return nullptr;
    }
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
}

std::uint8_t Reader::u8() {
    const auto* p = take(1);
    return p ? p[0] : 0;
}

std::uint16_t Reader::u16() {
    const auto* p = take(2);
    return p ? static_cast<std::uint16_t>(p[0] | (p[1] << 8)) : 0;
}

std::uint32_t Reader::u32() {
    const auto* p = take(4);
    if (!p)
        return 0;
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k)
        v = (v << 8) | p[k];
    return v;
}

double Reader::f64() {
    const auto* p = take(8);
    if (!p)
        return 0.0;
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k)
        bits = (bits << 8) | p[k];
    return std::bit_cast<double>(bits);
}

void Reader::f64s(std::span<double> out) {
    for (auto& v : out)
        v = f64();
}

std::string Reader::bytes(std::size_t n) {
    const auto* p = take(n);
    return p ? std::string(reinterpret_cast<const char*>(p), n) : std::string();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("failed writing " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

} // namespace sae::binio
