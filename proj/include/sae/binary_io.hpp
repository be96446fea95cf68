#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sae::binio {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Appends little-endian fields to an in-memory buffer.
class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void f64(double v);
    void f64s(std::span<const double> values);
    void bytes(std::string_view s);

    /// Appends CRC32 of everything written so far.
    void seal();

    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

/// Reads little-endian fields. A read past the end sets `truncated()` and
/// yields zeros, so callers check once after parsing a section.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    /// Verifies and strips the trailing CRC32. Returns false on mismatch or
    /// when the buffer is too short to hold one.
    bool verify_and_strip_crc();

    bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    double f64();
    void f64s(std::span<double> out);
    std::string bytes(std::size_t n);

    bool truncated() const { return truncated_; }

private:
    const std::uint8_t* take(std::size_t n);

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    bool truncated_ = false;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames over the target.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace sae::binio
