#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sae {

/// Decoded raster. Samples are interleaved (1 = gray, 3 = RGB), row-major,
/// and never exceed `max_value` (255 for 8-bit, 65535 for 16-bit sources).
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::uint32_t max_value = 255;
    std::vector<std::uint16_t> samples;

    std::uint16_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return samples[(y * width + x) * channels + c];
    }
};

/// Decodes PNG or binary PGM (P5), detected by signature. Alpha channels are
/// dropped; palette and sub-byte gray are expanded to 8 bits.
Image decode_image(std::span<const std::uint8_t> bytes);
Image read_image(const std::filesystem::path& path);

/// 8-bit grayscale PNG. Byte output depends only on the pixels.
void write_png_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     std::span<const std::uint8_t> pixels);

std::vector<std::uint8_t> encode_pgm(const Image& image);

} // namespace sae
