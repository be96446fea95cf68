#include "sae/image.hpp"

#include "sae/errors.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace sae {

namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

bool is_pgm(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5';
}

// PNGs are decoded through libpng's simplified API to 8-bit gray or RGB so
// the luminance weights stay under our control.
Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw DecodeError(std::string("PNG header: ") + png.message);

    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (png.width == 0 || png.height == 0) {
        png_image_free(&png);
        throw DegenerateImage("PNG has zero area");
    }

    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr))
        throw DecodeError(std::string("PNG data: ") + png.message);

    Image img;
    img.width = png.width;
    img.height = png.height;
    img.channels = color ? 3 : 1;
    img.max_value = 255;
    img.samples.assign(buffer.begin(), buffer.end());
    return img;
}

class PgmHeaderReader {
public:
    explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes), pos_(2) {}

    std::size_t next_number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw DecodeError("PGM header: expected a number");
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > (1u << 30))
                throw DecodeError("PGM header: number out of range");
        }
        return value;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw DecodeError("PGM header: missing separator before raster");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
};

Image decode_pgm(std::span<const std::uint8_t> bytes) {
    PgmHeaderReader header(bytes);
    const std::size_t width = header.next_number();
    const std::size_t height = header.next_number();
    const std::size_t maxval = header.next_number();
    if (maxval == 0 || maxval > 65535)
        throw DecodeError("PGM header: maxval must be in 1..65535");
    if (width == 0 || height == 0)
        throw DegenerateImage("PGM has zero area");
    const std::size_t offset = header.raster_offset();

    const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
    const std::size_t count = width * height;
    if (bytes.size() - offset < count * bytes_per_sample)
        throw DecodeError("PGM raster truncated");

    Image img;
    img.width = width;
    img.height = height;
    img.channels = 1;
    img.max_value = static_cast<std::uint32_t>(maxval);
    img.samples.resize(count);
    const auto* raster = bytes.data() + offset;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint16_t v = bytes_per_sample == 1
                                    ? raster[i]
                                    : static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
        if (v > maxval)
            throw DecodeError("PGM sample exceeds maxval");
        img.samples[i] = v;
    }
    return img;
}

} // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes))
        return decode_png(bytes);
    if (is_pgm(bytes))
        return decode_pgm(bytes);
    throw DecodeError("unsupported image format (expected PNG or binary PGM)");
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    try {
        return decode_image(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    } catch (const DegenerateImage& e) {
        throw DegenerateImage(path.string() + ": " + e.what());
    }
}

void write_png_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     std::span<const std::uint8_t> pixels) {
    if (pixels.size() != width * height)
        throw DimensionMismatch("pixel buffer does not match image size");
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + png.message);
}

std::vector<std::uint8_t> encode_pgm(const Image& image) {
    if (image.channels != 1)
        throw DimensionMismatch("PGM output requires a single-channel image");
    const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                               "\n" + std::to_string(image.max_value) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (auto v : image.samples) {
        if (image.max_value > 255)
            out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

} // namespace sae
