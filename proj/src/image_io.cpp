#include "invdesc/imagecore.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

namespace invdesc {
namespace {

constexpr std::array<unsigned char, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open image file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GrayImage from_bytes(int width, int height, const unsigned char* bytes) {
    std::vector<double> values(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = bytes[i] / 255.0;
    return GrayImage(width, height, std::move(values));
}

// Header tokens of a netpbm file, skipping whitespace and '#' comments.
class PgmHeader {
public:
    explicit PgmHeader(const std::vector<unsigned char>& data) : data_(data) {}

    long next_int() {
        skip_space();
        if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
            throw ImageIoError("malformed PGM header");
        }
        long v = 0;
        while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
            v = v * 10 + (data_[pos_++] - '0');
            if (v > 1'000'000) throw ImageIoError("PGM header value too large");
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
            throw ImageIoError("malformed PGM header");
        }
        return pos_ + 1;
    }

private:
    void skip_space() {
        while (pos_ < data_.size()) {
            if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else if (std::isspace(data_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& data_;
    std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<unsigned char>& data) {
    PgmHeader header(data);
    const long width = header.next_int();
    const long height = header.next_int();
    const long maxval = header.next_int();
    if (width == 0 || height == 0) throw ImageIoError("PGM has zero dimension");
    if (maxval != 255) throw ImageIoError("only 8-bit PGM (maxval 255) is supported");
    const std::size_t offset = header.raster_offset();
    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (data.size() < offset + need) throw ImageIoError("PGM raster is truncated");
    return from_bytes(static_cast<int>(width), static_cast<int>(height), data.data() + offset);
}

struct PngReader {
    const std::vector<unsigned char>* data;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<PngReader*>(png_get_io_ptr(png));
    if (reader->pos + count > reader->data->size()) png_error(png, "truncated PNG stream");
    std::copy_n(reader->data->data() + reader->pos, count, out);
    reader->pos += count;
}

void png_ignore_warning(png_structp, png_const_charp) {}

// libpng's default handler prints to stderr before jumping; the message is
// reported through the exception instead.
[[noreturn]] void png_quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }

GrayImage decode_png(const std::vector<unsigned char>& data) {
    // Everything with a destructor lives outside the setjmp scope.
    PngReader reader{&data, 0};
    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    const char* volatile failure = nullptr;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_quiet_error,
                                             png_ignore_warning);
    if (png == nullptr) throw ImageIoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageIoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError(failure != nullptr ? failure : "corrupt PNG stream");
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    if (width == 0 || height == 0) {
        failure = "PNG has zero dimension";
        png_error(png, failure);
    }
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
        failure = "only 8-bit grayscale PNG is supported";
        png_error(png, failure);
    }
    raster.resize(static_cast<std::size_t>(width) * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + static_cast<std::size_t>(r) * width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(static_cast<int>(width), static_cast<int>(height), raster.data());
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ImageIoError("no such image file: " + path.string());
    const auto data = read_all(path);
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '5') return decode_pgm(data);
    if (data.size() >= kPngSignature.size() &&
        std::equal(kPngSignature.begin(), kPngSignature.end(), data.begin())) {
        return decode_png(data);
    }
    throw ImageIoError("unsupported image format (expected P5 PGM or grayscale PNG): " +
                       path.string());
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot write image file: " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::string raster(img.size(), '\0');
    const auto values = img.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::clamp(values[i], 0.0, 1.0);
        raster[i] = static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

}  // namespace invdesc
