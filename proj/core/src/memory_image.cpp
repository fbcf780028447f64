#include "memocr/memory_image.hpp"

#include "memocr/errors.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

namespace memocr {

namespace {

std::string to_hex(const unsigned char* digest, unsigned int n) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (unsigned int i = 0; i < n; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string hash_image(int w, int h, const std::vector<std::uint8_t>& px) {
    std::uint8_t dims[8];
    for (int i = 0; i < 4; ++i) {
        dims[i] = static_cast<std::uint8_t>((static_cast<std::uint32_t>(w) >> (8 * i)) & 0xFF);
        dims[4 + i] = static_cast<std::uint8_t>((static_cast<std::uint32_t>(h) >> (8 * i)) & 0xFF);
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, dims, sizeof dims);
    EVP_DigestUpdate(ctx, px.data(), px.size());
    EVP_DigestFinal_ex(ctx, digest, &n);
    EVP_MD_CTX_free(ctx);
    return to_hex(digest, n);
}

}  // namespace

MemoryImage::MemoryImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 0 || height < 0 ||
        pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw PreconditionError("image buffer size does not match dimensions");
    }
    hash_ = hash_image(width_, height_, pixels_);
}

MemoryImage MemoryImage::blank(int width, int height, std::uint8_t value) {
    return MemoryImage(width, height,
                       std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value));
}

std::size_t MemoryImage::ink_count(std::uint8_t threshold) const {
    std::size_t n = 0;
    for (auto p : pixels_) {
        n += p <= threshold ? 1 : 0;
    }
    return n;
}

double MemoryImage::mean() const {
    if (pixels_.empty()) {
        return 0.0;
    }
    const auto sum = std::accumulate(pixels_.begin(), pixels_.end(), std::uint64_t{0});
    return static_cast<double>(sum) / static_cast<double>(pixels_.size());
}

std::vector<std::uint8_t> encode_png(const MemoryImage& image) {
    if (image.empty()) {
        throw PreconditionError("cannot encode an empty image as PNG");
    }
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw FormatError("png: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("png: encoding failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t n) {
            auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            buf->insert(buf->end(), data, data + n);
        },
        nullptr);
    // Mostly-white text pages: fast zlib and a fixed filter keep the service
    // render-bound rather than compression-bound.
    png_set_compression_level(png, 1);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
    png_write_info(png, info);
    const auto px = image.pixels();
    for (int y = 0; y < image.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(px.data() + static_cast<std::size_t>(y) * image.width()));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

MemoryImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
        throw FormatError(std::string("png: ") + desc.message);
    }
    desc.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(desc));
    if (!png_image_finish_read(&desc, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&desc);
        throw FormatError(std::string("png: ") + desc.message);
    }
    return MemoryImage(static_cast<int>(desc.width), static_cast<int>(desc.height), std::move(pixels));
}

void write_png(const MemoryImage& image, const std::filesystem::path& path) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

MemoryImage read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &n, EVP_sha256(), nullptr);
    return to_hex(digest, n);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace memocr
