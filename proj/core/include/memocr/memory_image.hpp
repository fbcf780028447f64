#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace memocr {

inline constexpr std::uint8_t kBackground = 255;
inline constexpr std::uint8_t kInk = 0;

// Row-major 8-bit grayscale image. Immutable once built; the content hash is
// computed at construction.
class MemoryImage {
public:
    MemoryImage() : MemoryImage(0, 0, {}) {}
    MemoryImage(int width, int height, std::vector<std::uint8_t> pixels);

    static MemoryImage blank(int width, int height, std::uint8_t value = kBackground);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }
    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    // Hex SHA-256 over (width, height, pixels).
    const std::string& content_hash() const { return hash_; }

    std::size_t ink_count(std::uint8_t threshold = 128) const;
    double mean() const;

    bool operator==(const MemoryImage& o) const {
        return width_ == o.width_ && height_ == o.height_ && pixels_ == o.pixels_;
    }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
    std::string hash_;
};

// 8-bit grayscale, non-interlaced PNG. No time or text chunks, so output bytes
// depend only on the pixels and the zlib build.
std::vector<std::uint8_t> encode_png(const MemoryImage& image);
MemoryImage decode_png(std::span<const std::uint8_t> bytes);

void write_png(const MemoryImage& image, const std::filesystem::path& path);
MemoryImage read_png(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace memocr
