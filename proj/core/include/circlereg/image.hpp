#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace circlereg {

/// 8-bit single-channel image; pixel (x, y) covers [x, x+1) x [y, y+1).
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  MaskImage() = default;
  MaskImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}
};

/// Reads an 8-bit single-channel PNG. Throws SchemaError for other pixel
/// formats and IoError for unreadable files.
MaskImage read_mask_png(const std::filesystem::path& path);
void write_mask_png(const MaskImage& mask, const std::filesystem::path& path);

/// Reads any 8-bit PNG, expanding gray and dropping alpha.
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace circlereg
