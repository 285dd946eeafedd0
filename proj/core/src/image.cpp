#include "circlereg/image.hpp"

#include <cstring>
#include <string>

#include <png.h>

#include "circlereg/error.hpp"

namespace circlereg {
namespace {

struct PngReader {
  png_image image;

  explicit PngReader(const std::filesystem::path& path) {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
      const std::string msg = image.message;
      png_image_free(&image);
      throw Error(ErrorCode::IoError, "cannot read PNG " + path.string() + ": " + msg);
    }
  }
  ~PngReader() { png_image_free(&image); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  void finish(std::vector<std::uint8_t>& buffer, const std::filesystem::path& path) {
    buffer.resize(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
      throw Error(ErrorCode::IoError,
                  "cannot decode PNG " + path.string() + ": " + image.message);
    }
  }
};

void write_png(const std::filesystem::path& path, int width, int height,
               png_uint_32 format, const std::uint8_t* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + msg);
  }
  png_image_free(&image);
}

}  // namespace

MaskImage read_mask_png(const std::filesystem::path& path) {
  PngReader reader(path);
  if (reader.image.format != PNG_FORMAT_GRAY) {
    throw Error(ErrorCode::SchemaError,
                "mask " + path.string() + " must be an 8-bit single-channel PNG");
  }
  MaskImage mask;
  mask.width = static_cast<int>(reader.image.width);
  mask.height = static_cast<int>(reader.image.height);
  reader.finish(mask.pixels, path);
  return mask;
}

void write_mask_png(const MaskImage& mask, const std::filesystem::path& path) {
  write_png(path, mask.width, mask.height, PNG_FORMAT_GRAY, mask.pixels.data());
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  PngReader reader(path);
  reader.image.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = static_cast<int>(reader.image.width);
  out.height = static_cast<int>(reader.image.height);
  reader.finish(out.rgb, path);
  return out;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  write_png(path, image.width, image.height, PNG_FORMAT_RGB, image.rgb.data());
}

}  // namespace circlereg
