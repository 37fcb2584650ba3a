#include "mostv/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "mostv/errors.hpp"

namespace mostv {

Image rasterize(const DotScene& scene, const GrayLevels& levels) {
  Image img(SceneGeometry::kCanvas, SceneGeometry::kCanvas, levels.background);
  for (const Dot& dot : scene.dots) {
    const uint8_t level = dot.dot_class == DotClass::Blue ? levels.blue : levels.yellow;
    const double r2 = dot.radius * dot.radius;
    const int row_lo = std::max(0, static_cast<int>(std::floor(dot.y - dot.radius)));
    const int row_hi = std::min(img.height - 1, static_cast<int>(std::ceil(dot.y + dot.radius)));
    const int col_lo = std::max(0, static_cast<int>(std::floor(dot.x - dot.radius)));
    const int col_hi = std::min(img.width - 1, static_cast<int>(std::ceil(dot.x + dot.radius)));
    for (int row = row_lo; row <= row_hi; ++row) {
      const double dy = (row + 0.5) - dot.y;
      for (int col = col_lo; col <= col_hi; ++col) {
        const double dx = (col + 0.5) - dot.x;
        if (dx * dx + dy * dy <= r2) img.at(row, col) = level;
      }
    }
  }
  return img;
}

namespace {

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const Image& image) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png write failed: " + path);
  }

  png_init_io(png, fp.get());
  // Fixed compression settings keep regenerated files byte-identical.
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < image.height; ++row)
    png_write_row(png, const_cast<png_bytep>(&image.pixels[static_cast<size_t>(row) * image.width]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png read failed: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize anything unexpected down to 8-bit gray.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(png, 1, -1, -1);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  Image img(static_cast<int>(png_get_image_width(png, info)),
            static_cast<int>(png_get_image_height(png, info)));
  for (int row = 0; row < img.height; ++row)
    png_read_row(png, &img.pixels[static_cast<size_t>(row) * img.width], nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

PngInfo read_png_info(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png header read failed: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);
  PngInfo out{static_cast<int>(png_get_image_width(png, info)),
              static_cast<int>(png_get_image_height(png, info)),
              png_get_bit_depth(png, info), png_get_color_type(png, info)};
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace mostv
