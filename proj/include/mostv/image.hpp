#ifndef MOSTV_IMAGE_HPP_
#define MOSTV_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mostv/stimuli.hpp"

namespace mostv {

// 8-bit single-channel image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
  uint8_t at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

// Rendering levels. Blue is the brighter of the two dot levels.
struct GrayLevels {
  uint8_t background = 0;
  uint8_t yellow = 128;
  uint8_t blue = 255;
};

// Flat-disc rendering: a pixel is foreground iff its center lies within the
// dot radius. No anti-aliasing, so an image holds at most three gray levels.
Image rasterize(const DotScene& scene, const GrayLevels& levels = GrayLevels{});

void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

// Header-only probe: width, height, bit depth and color type of a PNG file.
struct PngInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
};
PngInfo read_png_info(const std::string& path);

}  // namespace mostv

#endif  // MOSTV_IMAGE_HPP_
