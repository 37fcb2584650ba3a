#include "mostv/glimpse.hpp"

#include <cmath>
#include <cstring>

#include "mostv/errors.hpp"

namespace mostv {

namespace {

template <class T>
int map_to_pixel(T coord, int extent) {
  return static_cast<int>(std::lround((double(coord) + 1.0) * 0.5 * (extent - 1)));
}

// Zero-padded crop of side `size` whose top-left sits at (row0, col0).
template <class T>
void crop(const T* image, int height, int width, int row0, int col0, int size, T* out) {
  for (int r = 0; r < size; ++r) {
    T* dst = out + static_cast<size_t>(r) * size;
    const int in_r = row0 + r;
    if (in_r < 0 || in_r >= height) {
      std::memset(dst, 0, sizeof(T) * size);
      continue;
    }
    for (int c = 0; c < size; ++c) {
      const int in_c = col0 + c;
      dst[c] = (in_c >= 0 && in_c < width)
                   ? image[static_cast<size_t>(in_r) * width + in_c]
                   : T(0);
    }
  }
}

}  // namespace

template <class T>
void extract_glimpse(const T* image, int height, int width, T loc_x, T loc_y,
                     int patch_size, T* out) {
  if (!std::isfinite(double(loc_x)) || !std::isfinite(double(loc_y)))
    throw DomainError("glimpse location is not finite");
  const int center_col = map_to_pixel(loc_x, width);
  const int center_row = map_to_pixel(loc_y, height);
  const int p = patch_size;

  // Fine patch at full resolution.
  crop(image, height, width, center_row - p / 2, center_col - p / 2, p, out);

  // Coarse patch: double the side, then 2x2 mean back to patch resolution.
  const int cp = 2 * p;
  std::vector<T> coarse(static_cast<size_t>(cp) * cp);
  crop(image, height, width, center_row - p, center_col - p, cp, coarse.data());
  T* dst = out + static_cast<size_t>(p) * p;
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) {
      const T* base = coarse.data() + static_cast<size_t>(2 * r) * cp + 2 * c;
      dst[static_cast<size_t>(r) * p + c] =
          (base[0] + base[1] + base[cp] + base[cp + 1]) * T(0.25);
    }
  }
}

template <class T>
void extract_glimpse_batch(const Tensor<T>& images,
                           const std::vector<std::array<T, 2>>& locations,
                           int patch_size, Tensor<T>& out) {
  const int n = images.dim(0), h = images.dim(2), w = images.dim(3);
  if (locations.size() != static_cast<size_t>(n))
    throw ConfigError("glimpse batch needs one location per image");
  out.resize({n, 2, patch_size, patch_size});
  const int64_t per_out = 2 * static_cast<int64_t>(patch_size) * patch_size;
  for (int i = 0; i < n; ++i)
    extract_glimpse(images.ptr() + static_cast<size_t>(i) * h * w, h, w,
                    locations[i][0], locations[i][1], patch_size,
                    out.ptr() + i * per_out);
}

template void extract_glimpse<float>(const float*, int, int, float, float, int, float*);
template void extract_glimpse<double>(const double*, int, int, double, double, int, double*);
template void extract_glimpse_batch<float>(const Tensor<float>&,
                                           const std::vector<std::array<float, 2>>&,
                                           int, Tensor<float>&);
template void extract_glimpse_batch<double>(const Tensor<double>&,
                                            const std::vector<std::array<double, 2>>&,
                                            int, Tensor<double>&);

}  // namespace mostv
