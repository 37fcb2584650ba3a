#ifndef MOSTV_GLIMPSE_HPP_
#define MOSTV_GLIMPSE_HPP_

#include <array>

#include "mostv/tensor.hpp"

namespace mostv {

struct RamConfig {
  int n_glimpses = 4;
  int n_patches = 2;   // fine + coarse
  int patch_size = 12; // fine patch side; the coarse patch covers twice that
  std::array<int, 3> conv_filters = {64, 64, 128};
  std::array<int, 3> conv_kernels = {5, 3, 3};
  int feature_dim = 512;
  int hidden_dim = 1024;
  double location_std = 0.03;
};

// Multi-resolution retinal sample at a location in [-1, 1]^2 (x right,
// y down; -1 maps to pixel 0, +1 to pixel size-1, rounded to the nearest
// pixel). Channel 0: patch_size crop at full resolution. Channel 1: a crop
// of twice the side, 2x2 average-pooled back down. Out-of-image area reads
// as zero. Output buffer holds 2 * patch_size * patch_size values.
template <class T>
void extract_glimpse(const T* image, int height, int width, T loc_x, T loc_y,
                     int patch_size, T* out);

// Batched wrapper: images {N, 1, H, W}, one (x, y) per sample,
// output {N, 2, patch, patch}.
template <class T>
void extract_glimpse_batch(const Tensor<T>& images,
                           const std::vector<std::array<T, 2>>& locations,
                           int patch_size, Tensor<T>& out);

}  // namespace mostv

#endif  // MOSTV_GLIMPSE_HPP_
