#ifndef MOSTV_STIMULI_HPP_
#define MOSTV_STIMULI_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mostv/rng.hpp"

namespace mostv {

// Dot-set ratio n_small : n_large with n_large = n_small + 1.
struct RatioPair {
  int small = 1;
  int large = 2;

  double balance() const { return static_cast<double>(small) / large; }   // in (0,1)
  double weber_ratio() const { return static_cast<double>(large) / small; }  // in (1,2]

  bool operator==(const RatioPair&) const = default;
};

// The nine ratios 1:2 .. 9:10.
std::array<RatioPair, 9> all_ratios();

enum class ImageType : int {
  ColumnPairsSorted = 0,
  ColumnPairsMixed = 1,
  ScatteredPairs = 2,
  ScatteredRandom = 3,
};

constexpr int kNumImageTypes = 4;
std::array<ImageType, 4> all_image_types();

const char* to_string(ImageType t);
ImageType image_type_from_string(const std::string& s);

enum class DotClass : uint8_t { Blue = 0, Yellow = 1 };

struct Dot {
  double x = 0.0;  // center, pixels
  double y = 0.0;
  double radius = 0.0;
  DotClass dot_class = DotClass::Blue;
};

struct DotScene {
  std::vector<Dot> dots;
  ImageType image_type = ImageType::ScatteredRandom;
  int n_blue = 0;
  int n_yellow = 0;
  uint64_t seed = 0;
};

// Geometry shared by the generator and its tests.
struct SceneGeometry {
  static constexpr int kCanvas = 128;
  static constexpr double kDotRadius = 3.5;
  static constexpr double kMargin = 1.0;       // inter-dot clearance and edge slack
  static constexpr double kColumnPitchY = 8.5; // vertical spacing inside a column
  static constexpr double kColumnHalfGap = 8.0;   // columns sit at 64 +/- this
  static constexpr double kColumnMaxJitterY = 4.0;
  static constexpr double kPairOffset = 9.0;      // intra-pair center distance
  static constexpr double kUnitClearance = 11.0;  // between dots of different units
  static constexpr int kRetryBudget = 1000;       // per scene
  static constexpr int kMaxTotalDots = 22;

  static double min_center() { return kDotRadius + kMargin; }
  static double max_center() { return kCanvas - kDotRadius - kMargin; }
  // Strict separation required between any two dot centers.
  static double min_separation() { return 2.0 * kDotRadius + kMargin; }
};

// Sampled set sizes for one scene: (n_majority, n_minority) = k * (large, small).
struct SetSizes {
  int n_majority = 0;
  int n_minority = 0;
  int multiplier = 1;
};

// k is uniform over {1 .. 22/(small+large)}.
SetSizes choose_set_sizes(const RatioPair& ratio, Rng& rng);

// Scene with explicit class counts (n_blue != n_yellow required).
DotScene generate_scene_with_counts(int n_blue, int n_yellow, ImageType type,
                                    Rng& rng);

// Samples a multiplier, then builds the scene. Majority class is Blue iff truth.
DotScene generate_scene(const RatioPair& ratio, ImageType type, bool truth,
                        Rng& rng, int* multiplier_out = nullptr);

// Recovers the contrast-pair structure of a ScatteredPairs scene: returns
// the number of blue-yellow dot pairs closer than the intra-pair offset.
int count_contrast_pairs(const DotScene& scene);

}  // namespace mostv

#endif  // MOSTV_STIMULI_HPP_
