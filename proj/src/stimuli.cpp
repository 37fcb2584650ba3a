#include "mostv/stimuli.hpp"

#include <algorithm>
#include <cmath>

#include "mostv/errors.hpp"

namespace mostv {

std::array<RatioPair, 9> all_ratios() {
  std::array<RatioPair, 9> out;
  for (int i = 0; i < 9; ++i) out[i] = RatioPair{i + 1, i + 2};
  return out;
}

std::array<ImageType, 4> all_image_types() {
  return {ImageType::ColumnPairsSorted, ImageType::ColumnPairsMixed,
          ImageType::ScatteredPairs, ImageType::ScatteredRandom};
}

const char* to_string(ImageType t) {
  switch (t) {
    case ImageType::ColumnPairsSorted: return "column_pairs_sorted";
    case ImageType::ColumnPairsMixed: return "column_pairs_mixed";
    case ImageType::ScatteredPairs: return "scattered_pairs";
    case ImageType::ScatteredRandom: return "scattered_random";
  }
  return "unknown";
}

ImageType image_type_from_string(const std::string& s) {
  for (ImageType t : all_image_types())
    if (s == to_string(t)) return t;
  throw ConfigError("unknown image type: " + s);
}

SetSizes choose_set_sizes(const RatioPair& ratio, Rng& rng) {
  if (ratio.small < 1 || ratio.large <= ratio.small)
    throw ConfigError("invalid ratio pair");
  const int k_max = SceneGeometry::kMaxTotalDots / (ratio.small + ratio.large);
  const int k = static_cast<int>(rng.uniform_int(1, k_max));
  return SetSizes{k * ratio.large, k * ratio.small, k};
}

namespace {

using G = SceneGeometry;

double dist(const Dot& a, const Dot& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool clear_of(const std::vector<Dot>& dots, double x, double y, double min_d) {
  for (const Dot& d : dots)
    if (std::hypot(d.x - x, d.y - y) <= min_d) return false;
  return true;
}

// Two top-aligned columns at 64 +/- kColumnHalfGap, vertical pitch fixed,
// whole block vertically centered up to a small jitter. Returns slot centers:
// first n_left positions belong to the left column.
std::vector<std::pair<double, double>> column_slots(int n_left, int n_right,
                                                    Rng& rng) {
  const int rows = std::max(n_left, n_right);
  const double block_h = (rows - 1) * G::kColumnPitchY;
  const double natural_top = (G::kCanvas - block_h) / 2.0;
  const double jitter_lo = std::max(-G::kColumnMaxJitterY, G::min_center() - natural_top);
  const double jitter_hi = std::min(G::kColumnMaxJitterY, G::max_center() - (natural_top + block_h));
  const double top = natural_top + rng.uniform(jitter_lo, jitter_hi);

  const double x_left = G::kCanvas / 2.0 - G::kColumnHalfGap;
  const double x_right = G::kCanvas / 2.0 + G::kColumnHalfGap;
  std::vector<std::pair<double, double>> slots;
  slots.reserve(static_cast<size_t>(n_left + n_right));
  for (int i = 0; i < n_left; ++i) slots.emplace_back(x_left, top + i * G::kColumnPitchY);
  for (int i = 0; i < n_right; ++i) slots.emplace_back(x_right, top + i * G::kColumnPitchY);
  return slots;
}

void place_columns(DotScene& scene, bool sorted, Rng& rng) {
  const bool blue_left = rng.coin();
  const int n_left = blue_left ? scene.n_blue : scene.n_yellow;
  const int n_right = blue_left ? scene.n_yellow : scene.n_blue;
  auto slots = column_slots(n_left, n_right, rng);

  std::vector<DotClass> classes(slots.size());
  const DotClass left_class = blue_left ? DotClass::Blue : DotClass::Yellow;
  const DotClass right_class = blue_left ? DotClass::Yellow : DotClass::Blue;
  for (int i = 0; i < n_left; ++i) classes[i] = left_class;
  for (int i = 0; i < n_right; ++i) classes[n_left + i] = right_class;
  if (!sorted) rng.shuffle(classes);

  for (size_t i = 0; i < slots.size(); ++i)
    scene.dots.push_back(Dot{slots[i].first, slots[i].second, G::kDotRadius, classes[i]});
}

// Rejection-samples a position subject to a clearance against placed dots.
// Throws PlacementFailure once the scene's shared retry budget is exhausted.
std::pair<double, double> sample_position(const std::vector<Dot>& placed,
                                          double clearance, double max_x_slack,
                                          Rng& rng, int& budget) {
  while (true) {
    const double x = rng.uniform(G::min_center(), G::max_center() - max_x_slack);
    const double y = rng.uniform(G::min_center(), G::max_center());
    if (clear_of(placed, x, y, clearance) &&
        (max_x_slack == 0.0 || clear_of(placed, x + max_x_slack, y, clearance)))
      return {x, y};
    if (--budget <= 0)
      throw PlacementFailure("scene placement exceeded retry budget");
  }
}

void place_scattered_random(DotScene& scene, Rng& rng) {
  std::vector<DotClass> classes;
  classes.insert(classes.end(), scene.n_blue, DotClass::Blue);
  classes.insert(classes.end(), scene.n_yellow, DotClass::Yellow);
  rng.shuffle(classes);

  int budget = G::kRetryBudget;
  for (DotClass c : classes) {
    auto [x, y] = sample_position(scene.dots, G::min_separation(), 0.0, rng, budget);
    scene.dots.push_back(Dot{x, y, G::kDotRadius, c});
  }
}

void place_scattered_pairs(DotScene& scene, Rng& rng) {
  const int n_pairs = std::min(scene.n_blue, scene.n_yellow);
  const int n_lone = std::abs(scene.n_blue - scene.n_yellow);
  const DotClass majority = scene.n_blue > scene.n_yellow ? DotClass::Blue : DotClass::Yellow;

  // Dots of different units keep kUnitClearance between centers so the
  // pairing stays recoverable by a nearest-contrast-neighbor query.
  int budget = G::kRetryBudget;
  for (int p = 0; p < n_pairs; ++p) {
    auto [x, y] = sample_position(scene.dots, G::kUnitClearance, G::kPairOffset, rng, budget);
    const bool blue_first = rng.coin();
    scene.dots.push_back(Dot{x, y, G::kDotRadius,
                             blue_first ? DotClass::Blue : DotClass::Yellow});
    scene.dots.push_back(Dot{x + G::kPairOffset, y, G::kDotRadius,
                             blue_first ? DotClass::Yellow : DotClass::Blue});
  }
  for (int i = 0; i < n_lone; ++i) {
    auto [x, y] = sample_position(scene.dots, G::kUnitClearance, 0.0, rng, budget);
    scene.dots.push_back(Dot{x, y, G::kDotRadius, majority});
  }
}

}  // namespace

DotScene generate_scene_with_counts(int n_blue, int n_yellow, ImageType type,
                                    Rng& rng) {
  if (n_blue == n_yellow)
    throw ConfigError("scene requires unequal class counts");
  if (n_blue + n_yellow > G::kMaxTotalDots)
    throw ConfigError("scene exceeds the total-dot cap");

  DotScene scene;
  scene.image_type = type;
  scene.n_blue = n_blue;
  scene.n_yellow = n_yellow;
  scene.dots.reserve(static_cast<size_t>(n_blue + n_yellow));

  switch (type) {
    case ImageType::ColumnPairsSorted: place_columns(scene, true, rng); break;
    case ImageType::ColumnPairsMixed: place_columns(scene, false, rng); break;
    case ImageType::ScatteredPairs: place_scattered_pairs(scene, rng); break;
    case ImageType::ScatteredRandom: place_scattered_random(scene, rng); break;
  }
  return scene;
}

DotScene generate_scene(const RatioPair& ratio, ImageType type, bool truth,
                        Rng& rng, int* multiplier_out) {
  const SetSizes sizes = choose_set_sizes(ratio, rng);
  const int n_blue = truth ? sizes.n_majority : sizes.n_minority;
  const int n_yellow = truth ? sizes.n_minority : sizes.n_majority;
  if (multiplier_out) *multiplier_out = sizes.multiplier;
  return generate_scene_with_counts(n_blue, n_yellow, type, rng);
}

int count_contrast_pairs(const DotScene& scene) {
  int count = 0;
  for (size_t i = 0; i < scene.dots.size(); ++i)
    for (size_t j = i + 1; j < scene.dots.size(); ++j)
      if (scene.dots[i].dot_class != scene.dots[j].dot_class &&
          dist(scene.dots[i], scene.dots[j]) <= G::kPairOffset + 1e-6)
        ++count;
  return count;
}

}  // namespace mostv
