#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "mostv/errors.hpp"
#include "mostv/stimuli.hpp"

using namespace mostv;

namespace {

// Brute-force all-pairs clearance oracle.
double min_pair_distance(const DotScene& scene) {
  double best = 1e9;
  for (size_t i = 0; i < scene.dots.size(); ++i)
    for (size_t j = i + 1; j < scene.dots.size(); ++j)
      best = std::min(best, std::hypot(scene.dots[i].x - scene.dots[j].x,
                                       scene.dots[i].y - scene.dots[j].y));
  return best;
}

int count_class(const DotScene& scene, DotClass c) {
  int n = 0;
  for (const auto& d : scene.dots)
    if (d.dot_class == c) ++n;
  return n;
}

}  // namespace

TEST_CASE("set sizes: 9:10 admits only k=1") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const SetSizes s = choose_set_sizes(RatioPair{9, 10}, rng);
    CHECK(s.multiplier == 1);
    CHECK(s.n_majority == 10);
    CHECK(s.n_minority == 9);
  }
}

TEST_CASE("set sizes: multiplier range matches independent enumeration") {
  // Oracle: largest k with k * (small + large) <= 22, enumerated directly.
  for (const RatioPair ratio : all_ratios()) {
    int k_max_oracle = 0;
    for (int k = 1; k * (ratio.small + ratio.large) <= 22; ++k) k_max_oracle = k;
    REQUIRE(k_max_oracle >= 1);

    Rng rng(static_cast<uint64_t>(ratio.small));
    std::set<int> seen;
    for (int i = 0; i < 3000; ++i) {
      const SetSizes s = choose_set_sizes(ratio, rng);
      CHECK(s.multiplier >= 1);
      CHECK(s.multiplier <= k_max_oracle);
      CHECK(s.n_majority == s.multiplier * ratio.large);
      CHECK(s.n_minority == s.multiplier * ratio.small);
      CHECK(s.n_majority + s.n_minority <= 22);
      seen.insert(s.multiplier);
    }
    CHECK(static_cast<int>(seen.size()) == k_max_oracle);
  }
}

TEST_CASE("set sizes: 1:2 at k=7 gives (14, 7)") {
  Rng rng(3);
  bool saw_k7 = false;
  for (int i = 0; i < 500 && !saw_k7; ++i) {
    const SetSizes s = choose_set_sizes(RatioPair{1, 2}, rng);
    if (s.multiplier == 7) {
      saw_k7 = true;
      CHECK(s.n_majority == 14);
      CHECK(s.n_minority == 7);
    }
  }
  CHECK(saw_k7);
}

TEST_CASE("set sizes: the 4:5 ratio at k=1 is five against four") {
  Rng rng(4);
  bool saw_k1 = false;
  for (int i = 0; i < 200 && !saw_k1; ++i) {
    const SetSizes s = choose_set_sizes(RatioPair{4, 5}, rng);
    if (s.multiplier == 1) {
      saw_k1 = true;
      CHECK(s.n_majority == 5);
      CHECK(s.n_minority == 4);
    }
  }
  CHECK(saw_k1);
}

TEST_CASE("scattered pairs: 5 blue vs 4 yellow has 4 recoverable pairs") {
  Rng rng(10);
  const DotScene scene = generate_scene_with_counts(5, 4, ImageType::ScatteredPairs, rng);
  CHECK(count_class(scene, DotClass::Blue) == 5);
  CHECK(count_class(scene, DotClass::Yellow) == 4);
  CHECK(count_contrast_pairs(scene) == 4);
}

TEST_CASE("sorted columns: 1 vs 2 yields two class-pure columns") {
  Rng rng(11);
  const DotScene scene = generate_scene_with_counts(1, 2, ImageType::ColumnPairsSorted, rng);
  CHECK(scene.n_blue == 1);
  CHECK(scene.n_yellow == 2);

  std::map<double, std::set<int>> classes_by_x;
  for (const auto& d : scene.dots)
    classes_by_x[d.x].insert(static_cast<int>(d.dot_class));
  CHECK(classes_by_x.size() == 2);
  for (const auto& [x, classes] : classes_by_x) CHECK(classes.size() == 1);
}

TEST_CASE("scattered random: 1000 scenes, zero overlaps under the all-pairs oracle") {
  const double min_sep = 2.0 * SceneGeometry::kDotRadius + SceneGeometry::kMargin;
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto ratios = all_ratios();
    const RatioPair ratio = ratios[static_cast<size_t>(rng.uniform_int(0, 8))];
    const DotScene scene =
        generate_scene(ratio, ImageType::ScatteredRandom, rng.coin(), rng);
    CHECK(min_pair_distance(scene) > min_sep - 1e-9);
  }
}

TEST_CASE("all image types satisfy the scene invariants") {
  Rng rng(13);
  const auto ratios = all_ratios();
  for (int i = 0; i < 400; ++i) {
    const RatioPair ratio = ratios[static_cast<size_t>(rng.uniform_int(0, 8))];
    const ImageType type = all_image_types()[static_cast<size_t>(rng.uniform_int(0, 3))];
    const bool truth = rng.coin();
    int multiplier = 0;
    const DotScene scene = generate_scene(ratio, type, truth, rng, &multiplier);

    // Truth iff blue majority.
    CHECK(scene.n_blue == count_class(scene, DotClass::Blue));
    CHECK(scene.n_yellow == count_class(scene, DotClass::Yellow));
    CHECK((scene.n_blue > scene.n_yellow) == truth);
    CHECK(scene.n_blue != scene.n_yellow);
    CHECK(scene.n_blue + scene.n_yellow <= 22);

    // Counts are the ratio scaled by the multiplier.
    const int lo = std::min(scene.n_blue, scene.n_yellow);
    const int hi = std::max(scene.n_blue, scene.n_yellow);
    CHECK(lo == multiplier * ratio.small);
    CHECK(hi == multiplier * ratio.large);

    // Clearance and canvas containment.
    const double min_sep = 2.0 * SceneGeometry::kDotRadius + SceneGeometry::kMargin;
    CHECK(min_pair_distance(scene) > min_sep - 1e-9);
    for (const auto& d : scene.dots) {
      CHECK(d.radius > 0);
      CHECK(d.x >= d.radius);
      CHECK(d.y >= d.radius);
      CHECK(d.x <= SceneGeometry::kCanvas - d.radius);
      CHECK(d.y <= SceneGeometry::kCanvas - d.radius);
    }
  }
}

TEST_CASE("sorted columns are class-pure with one x per column and fixed pitch") {
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    const DotScene scene =
        generate_scene(RatioPair{2, 3}, ImageType::ColumnPairsSorted, rng.coin(), rng);
    std::map<double, std::vector<const Dot*>> columns;
    for (const auto& d : scene.dots) columns[d.x].push_back(&d);
    REQUIRE(columns.size() == 2);
    for (auto& [x, dots] : columns) {
      const DotClass c = dots[0]->dot_class;
      std::vector<double> ys;
      for (const Dot* d : dots) {
        CHECK(d->dot_class == c);
        ys.push_back(d->y);
      }
      std::sort(ys.begin(), ys.end());
      for (size_t j = 1; j < ys.size(); ++j)
        CHECK(ys[j] - ys[j - 1] == doctest::Approx(SceneGeometry::kColumnPitchY));
    }
  }
}

TEST_CASE("mixed columns keep the column geometry but shuffle classes") {
  Rng rng(15);
  int impure_columns = 0;
  for (int i = 0; i < 200; ++i) {
    const DotScene scene =
        generate_scene(RatioPair{3, 4}, ImageType::ColumnPairsMixed, true, rng);
    std::map<double, std::set<int>> classes_by_x;
    for (const auto& d : scene.dots)
      classes_by_x[d.x].insert(static_cast<int>(d.dot_class));
    CHECK(classes_by_x.size() == 2);
    for (const auto& [x, classes] : classes_by_x)
      if (classes.size() > 1) ++impure_columns;
  }
  CHECK(impure_columns > 0);  // shuffling must actually mix classes
}

TEST_CASE("scattered pairs structure is recoverable for every ratio") {
  Rng rng(16);
  for (const RatioPair ratio : all_ratios()) {
    for (int i = 0; i < 25; ++i) {
      const DotScene scene =
          generate_scene(ratio, ImageType::ScatteredPairs, rng.coin(), rng);
      CHECK(count_contrast_pairs(scene) == std::min(scene.n_blue, scene.n_yellow));
    }
  }
}

TEST_CASE("scene generation is deterministic in the seed") {
  Rng a(77), b(77);
  const DotScene s1 = generate_scene(RatioPair{5, 6}, ImageType::ScatteredPairs, true, a);
  const DotScene s2 = generate_scene(RatioPair{5, 6}, ImageType::ScatteredPairs, true, b);
  REQUIRE(s1.dots.size() == s2.dots.size());
  for (size_t i = 0; i < s1.dots.size(); ++i) {
    CHECK(s1.dots[i].x == s2.dots[i].x);
    CHECK(s1.dots[i].y == s2.dots[i].y);
    CHECK(s1.dots[i].dot_class == s2.dots[i].dot_class);
  }
}

TEST_CASE("equal counts are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(generate_scene_with_counts(3, 3, ImageType::ScatteredRandom, rng),
                  ConfigError);
}
