#ifndef MOSTV_DATASET_HPP_
#define MOSTV_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mostv/image.hpp"
#include "mostv/stimuli.hpp"

namespace mostv {

enum class Split : int { Train = 0, Val = 1, Test = 2 };
const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct StimulusRecord {
  std::string image_path;  // relative to the dataset root
  Split split = Split::Train;
  ImageType image_type = ImageType::ScatteredRandom;
  RatioPair ratio;
  int multiplier = 1;
  int n_blue = 0;
  int n_yellow = 0;
  int total_dots = 0;
  int abs_diff = 0;
  bool truth = false;
  uint64_t seed = 0;
};

struct DatasetManifest {
  std::vector<StimulusRecord> records;
  uint64_t global_seed = 0;
  GrayLevels gray_levels;

  std::vector<const StimulusRecord*> split_records(Split s) const;
};

struct DatasetConfig {
  int train_count = 18000;
  int val_count = 3600;
  int test_count = 3600;
  uint64_t seed = 0;
};

// Writes PNGs under {root}/{split}/{image_type}/ plus {root}/manifest.csv.
// Counts must be divisible by the 72 (ratio x type x truth) cells per split.
// Regeneration from the same seed is byte-identical.
DatasetManifest generate_dataset(const DatasetConfig& config, const std::string& root_dir);

// Rebuilds the scene a manifest row was rendered from (same seed, same stream).
DotScene scene_for_record(const StimulusRecord& record);

void write_manifest_csv(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest_csv(const std::string& path);

// All of one split decoded into memory, in manifest order.
struct LoadedSplit {
  std::vector<Image> images;
  std::vector<uint8_t> labels;  // 1 = "most dots are blue" true
  std::vector<const StimulusRecord*> records;
};
LoadedSplit load_split(const DatasetManifest& manifest, const std::string& root_dir, Split split);

}  // namespace mostv

#endif  // MOSTV_DATASET_HPP_
