#ifndef MOSTV_CONFIG_HPP_
#define MOSTV_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "mostv/dataset.hpp"
#include "mostv/train.hpp"

namespace mostv {

// Per-family training knobs as stored in the config file. max_epochs is the
// paper-scale cap; epoch_cap (optional) is an absolute ceiling applied after
// --scale, for budgeted runs.
struct FamilyTrainSettings {
  double learning_rate = 1e-4;
  int max_epochs = 40;
  int batch_size = 64;
  int patience_epochs = 10;
  int eval_every = 1;
  double grad_clip_norm = 5.0;
  std::optional<int> epoch_cap;
  // Attention-model extras; ignored for the CNN family.
  bool baseline = true;
  double location_std = 0.03;
  int mc_samples = 1;
};

struct ExperimentConfig {
  int schema_version = 1;
  uint64_t seed = 0;
  std::string out_dir = "out";
  std::optional<std::string> data_dir;  // defaults to out_dir/dataset
  double scale = 1.0;
  int train_count = 18000;
  int val_count = 3600;
  int test_count = 3600;
  std::vector<std::string> models = {"vgg7", "vgg9",  "vgg11", "vgg13",
                                     "ram4", "ram8", "ram16", "ram24"};
  FamilyTrainSettings cnn;
  FamilyTrainSettings ram;
  double invariance_threshold = 0.995;

  ExperimentConfig();  // family defaults

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;  // canonical form (sorted keys)

  // Scale-resolved values. Counts stay multiples of the 72 balance cells.
  DatasetConfig scaled_dataset() const;
  int scaled_max_epochs(const std::string& family) const;
  TrainConfig train_config_for(const std::string& model_id) const;
  std::string effective_data_dir() const;

  void validate() const;
};

// "vgg7" -> ("cnn", 7); "ram16" -> ("ram", 16).
std::pair<std::string, int> parse_model_id(const std::string& model_id);

}  // namespace mostv

#endif  // MOSTV_CONFIG_HPP_
