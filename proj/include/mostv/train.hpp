#ifndef MOSTV_TRAIN_HPP_
#define MOSTV_TRAIN_HPP_

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mostv/checkpoint.hpp"
#include "mostv/dataset.hpp"
#include "mostv/ram.hpp"
#include "mostv/vgg.hpp"

namespace mostv {

struct TrainConfig {
  std::string family;       // "cnn" | "ram"
  int duration_level = 0;   // depth (7/9/11/13) or glimpses (4/8/16/24)
  double learning_rate = 1e-4;
  int max_epochs = 40;
  int patience_epochs = 10;  // epochs without val-loss improvement
  int eval_every = 1;        // epochs between validation passes
  int batch_size = 64;
  double grad_clip_norm = 5.0;  // 0 disables clipping
  bool ram_baseline = true;
  int mc_samples = 1;  // trajectories per image per update (attention model)
  uint64_t seed = 0;
  std::optional<CnnConfig> cnn_config;  // layout override for reduced variants
  std::optional<RamConfig> ram_config;

  static TrainConfig cnn_defaults(int duration_level);
  static TrainConfig ram_defaults(int n_glimpses);
};

struct CurvePoint {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
};

void write_curve_csv(const LearningCurve& curve, const std::string& path);
LearningCurve read_curve_csv(const std::string& path);

struct TrialResult {
  std::string model_id;
  int duration_level = 0;
  std::string image_path;
  ImageType image_type = ImageType::ScatteredRandom;
  RatioPair ratio;
  int total_dots = 0;
  int abs_diff = 0;
  bool truth = false;
  bool predicted = false;
  bool correct = false;
};

void write_trials_csv(const std::vector<TrialResult>& trials, const std::string& path);
std::vector<TrialResult> read_trials_csv(const std::string& path);

// Tracks best validation loss; answers whether the patience window expired.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience_epochs) : patience_(patience_epochs) {}

  // Returns true when training should halt after this observation.
  bool observe(int epoch, double val_loss) {
    improved_ = val_loss < best_loss_;
    if (improved_) {
      best_loss_ = val_loss;
      best_epoch_ = epoch;
    }
    return epoch - best_epoch_ >= patience_;
  }

  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  double best_loss_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  bool improved_ = false;
};

struct TrainOutcome {
  Checkpoint best;
  LearningCurve curve;
  int stopped_epoch = 0;
};

TrainOutcome train_cnn(const DatasetManifest& manifest, const std::string& data_root,
                       const TrainConfig& config);
TrainOutcome train_ram(const DatasetManifest& manifest, const std::string& data_root,
                       const TrainConfig& config);

// One TrialResult per stimulus of the split. The attention model rolls out
// under a fixed seed derived from (duration level, split), so results are
// reproducible and independent of when evaluation runs.
std::vector<TrialResult> evaluate(const Checkpoint& ckpt, const DatasetManifest& manifest,
                                  const std::string& data_root, Split split);

// Evaluation driven by an arbitrary predictor; shared by evaluate() and by
// tests that use stub predictors.
std::vector<TrialResult> evaluate_records(
    const std::vector<const StimulusRecord*>& records, const std::string& model_id,
    int duration_level, const std::function<bool(const StimulusRecord&)>& predict);

// {B, 1, H, W} float batch scaled to [0, 1].
Tensor<float> make_image_batch(const std::vector<Image>& images,
                               const std::vector<int>& indices, int from, int count);

}  // namespace mostv

#endif  // MOSTV_TRAIN_HPP_
