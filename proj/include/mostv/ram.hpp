#ifndef MOSTV_RAM_HPP_
#define MOSTV_RAM_HPP_

#include <array>
#include <optional>
#include <vector>

#include "mostv/glimpse.hpp"
#include "mostv/nn.hpp"

namespace mostv {

template <class T>
struct RamStepTrace {
  int t = 0;                                   // 1-based glimpse step
  std::array<T, 2> location_mean = {0, 0};     // tanh outputs, in (-1, 1)
  std::array<T, 2> sampled_location = {0, 0};  // recorded clipped to [-1, 1]
  std::array<T, 2> action_logits = {0, 0};
  T baseline = 0;
  // Core-state summary: mean and RMS of h and c.
  T h_mean = 0, h_rms = 0, c_mean = 0, c_rms = 0;
};

template <class T>
struct RamLossParts {
  T total = 0;
  T cross_entropy = 0;
  T reinforce = 0;
  T baseline_loss = 0;
};

// Hybrid loss for one episode. Reward is 1 iff the final prediction matches
// the label. The reinforce component is -sum_t log N(sample_t | mean_t, sigma)
// * (R - b_t); sampled_locations are the unclipped draws paired with each
// step's mean. total = cross_entropy + reinforce + baseline_loss exactly.
template <class T>
RamLossParts<T> ram_loss(const std::vector<RamStepTrace<T>>& traces,
                         const std::vector<std::array<T, 2>>& sampled_locations,
                         const std::array<T, 2>& final_logits, int label,
                         double sigma);

// Recurrent attention classifier: glimpse network (what x where), LSTM core,
// and per-step location / action / baseline heads.
template <class T>
class RamNet {
 public:
  explicit RamNet(const RamConfig& config);

  void init(Rng& rng);
  std::vector<Param<T>*> params();
  const RamConfig& config() const { return config_; }

  struct Rollout {
    int batch = 0;
    int steps = 0;
    std::vector<std::array<T, 2>> initial_locations;       // per sample
    std::vector<std::vector<std::array<T, 2>>> loc_means;   // [step][sample]
    std::vector<std::vector<std::array<T, 2>>> loc_samples; // unclipped
    std::vector<Tensor<T>> glimpses;                         // per step
    std::vector<typename Sequential<T>::Trace> what_traces;
    std::vector<typename Sequential<T>::Trace> where_traces;
    std::vector<Tensor<T>> features;   // what (.) where, {N, F}
    std::vector<typename LSTMCell<T>::StepCache> lstm_caches;
    std::vector<Tensor<T>> h_states;   // post-step hidden, {N, H}
    std::vector<Tensor<T>> logits;     // {N, 2}
    std::vector<Tensor<T>> baselines;  // {N, 1}
    std::vector<int> predictions;      // per sample, final step only

    const Tensor<T>& final_logits() const { return logits.back(); }
    // Per-sample step traces (records clipped locations).
    std::vector<RamStepTrace<T>> traces_for(int sample) const;
    std::vector<std::array<T, 2>> samples_for(int sample) const;
  };

  // Runs the episode. The first glimpse location is uniform on [-1,1]^2;
  // later glimpses use the previous step's sampled location, unclipped.
  // forced_locations overrides the glimpse input location for a prefix of
  // the steps (up to all of them); forcing every step makes the supervised
  // path a deterministic function of the weights.
  void forward(const Tensor<T>& images, Rollout& rollout, Rng& rng, bool train,
               const std::vector<std::vector<std::array<T, 2>>>* forced_locations = nullptr) const;

  // Mean hybrid loss over the batch. Backward accumulates: cross-entropy
  // grads into glimpse/core/action parameters, score-function grads into the
  // location head only, and squared-error grads into the baseline head only.
  RamLossParts<T> loss_and_backward(Rollout& rollout, const std::vector<int>& labels,
                                    bool do_backward, bool use_baseline = true);

  // Single-stimulus convenience used by evaluation and tests.
  int predict_one(const Tensor<T>& image, Rng& rng,
                  std::vector<RamStepTrace<T>>* traces = nullptr) const;

 private:
  RamConfig config_;
  Sequential<T> what_net_;
  Sequential<T> where_net_;
  LSTMCell<T> core_;
  Dense<T> location_head_;
  Dense<T> action_head_;
  Dense<T> baseline_head_;
};

}  // namespace mostv

#endif  // MOSTV_RAM_HPP_
