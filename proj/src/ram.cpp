#include "mostv/ram.hpp"

#include <cmath>

#include "mostv/errors.hpp"

namespace mostv {

namespace {

template <class T>
T log_normal_pdf(T x, T mean, double sigma) {
  const double d = double(x) - double(mean);
  return static_cast<T>(-0.5 * d * d / (sigma * sigma) -
                        std::log(sigma) - 0.5 * std::log(2.0 * M_PI));
}

template <class T>
T clip1(T v) {
  return std::min(T(1), std::max(T(-1), v));
}

}  // namespace

template <class T>
RamLossParts<T> ram_loss(const std::vector<RamStepTrace<T>>& traces,
                         const std::vector<std::array<T, 2>>& sampled_locations,
                         const std::array<T, 2>& final_logits, int label,
                         double sigma) {
  if (traces.empty()) throw ConfigError("ram_loss needs at least one step");
  if (sampled_locations.size() != traces.size())
    throw ConfigError("one sampled location per step expected");

  RamLossParts<T> parts;
  const T max_v = std::max(final_logits[0], final_logits[1]);
  const T log_z = max_v + std::log(std::exp(final_logits[0] - max_v) +
                                   std::exp(final_logits[1] - max_v));
  parts.cross_entropy = log_z - final_logits[label];

  const int prediction = final_logits[1] > final_logits[0] ? 1 : 0;
  const T reward = prediction == label ? T(1) : T(0);

  for (size_t t = 0; t < traces.size(); ++t) {
    T log_pdf = 0;
    for (int d = 0; d < 2; ++d)
      log_pdf += log_normal_pdf(sampled_locations[t][d], traces[t].location_mean[d], sigma);
    const T advantage = reward - traces[t].baseline;
    parts.reinforce -= log_pdf * advantage;
    parts.baseline_loss += (traces[t].baseline - reward) * (traces[t].baseline - reward);
  }
  parts.total = parts.cross_entropy + parts.reinforce + parts.baseline_loss;
  return parts;
}

template <class T>
RamNet<T>::RamNet(const RamConfig& config)
    : config_(config),
      core_("core", config.feature_dim, config.hidden_dim),
      location_head_("location", config.hidden_dim, 2),
      action_head_("action", config.hidden_dim, 2),
      baseline_head_("baseline", config.hidden_dim, 1) {
  const int p = config.patch_size;
  int channels = config.n_patches;
  for (int i = 0; i < 3; ++i) {
    const std::string id = "glimpse.conv" + std::to_string(i + 1);
    what_net_.add(std::make_unique<Conv2d<T>>(id, channels, config.conv_filters[i],
                                              config.conv_kernels[i],
                                              config.conv_kernels[i] / 2));
    what_net_.add(std::make_unique<ReLU<T>>(id + ".relu"));
    channels = config.conv_filters[i];
  }
  what_net_.add(std::make_unique<Flatten<T>>("glimpse.flatten"));
  what_net_.add(std::make_unique<Dense<T>>("glimpse.what", channels * p * p,
                                           config.feature_dim));
  what_net_.add(std::make_unique<ReLU<T>>("glimpse.what.relu"));

  where_net_.add(std::make_unique<Dense<T>>("glimpse.where", 2, config.feature_dim));
  where_net_.add(std::make_unique<ReLU<T>>("glimpse.where.relu"));
}

template <class T>
void RamNet<T>::init(Rng& rng) {
  for (size_t i = 0; i < what_net_.size(); ++i) {
    if (auto* conv = dynamic_cast<Conv2d<T>*>(&what_net_.layer(i))) conv->init_he(rng);
    if (auto* dense = dynamic_cast<Dense<T>*>(&what_net_.layer(i))) dense->init_he(rng);
  }
  for (size_t i = 0; i < where_net_.size(); ++i)
    if (auto* dense = dynamic_cast<Dense<T>*>(&where_net_.layer(i))) dense->init_he(rng);
  core_.init(rng);
  location_head_.init_xavier(rng);
  action_head_.init_xavier(rng);
  baseline_head_.init_xavier(rng);
}

template <class T>
std::vector<Param<T>*> RamNet<T>::params() {
  std::vector<Param<T>*> out = what_net_.params();
  for (Param<T>* p : where_net_.params()) out.push_back(p);
  for (Param<T>* p : core_.params()) out.push_back(p);
  for (Param<T>* p : location_head_.params()) out.push_back(p);
  for (Param<T>* p : action_head_.params()) out.push_back(p);
  for (Param<T>* p : baseline_head_.params()) out.push_back(p);
  return out;
}

template <class T>
std::vector<RamStepTrace<T>> RamNet<T>::Rollout::traces_for(int sample) const {
  std::vector<RamStepTrace<T>> out;
  const int hidden = h_states.empty() ? 0 : h_states[0].dim(1);
  for (int t = 0; t < steps; ++t) {
    RamStepTrace<T> tr;
    tr.t = t + 1;
    tr.location_mean = loc_means[t][sample];
    tr.sampled_location = {clip1(loc_samples[t][sample][0]),
                           clip1(loc_samples[t][sample][1])};
    tr.action_logits = {logits[t].data[2 * sample], logits[t].data[2 * sample + 1]};
    tr.baseline = baselines[t].data[sample];
    const T* h = h_states[t].ptr() + static_cast<size_t>(sample) * hidden;
    const T* c = lstm_caches[t].c.ptr() + static_cast<size_t>(sample) * hidden;
    T hs = 0, hs2 = 0, cs = 0, cs2 = 0;
    for (int j = 0; j < hidden; ++j) {
      hs += h[j];
      hs2 += h[j] * h[j];
      cs += c[j];
      cs2 += c[j] * c[j];
    }
    tr.h_mean = hs / hidden;
    tr.h_rms = std::sqrt(hs2 / hidden);
    tr.c_mean = cs / hidden;
    tr.c_rms = std::sqrt(cs2 / hidden);
    out.push_back(tr);
  }
  return out;
}

template <class T>
std::vector<std::array<T, 2>> RamNet<T>::Rollout::samples_for(int sample) const {
  std::vector<std::array<T, 2>> out;
  for (int t = 0; t < steps; ++t) out.push_back(loc_samples[t][sample]);
  return out;
}

template <class T>
void RamNet<T>::forward(const Tensor<T>& images, Rollout& rollout, Rng& rng,
                        bool train,
                        const std::vector<std::vector<std::array<T, 2>>>* forced) const {
  const int n = images.dim(0);
  const int steps = config_.n_glimpses;
  rollout.batch = n;
  rollout.steps = steps;
  rollout.initial_locations.resize(n);
  rollout.loc_means.assign(steps, {});
  rollout.loc_samples.assign(steps, {});
  rollout.glimpses.resize(steps);
  rollout.what_traces.resize(steps);
  rollout.where_traces.resize(steps);
  rollout.features.resize(steps);
  rollout.lstm_caches.resize(steps);
  rollout.h_states.resize(steps);
  rollout.logits.resize(steps);
  rollout.baselines.resize(steps);

  if (forced && static_cast<int>(forced->size()) > steps)
    throw ConfigError("more forced locations than glimpse steps");

  // First glimpse location is random; later ones come from the policy.
  for (int i = 0; i < n; ++i)
    rollout.initial_locations[i] = {static_cast<T>(rng.uniform(-1.0, 1.0)),
                                    static_cast<T>(rng.uniform(-1.0, 1.0))};

  Tensor<T> h({n, config_.hidden_dim});
  Tensor<T> c({n, config_.hidden_dim});
  Tensor<T> where_in({n, 2});
  std::vector<std::array<T, 2>> glimpse_locs(n);

  for (int t = 0; t < steps; ++t) {
    if (forced && t < static_cast<int>(forced->size())) {
      glimpse_locs = (*forced)[t];
    } else if (t == 0) {
      glimpse_locs = rollout.initial_locations;
    } else {
      glimpse_locs = rollout.loc_samples[t - 1];  // unclipped; padding absorbs
    }

    extract_glimpse_batch(images, glimpse_locs, config_.patch_size, rollout.glimpses[t]);
    const Tensor<T>& what =
        what_net_.forward(rollout.glimpses[t], rollout.what_traces[t], train, &rng);

    for (int i = 0; i < n; ++i) {
      where_in.data[2 * i] = glimpse_locs[i][0];
      where_in.data[2 * i + 1] = glimpse_locs[i][1];
    }
    const Tensor<T>& where =
        where_net_.forward(where_in, rollout.where_traces[t], train, &rng);

    rollout.features[t].resize({n, config_.feature_dim});
    for (int64_t j = 0; j < rollout.features[t].numel(); ++j)
      rollout.features[t].data[j] = what.data[j] * where.data[j];

    core_.forward(rollout.features[t], h, c, rollout.lstm_caches[t]);
    rollout.h_states[t] = h;

    LayerCache<T> unused;
    action_head_.forward(h, rollout.logits[t], unused, train, &rng);
    baseline_head_.forward(h, rollout.baselines[t], unused, train, &rng);

    Tensor<T> loc_pre;
    location_head_.forward(h, loc_pre, unused, train, &rng);
    rollout.loc_means[t].resize(n);
    rollout.loc_samples[t].resize(n);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const T mean = std::tanh(loc_pre.data[2 * i + d]);
        rollout.loc_means[t][i][d] = mean;
        rollout.loc_samples[t][i][d] =
            static_cast<T>(rng.normal(double(mean), config_.location_std));
      }
    }
  }

  rollout.predictions.resize(n);
  const Tensor<T>& final_logits = rollout.logits.back();
  for (int i = 0; i < n; ++i)
    rollout.predictions[i] = predict_class(final_logits.ptr() + 2 * i, 2);
}

template <class T>
RamLossParts<T> RamNet<T>::loss_and_backward(Rollout& rollout,
                                             const std::vector<int>& labels,
                                             bool do_backward, bool use_baseline) {
  const int n = rollout.batch;
  const int steps = rollout.steps;
  const double sigma = config_.location_std;
  if (static_cast<int>(labels.size()) != n)
    throw ConfigError("one label per rollout sample expected");

  RamLossParts<T> parts;
  Tensor<T> dlogits;
  parts.cross_entropy = softmax_cross_entropy(rollout.final_logits(), labels,
                                              do_backward ? &dlogits : nullptr);

  std::vector<T> rewards(n);
  for (int i = 0; i < n; ++i)
    rewards[i] = rollout.predictions[i] == labels[i] ? T(1) : T(0);

  // Loss component values, averaged over the batch.
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < steps; ++t) {
      const T b = use_baseline ? rollout.baselines[t].data[i] : T(0);
      T log_pdf = 0;
      for (int d = 0; d < 2; ++d)
        log_pdf += log_normal_pdf(rollout.loc_samples[t][i][d],
                                  rollout.loc_means[t][i][d], sigma);
      parts.reinforce -= log_pdf * (rewards[i] - b) / T(n);
      if (use_baseline) {
        const T r = rollout.baselines[t].data[i] - rewards[i];
        parts.baseline_loss += r * r / T(n);
      }
    }
  }
  parts.total = parts.cross_entropy + parts.reinforce + parts.baseline_loss;
  if (!do_backward) return parts;

  // Location head: score-function gradient only, detached from the core.
  // Baseline head: squared-error gradient only, also detached.
  Tensor<T> dpre({n, 2});
  Tensor<T> dbase({n, 1});
  Tensor<T> dhead_in;  // discarded: heads do not backprop into the core state
  const Tensor<T> no_output;
  LayerCache<T> no_cache;
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < n; ++i) {
      const T b = use_baseline ? rollout.baselines[t].data[i] : T(0);
      const T advantage = rewards[i] - b;
      for (int d = 0; d < 2; ++d) {
        const T mean = rollout.loc_means[t][i][d];
        const T sample = rollout.loc_samples[t][i][d];
        // d/dmean of -log N(sample|mean,sigma) * advantage, batch-averaged;
        // then through tanh.
        const T dlogpdf_dmean = (sample - mean) / static_cast<T>(sigma * sigma);
        const T dmean = -dlogpdf_dmean * advantage / T(n);
        dpre.data[2 * i + d] = dmean * (T(1) - mean * mean);
      }
      dbase.data[i] = use_baseline
                          ? T(2) * (rollout.baselines[t].data[i] - rewards[i]) / T(n)
                          : T(0);
    }
    location_head_.backward(rollout.h_states[t], no_output, dpre, dhead_in, no_cache);
    if (use_baseline)
      baseline_head_.backward(rollout.h_states[t], no_output, dbase, dhead_in, no_cache);
  }

  // Supervised path: BPTT from the final-step cross-entropy only. Sampled
  // locations are constants here, so the where-path input grads are dropped.
  Tensor<T> dh({n, config_.hidden_dim});
  Tensor<T> dc;
  Tensor<T> dfeat, dwhat, dwhere, dglimpse, dwhere_in, dh_prev, dc_prev;
  dh.zero();
  for (int t = steps - 1; t >= 0; --t) {
    if (t == steps - 1)
      action_head_.backward(rollout.h_states[t], no_output, dlogits, dh, no_cache);
    core_.backward(dh, dc, rollout.lstm_caches[t], dfeat, dh_prev, dc_prev);

    const Tensor<T>& what = rollout.what_traces[t].acts.back();
    const Tensor<T>& where = rollout.where_traces[t].acts.back();
    dwhat.resize(dfeat.shape);
    dwhere.resize(dfeat.shape);
    for (int64_t j = 0; j < dfeat.numel(); ++j) {
      dwhat.data[j] = dfeat.data[j] * where.data[j];
      dwhere.data[j] = dfeat.data[j] * what.data[j];
    }
    what_net_.backward(rollout.what_traces[t], dwhat, dglimpse);
    where_net_.backward(rollout.where_traces[t], dwhere, dwhere_in);

    dh = dh_prev;
    dc = dc_prev;
  }
  return parts;
}

template <class T>
int RamNet<T>::predict_one(const Tensor<T>& image, Rng& rng,
                           std::vector<RamStepTrace<T>>* traces) const {
  Rollout rollout;
  forward(image, rollout, rng, false);
  if (traces) *traces = rollout.traces_for(0);
  return rollout.predictions[0];
}

#define MOSTV_RAM_INSTANTIATE(T)                                              \
  template struct RamStepTrace<T>;                                            \
  template struct RamLossParts<T>;                                            \
  template RamLossParts<T> ram_loss<T>(const std::vector<RamStepTrace<T>>&,   \
                                       const std::vector<std::array<T, 2>>&,  \
                                       const std::array<T, 2>&, int, double); \
  template class RamNet<T>;

MOSTV_RAM_INSTANTIATE(float)
MOSTV_RAM_INSTANTIATE(double)
#undef MOSTV_RAM_INSTANTIATE

}  // namespace mostv
