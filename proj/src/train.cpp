#include "mostv/train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "mostv/csv.hpp"
#include "mostv/errors.hpp"

namespace mostv {

TrainConfig TrainConfig::cnn_defaults(int duration_level) {
  TrainConfig c;
  c.family = "cnn";
  c.duration_level = duration_level;
  c.learning_rate = 1e-4;
  c.max_epochs = 40;
  c.eval_every = 1;
  return c;
}

TrainConfig TrainConfig::ram_defaults(int n_glimpses) {
  TrainConfig c;
  c.family = "ram";
  c.duration_level = n_glimpses;
  c.learning_rate = 1e-5;
  c.max_epochs = 200;
  c.eval_every = 2;
  return c;
}

void write_curve_csv(const LearningCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write curve: " + path);
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& p : curve.points)
    out << p.epoch << ',' << p.train_loss << ',' << p.val_loss << ',' << p.val_acc << "\n";
}

LearningCurve read_curve_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  LearningCurve curve;
  const int ce = table.column("epoch"), ct = table.column("train_loss");
  const int cv = table.column("val_loss"), ca = table.column("val_acc");
  for (const auto& row : table.rows)
    curve.points.push_back({std::stoi(row[ce]), std::stod(row[ct]),
                            std::stod(row[cv]), std::stod(row[ca])});
  return curve;
}

void write_trials_csv(const std::vector<TrialResult>& trials, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trials: " + path);
  out << "model_id,duration,image_path,image_type,ratio_small,ratio_large,"
         "total_dots,abs_diff,truth,predicted,correct\n";
  for (const auto& t : trials)
    out << t.model_id << ',' << t.duration_level << ',' << t.image_path << ','
        << to_string(t.image_type) << ',' << t.ratio.small << ',' << t.ratio.large
        << ',' << t.total_dots << ',' << t.abs_diff << ','
        << (t.truth ? "true" : "false") << ',' << (t.predicted ? "true" : "false")
        << ',' << (t.correct ? 1 : 0) << "\n";
}

std::vector<TrialResult> read_trials_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  std::vector<TrialResult> out;
  const int c_model = table.column("model_id"), c_dur = table.column("duration");
  const int c_path = table.column("image_path"), c_type = table.column("image_type");
  const int c_small = table.column("ratio_small"), c_large = table.column("ratio_large");
  const int c_total = table.column("total_dots"), c_abs = table.column("abs_diff");
  const int c_truth = table.column("truth"), c_pred = table.column("predicted");
  const int c_corr = table.column("correct");
  for (const auto& row : table.rows) {
    TrialResult t;
    t.model_id = row[c_model];
    t.duration_level = std::stoi(row[c_dur]);
    t.image_path = row[c_path];
    t.image_type = image_type_from_string(row[c_type]);
    t.ratio = RatioPair{std::stoi(row[c_small]), std::stoi(row[c_large])};
    t.total_dots = std::stoi(row[c_total]);
    t.abs_diff = std::stoi(row[c_abs]);
    t.truth = row[c_truth] == "true";
    t.predicted = row[c_pred] == "true";
    t.correct = row[c_corr] == "1";
    out.push_back(std::move(t));
  }
  return out;
}

Tensor<float> make_image_batch(const std::vector<Image>& images,
                               const std::vector<int>& indices, int from, int count) {
  const int h = images[0].height, w = images[0].width;
  Tensor<float> batch({count, 1, h, w});
  for (int i = 0; i < count; ++i) {
    const Image& img = images[static_cast<size_t>(indices[from + i])];
    float* dst = batch.ptr() + static_cast<size_t>(i) * h * w;
    for (size_t p = 0; p < img.pixels.size(); ++p)
      dst[p] = static_cast<float>(img.pixels[p]) / 255.0f;
  }
  return batch;
}

namespace {

std::vector<int> iota_indices(size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::string model_id_for(const TrainConfig& config) {
  return (config.family == "cnn" ? "vgg" : "ram") + std::to_string(config.duration_level);
}

// Validation pass for the CNN: mean cross-entropy and accuracy, eval mode.
std::pair<double, double> cnn_validate(VggNet<float>& net, const LoadedSplit& val,
                                       int batch_size) {
  const auto idx = iota_indices(val.images.size());
  double loss_sum = 0;
  int64_t correct = 0;
  for (int from = 0; from < static_cast<int>(idx.size()); from += batch_size) {
    const int count = std::min<int>(batch_size, static_cast<int>(idx.size()) - from);
    Tensor<float> batch = make_image_batch(val.images, idx, from, count);
    const Tensor<float>& logits = net.forward(batch, false, nullptr);
    std::vector<int> labels(count);
    for (int i = 0; i < count; ++i) labels[i] = val.labels[idx[from + i]];
    loss_sum += softmax_cross_entropy<float>(logits, labels, nullptr) * count;
    const auto preds = net.predictions();
    for (int i = 0; i < count; ++i)
      if (preds[i] == labels[i]) ++correct;
  }
  return {loss_sum / static_cast<double>(idx.size()),
          static_cast<double>(correct) / static_cast<double>(idx.size())};
}

// Validation for the attention model: cross-entropy of the final step only
// (the reinforce and baseline terms are training signals, not fit measures).
std::pair<double, double> ram_validate(const RamNet<float>& net, const LoadedSplit& val,
                                       int batch_size, uint64_t seed) {
  const auto idx = iota_indices(val.images.size());
  Rng rng(seed);
  typename RamNet<float>::Rollout rollout;
  double loss_sum = 0;
  int64_t correct = 0;
  for (int from = 0; from < static_cast<int>(idx.size()); from += batch_size) {
    const int count = std::min<int>(batch_size, static_cast<int>(idx.size()) - from);
    Tensor<float> batch = make_image_batch(val.images, idx, from, count);
    net.forward(batch, rollout, rng, false);
    std::vector<int> labels(count);
    for (int i = 0; i < count; ++i) labels[i] = val.labels[idx[from + i]];
    loss_sum += softmax_cross_entropy<float>(rollout.final_logits(), labels, nullptr) * count;
    for (int i = 0; i < count; ++i)
      if (rollout.predictions[i] == labels[i]) ++correct;
  }
  return {loss_sum / static_cast<double>(idx.size()),
          static_cast<double>(correct) / static_cast<double>(idx.size())};
}

}  // namespace

TrainOutcome train_cnn(const DatasetManifest& manifest, const std::string& data_root,
                       const TrainConfig& config) {
  if (config.family != "cnn") throw ConfigError("train_cnn got a non-cnn config");
  const LoadedSplit train = load_split(manifest, data_root, Split::Train);
  const LoadedSplit val = load_split(manifest, data_root, Split::Val);

  const CnnConfig net_config =
      config.cnn_config ? *config.cnn_config : build_vgg_config(config.duration_level);
  VggNet<float> net(net_config);
  Rng init_rng(hash_seed(config.seed, {0x1471}));
  net.init(init_rng);
  Adam<float> opt(net.params(), config.learning_rate);
  Rng train_rng(hash_seed(config.seed, {0x7261}));

  TrainOutcome outcome;
  outcome.best.model_id = model_id_for(config);
  outcome.best.family = "cnn";
  outcome.best.duration_level = config.duration_level;
  outcome.best.cnn_config = net_config;

  EarlyStopper stopper(config.patience_epochs);
  auto indices = iota_indices(train.images.size());
  Tensor<float> dlogits;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    train_rng.shuffle(indices);
    double loss_sum = 0;
    int64_t seen = 0;
    for (int from = 0; from < static_cast<int>(indices.size()); from += config.batch_size) {
      const int count = std::min<int>(config.batch_size,
                                      static_cast<int>(indices.size()) - from);
      Tensor<float> batch = make_image_batch(train.images, indices, from, count);
      std::vector<int> labels(count);
      for (int i = 0; i < count; ++i) labels[i] = train.labels[indices[from + i]];

      const Tensor<float>& logits = net.forward(batch, true, &train_rng);
      opt.zero_grad();
      const float loss = softmax_cross_entropy<float>(logits, labels, &dlogits);
      net.backward(dlogits);
      if (config.grad_clip_norm > 0) opt.clip_grad_norm(config.grad_clip_norm);
      opt.step();
      loss_sum += static_cast<double>(loss) * count;
      seen += count;
    }

    const auto [val_loss, val_acc] = cnn_validate(net, val, config.batch_size);
    outcome.curve.points.push_back(
        {epoch, loss_sum / static_cast<double>(seen), val_loss, val_acc});
    const bool stop = stopper.observe(epoch, val_loss);
    if (stopper.improved()) {
      outcome.best.epoch = epoch;
      outcome.best.val_loss = val_loss;
      arrays_from_params(net.params(), &outcome.best.arrays);
    }
    std::fprintf(stderr, "[train %s] epoch %d/%d train_loss %.4f val_loss %.4f val_acc %.4f%s\n",
                 outcome.best.model_id.c_str(), epoch, config.max_epochs,
                 loss_sum / static_cast<double>(seen), val_loss, val_acc,
                 stopper.improved() ? " *" : "");
    outcome.stopped_epoch = epoch;
    if (stop) break;
  }
  if (outcome.best.arrays.empty())
    throw DataError("training never produced a checkpoint");
  return outcome;
}

TrainOutcome train_ram(const DatasetManifest& manifest, const std::string& data_root,
                       const TrainConfig& config) {
  if (config.family != "ram") throw ConfigError("train_ram got a non-ram config");
  const LoadedSplit train = load_split(manifest, data_root, Split::Train);
  const LoadedSplit val = load_split(manifest, data_root, Split::Val);

  RamConfig net_config = config.ram_config ? *config.ram_config : RamConfig{};
  if (!config.ram_config) net_config.n_glimpses = config.duration_level;
  RamNet<float> net(net_config);
  Rng init_rng(hash_seed(config.seed, {0x1471}));
  net.init(init_rng);
  Adam<float> opt(net.params(), config.learning_rate);
  Rng train_rng(hash_seed(config.seed, {0x7261}));

  TrainOutcome outcome;
  outcome.best.model_id = model_id_for(config);
  outcome.best.family = "ram";
  outcome.best.duration_level = config.duration_level;
  outcome.best.ram_config = net_config;

  EarlyStopper stopper(config.patience_epochs);
  auto indices = iota_indices(train.images.size());
  typename RamNet<float>::Rollout rollout;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    train_rng.shuffle(indices);
    double loss_sum = 0;
    int64_t seen = 0;
    for (int from = 0; from < static_cast<int>(indices.size()); from += config.batch_size) {
      const int count = std::min<int>(config.batch_size,
                                      static_cast<int>(indices.size()) - from);
      Tensor<float> batch = make_image_batch(train.images, indices, from, count);
      std::vector<int> labels(count);
      for (int i = 0; i < count; ++i) labels[i] = train.labels[indices[from + i]];

      opt.zero_grad();
      double batch_loss = 0;
      const int mc = std::max(1, config.mc_samples);
      for (int s = 0; s < mc; ++s) {
        net.forward(batch, rollout, train_rng, true);
        const auto parts = net.loss_and_backward(rollout, labels, true, config.ram_baseline);
        batch_loss += static_cast<double>(parts.total) / mc;
      }
      if (mc > 1) opt.scale_grads(1.0 / mc);
      if (config.grad_clip_norm > 0) opt.clip_grad_norm(config.grad_clip_norm);
      opt.step();
      loss_sum += batch_loss * count;
      seen += count;
    }

    outcome.stopped_epoch = epoch;
    if (epoch % config.eval_every != 0 && epoch != config.max_epochs) continue;

    const auto [val_loss, val_acc] =
        ram_validate(net, val, config.batch_size, hash_seed(config.seed, {0x7641, static_cast<uint64_t>(epoch)}));
    outcome.curve.points.push_back(
        {epoch, loss_sum / static_cast<double>(seen), val_loss, val_acc});
    const bool stop = stopper.observe(epoch, val_loss);
    if (stopper.improved()) {
      outcome.best.epoch = epoch;
      outcome.best.val_loss = val_loss;
      arrays_from_params(net.params(), &outcome.best.arrays);
    }
    std::fprintf(stderr, "[train %s] epoch %d/%d train_loss %.4f val_loss %.4f val_acc %.4f%s\n",
                 outcome.best.model_id.c_str(), epoch, config.max_epochs,
                 loss_sum / static_cast<double>(seen), val_loss, val_acc,
                 stopper.improved() ? " *" : "");
    if (stop) break;
  }
  if (outcome.best.arrays.empty())
    throw DataError("training never produced a checkpoint");
  return outcome;
}

std::vector<TrialResult> evaluate_records(
    const std::vector<const StimulusRecord*>& records, const std::string& model_id,
    int duration_level, const std::function<bool(const StimulusRecord&)>& predict) {
  std::vector<TrialResult> out;
  out.reserve(records.size());
  for (const StimulusRecord* rec : records) {
    TrialResult t;
    t.model_id = model_id;
    t.duration_level = duration_level;
    t.image_path = rec->image_path;
    t.image_type = rec->image_type;
    t.ratio = rec->ratio;
    t.total_dots = rec->total_dots;
    t.abs_diff = rec->abs_diff;
    t.truth = rec->truth;
    t.predicted = predict(*rec);
    t.correct = t.predicted == t.truth;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrialResult> evaluate(const Checkpoint& ckpt, const DatasetManifest& manifest,
                                  const std::string& data_root, Split split) {
  const LoadedSplit data = load_split(manifest, data_root, split);
  const int batch_size = 64;
  const auto idx = iota_indices(data.images.size());
  std::vector<uint8_t> predictions(data.images.size(), 0);

  if (ckpt.family == "cnn") {
    VggNet<float> net(ckpt.cnn_config);
    params_from_arrays(ckpt.arrays, net.params());
    for (int from = 0; from < static_cast<int>(idx.size()); from += batch_size) {
      const int count = std::min<int>(batch_size, static_cast<int>(idx.size()) - from);
      Tensor<float> batch = make_image_batch(data.images, idx, from, count);
      net.forward(batch, false, nullptr);
      const auto preds = net.predictions();
      for (int i = 0; i < count; ++i)
        predictions[static_cast<size_t>(from + i)] = static_cast<uint8_t>(preds[i]);
    }
  } else if (ckpt.family == "ram") {
    RamNet<float> net(ckpt.ram_config);
    params_from_arrays(ckpt.arrays, net.params());
    // Fixed evaluation stream: seed derives from the glimpse count and split.
    Rng rng(hash_seed(0x6d6f7374ull, {static_cast<uint64_t>(ckpt.duration_level),
                                      static_cast<uint64_t>(split)}));
    typename RamNet<float>::Rollout rollout;
    for (int from = 0; from < static_cast<int>(idx.size()); from += batch_size) {
      const int count = std::min<int>(batch_size, static_cast<int>(idx.size()) - from);
      Tensor<float> batch = make_image_batch(data.images, idx, from, count);
      net.forward(batch, rollout, rng, false);
      for (int i = 0; i < count; ++i)
        predictions[static_cast<size_t>(from + i)] = static_cast<uint8_t>(rollout.predictions[i]);
    }
  } else {
    throw CheckpointError("unknown model family: " + ckpt.family);
  }

  size_t cursor = 0;
  return evaluate_records(data.records, ckpt.model_id, ckpt.duration_level,
                          [&](const StimulusRecord&) { return predictions[cursor++] != 0; });
}

}  // namespace mostv
