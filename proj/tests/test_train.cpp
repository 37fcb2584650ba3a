#include <doctest.h>

#include <filesystem>

#include "mostv/checkpoint.hpp"
#include "mostv/errors.hpp"
#include "mostv/train.hpp"

using namespace mostv;
namespace fs = std::filesystem;

namespace {

// Shared 72/72/72 dataset, generated once per process.
struct Fixture {
  fs::path dir;
  DatasetManifest manifest;
};

const Fixture& fixture() {
  static Fixture f = [] {
    Fixture out;
    out.dir = fs::temp_directory_path() / "mostv_train_fixture";
    fs::remove_all(out.dir);
    fs::create_directories(out.dir);
    DatasetConfig config;
    config.train_count = 72;
    config.val_count = 72;
    config.test_count = 72;
    config.seed = 2024;
    out.manifest = generate_dataset(config, out.dir.string());
    return out;
  }();
  return f;
}

CnnConfig tiny_cnn() {
  CnnConfig c;
  c.duration_level = 7;
  c.convs = {{4, true}, {6, true}, {8, false}, {8, true}};
  c.fc_widths = {16, 8, 2};
  c.dropout = 0.25;
  c.input_size = 128;
  c.input_channels = 1;
  return c;
}

RamConfig tiny_ram() {
  RamConfig c;
  c.n_glimpses = 4;
  c.patch_size = 8;
  c.conv_filters = {4, 4, 8};
  c.conv_kernels = {5, 3, 3};
  c.feature_dim = 16;
  c.hidden_dim = 32;
  c.location_std = 0.03;
  return c;
}

}  // namespace

TEST_CASE("early stopper tracks the best epoch and the patience window") {
  EarlyStopper stopper(10);
  CHECK_FALSE(stopper.observe(1, 1.00));
  CHECK(stopper.improved());
  CHECK_FALSE(stopper.observe(2, 0.90));
  CHECK(stopper.improved());
  for (int epoch = 3; epoch < 12; ++epoch) {
    CHECK_FALSE(stopper.observe(epoch, 0.95));
    CHECK_FALSE(stopper.improved());
  }
  // Ten epochs beyond the best one: halt, best checkpoint strictly earlier.
  CHECK(stopper.observe(12, 0.95));
  CHECK(stopper.best_epoch() == 2);
  CHECK(stopper.best_epoch() < 12);
  CHECK(stopper.best_loss() == doctest::Approx(0.90));
}

TEST_CASE("toy cnn training: loss decreases over the first three epochs") {
  const Fixture& f = fixture();
  TrainConfig config = TrainConfig::cnn_defaults(7);
  config.cnn_config = tiny_cnn();
  config.max_epochs = 3;
  config.batch_size = 16;
  config.seed = 5;
  const TrainOutcome outcome = train_cnn(f.manifest, f.dir.string(), config);
  REQUIRE(outcome.curve.points.size() == 3);
  CHECK(outcome.curve.points[1].train_loss < outcome.curve.points[0].train_loss);
  CHECK(outcome.curve.points[2].train_loss < outcome.curve.points[1].train_loss);
  CHECK(outcome.best.epoch >= 1);
  CHECK_FALSE(outcome.best.arrays.empty());
}

TEST_CASE("toy ram training: curve sampled every 2 epochs, loss trends down") {
  const Fixture& f = fixture();
  TrainConfig config = TrainConfig::ram_defaults(4);
  config.ram_config = tiny_ram();
  config.max_epochs = 10;
  config.batch_size = 16;
  config.seed = 11;
  const TrainOutcome outcome = train_ram(f.manifest, f.dir.string(), config);
  REQUIRE(outcome.curve.points.size() == 5);
  for (size_t i = 0; i < outcome.curve.points.size(); ++i)
    CHECK(outcome.curve.points[i].epoch == static_cast<int>(2 * (i + 1)));
  CHECK(outcome.curve.points[4].train_loss < outcome.curve.points[0].train_loss);
}

TEST_CASE("stub predictors hit the exact accuracy anchors") {
  const Fixture& f = fixture();
  const auto records = f.manifest.split_records(Split::Test);
  REQUIRE(records.size() == 72);

  const auto perfect = evaluate_records(records, "stub", 0,
                                        [](const StimulusRecord& r) { return r.truth; });
  int correct = 0;
  for (const auto& t : perfect) correct += t.correct ? 1 : 0;
  CHECK(correct == 72);

  const auto inverted = evaluate_records(records, "stub", 0,
                                         [](const StimulusRecord& r) { return !r.truth; });
  correct = 0;
  for (const auto& t : inverted) correct += t.correct ? 1 : 0;
  CHECK(correct == 0);

  // The split is truth-balanced by construction, so constant "true" is 0.5.
  const auto constant = evaluate_records(records, "stub", 0,
                                         [](const StimulusRecord&) { return true; });
  correct = 0;
  for (const auto& t : constant) correct += t.correct ? 1 : 0;
  CHECK(correct == 36);
}

TEST_CASE("checkpoints round-trip and reject mismatched parameters") {
  const fs::path dir = fs::temp_directory_path() / "mostv_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.bin").string();

  VggNet<float> net(tiny_cnn());
  Rng rng(5);
  net.init(rng);

  Checkpoint ckpt;
  ckpt.model_id = "vgg7";
  ckpt.family = "cnn";
  ckpt.duration_level = 7;
  ckpt.epoch = 3;
  ckpt.val_loss = 0.25;
  ckpt.cnn_config = tiny_cnn();
  arrays_from_params(net.params(), &ckpt.arrays);
  save_checkpoint(ckpt, path);

  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model_id == "vgg7");
  CHECK(back.epoch == 3);
  CHECK(back.val_loss == doctest::Approx(0.25));
  REQUIRE(back.arrays.size() == ckpt.arrays.size());
  for (size_t i = 0; i < back.arrays.size(); ++i) {
    CHECK(back.arrays[i].first == ckpt.arrays[i].first);
    CHECK(back.arrays[i].second.data == ckpt.arrays[i].second.data);
  }

  VggNet<float> same(tiny_cnn());
  params_from_arrays(back.arrays, same.params());

  // A different layout must be rejected, not silently accepted.
  CnnConfig other = tiny_cnn();
  other.fc_widths = {12, 8, 2};
  VggNet<float> wrong(other);
  CHECK_THROWS_AS(params_from_arrays(back.arrays, wrong.params()), CheckpointError);

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.bin").string()), CheckpointError);
  fs::remove_all(dir);
}

TEST_CASE("evaluate produces one joined trial per test stimulus") {
  const Fixture& f = fixture();
  TrainConfig config = TrainConfig::cnn_defaults(7);
  config.cnn_config = tiny_cnn();
  config.max_epochs = 1;
  config.batch_size = 16;
  config.seed = 13;
  const TrainOutcome outcome = train_cnn(f.manifest, f.dir.string(), config);

  const auto trials = evaluate(outcome.best, f.manifest, f.dir.string(), Split::Test);
  const auto records = f.manifest.split_records(Split::Test);
  REQUIRE(trials.size() == records.size());
  for (size_t i = 0; i < trials.size(); ++i) {
    CHECK(trials[i].image_path == records[i]->image_path);
    CHECK(trials[i].truth == records[i]->truth);
    CHECK(trials[i].correct == (trials[i].predicted == trials[i].truth));
    CHECK(trials[i].model_id == "vgg7");
  }
}

TEST_CASE("seeded training is reproducible end to end") {
  const Fixture& f = fixture();
  TrainConfig config = TrainConfig::cnn_defaults(7);
  config.cnn_config = tiny_cnn();
  config.max_epochs = 2;
  config.batch_size = 16;
  config.seed = 99;
  const TrainOutcome a = train_cnn(f.manifest, f.dir.string(), config);
  const TrainOutcome b = train_cnn(f.manifest, f.dir.string(), config);
  REQUIRE(a.best.arrays.size() == b.best.arrays.size());
  for (size_t i = 0; i < a.best.arrays.size(); ++i)
    CHECK(a.best.arrays[i].second.data == b.best.arrays[i].second.data);
  REQUIRE(a.curve.points.size() == b.curve.points.size());
  for (size_t i = 0; i < a.curve.points.size(); ++i) {
    CHECK(a.curve.points[i].train_loss == b.curve.points[i].train_loss);
    CHECK(a.curve.points[i].val_loss == b.curve.points[i].val_loss);
  }
}

TEST_CASE("ram evaluation is reproducible across calls") {
  const Fixture& f = fixture();
  TrainConfig config = TrainConfig::ram_defaults(4);
  config.ram_config = tiny_ram();
  config.max_epochs = 2;
  config.batch_size = 16;
  config.seed = 17;
  const TrainOutcome outcome = train_ram(f.manifest, f.dir.string(), config);

  const auto t1 = evaluate(outcome.best, f.manifest, f.dir.string(), Split::Test);
  const auto t2 = evaluate(outcome.best, f.manifest, f.dir.string(), Split::Test);
  REQUIRE(t1.size() == t2.size());
  for (size_t i = 0; i < t1.size(); ++i) CHECK(t1[i].predicted == t2[i].predicted);
}

TEST_CASE("trial results round-trip through CSV") {
  const fs::path dir = fs::temp_directory_path() / "mostv_trials_csv";
  fs::create_directories(dir);
  std::vector<TrialResult> trials(2);
  trials[0] = {"vgg7", 7, "test/scattered_random/1-2_true_0000.png",
               ImageType::ScatteredRandom, RatioPair{1, 2}, 9, 3, true, true, true};
  trials[1] = {"vgg7", 7, "test/column_pairs_sorted/4-5_false_0001.png",
               ImageType::ColumnPairsSorted, RatioPair{4, 5}, 9, 1, false, true, false};
  const std::string path = (dir / "trials.csv").string();
  write_trials_csv(trials, path);
  const auto back = read_trials_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].image_type == ImageType::ScatteredRandom);
  CHECK(back[0].correct);
  CHECK(back[1].ratio.small == 4);
  CHECK_FALSE(back[1].correct);
  CHECK(back[1].predicted);
  fs::remove_all(dir);
}
