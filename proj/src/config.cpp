#include "mostv/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mostv/errors.hpp"
#include "mostv/rng.hpp"

namespace mostv {

using nlohmann::json;

ExperimentConfig::ExperimentConfig() {
  cnn.learning_rate = 1e-4;
  cnn.max_epochs = 40;
  cnn.eval_every = 1;
  ram.learning_rate = 1e-5;
  ram.max_epochs = 200;
  ram.eval_every = 2;
}

std::pair<std::string, int> parse_model_id(const std::string& model_id) {
  auto parse_tail = [&](size_t prefix_len) {
    const std::string tail = model_id.substr(prefix_len);
    if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad model id: " + model_id);
    return std::stoi(tail);
  };
  if (model_id.rfind("vgg", 0) == 0) {
    const int d = parse_tail(3);
    if (d != 7 && d != 9 && d != 11 && d != 13)
      throw ConfigError("unsupported depth in model id: " + model_id);
    return {"cnn", d};
  }
  if (model_id.rfind("ram", 0) == 0) {
    const int g = parse_tail(3);
    if (g < 1) throw ConfigError("bad glimpse count in model id: " + model_id);
    return {"ram", g};
  }
  throw ConfigError("unknown model id: " + model_id);
}

namespace {

void read_family(const json& j, FamilyTrainSettings* out) {
  if (j.contains("learning_rate")) out->learning_rate = j["learning_rate"];
  if (j.contains("max_epochs")) out->max_epochs = j["max_epochs"];
  if (j.contains("batch_size")) out->batch_size = j["batch_size"];
  if (j.contains("patience_epochs")) out->patience_epochs = j["patience_epochs"];
  if (j.contains("eval_every")) out->eval_every = j["eval_every"];
  if (j.contains("grad_clip_norm")) out->grad_clip_norm = j["grad_clip_norm"];
  if (j.contains("epoch_cap") && !j["epoch_cap"].is_null())
    out->epoch_cap = j["epoch_cap"].get<int>();
  if (j.contains("baseline")) out->baseline = j["baseline"];
  if (j.contains("location_std")) out->location_std = j["location_std"];
  if (j.contains("mc_samples")) out->mc_samples = j["mc_samples"];
}

json family_json(const FamilyTrainSettings& s, bool is_ram) {
  json j;
  j["learning_rate"] = s.learning_rate;
  j["max_epochs"] = s.max_epochs;
  j["batch_size"] = s.batch_size;
  j["patience_epochs"] = s.patience_epochs;
  j["eval_every"] = s.eval_every;
  j["grad_clip_norm"] = s.grad_clip_norm;
  if (s.epoch_cap) j["epoch_cap"] = *s.epoch_cap;
  if (is_ram) {
    j["baseline"] = s.baseline;
    j["location_std"] = s.location_std;
    j["mc_samples"] = s.mc_samples;
  }
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");

  ExperimentConfig c;
  if (j.contains("schema_version")) c.schema_version = j["schema_version"];
  if (c.schema_version != 1)
    throw ConfigError("unsupported config schema version");
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"];
  if (j.contains("data_dir") && !j["data_dir"].is_null())
    c.data_dir = j["data_dir"].get<std::string>();
  if (j.contains("scale")) c.scale = j["scale"];
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    if (d.contains("train")) c.train_count = d["train"];
    if (d.contains("val")) c.val_count = d["val"];
    if (d.contains("test")) c.test_count = d["test"];
  }
  if (j.contains("models")) c.models = j["models"].get<std::vector<std::string>>();
  if (j.contains("training")) {
    if (j["training"].contains("cnn")) read_family(j["training"]["cnn"], &c.cnn);
    if (j["training"].contains("ram")) read_family(j["training"]["ram"], &c.ram);
  }
  if (j.contains("analysis") && j["analysis"].contains("invariance_threshold"))
    c.invariance_threshold = j["analysis"]["invariance_threshold"];
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["data_dir"] = data_dir ? json(*data_dir) : json(nullptr);
  j["scale"] = scale;
  j["dataset"] = {{"train", train_count}, {"val", val_count}, {"test", test_count}};
  j["models"] = models;
  j["training"] = {{"cnn", family_json(cnn, false)}, {"ram", family_json(ram, true)}};
  j["analysis"] = {{"invariance_threshold", invariance_threshold}};
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  if (scale <= 0) throw ConfigError("scale must be positive");
  if (models.empty()) throw ConfigError("model list is empty");
  for (const auto& m : models) parse_model_id(m);
  if (out_dir.empty()) throw ConfigError("out_dir is empty");
  scaled_dataset();  // validates divisibility
}

DatasetConfig ExperimentConfig::scaled_dataset() const {
  auto scaled = [&](int count) {
    const int cells = 72;
    const int per_cell = static_cast<int>(std::llround(count * scale / cells));
    if (per_cell < 1)
      throw ConfigError("scaled split would be smaller than one record per cell");
    if (std::abs(count * scale - per_cell * cells) > 1e-6)
      throw ConfigError("scaled count " + std::to_string(count * scale) +
                        " is not divisible by 72");
    return per_cell * cells;
  };
  DatasetConfig d;
  d.train_count = scaled(train_count);
  d.val_count = scaled(val_count);
  d.test_count = scaled(test_count);
  d.seed = hash_seed(seed, {0x676e});  // generation stream
  return d;
}

int ExperimentConfig::scaled_max_epochs(const std::string& family) const {
  const FamilyTrainSettings& s = family == "cnn" ? cnn : ram;
  int epochs = std::max(1, static_cast<int>(std::llround(s.max_epochs * scale)));
  if (s.epoch_cap) epochs = std::min(epochs, *s.epoch_cap);
  return epochs;
}

TrainConfig ExperimentConfig::train_config_for(const std::string& model_id) const {
  const auto [family, duration] = parse_model_id(model_id);
  TrainConfig t = family == "cnn" ? TrainConfig::cnn_defaults(duration)
                                  : TrainConfig::ram_defaults(duration);
  const FamilyTrainSettings& s = family == "cnn" ? cnn : ram;
  t.learning_rate = s.learning_rate;
  t.max_epochs = scaled_max_epochs(family);
  t.batch_size = s.batch_size;
  t.patience_epochs = s.patience_epochs;
  t.eval_every = s.eval_every;
  t.grad_clip_norm = s.grad_clip_norm;
  t.ram_baseline = s.baseline;
  t.mc_samples = s.mc_samples;
  t.seed = hash_seed(seed, {0x7472, static_cast<uint64_t>(duration),
                            family == "cnn" ? 0ull : 1ull});
  if (family == "ram") {
    RamConfig rc;
    rc.n_glimpses = duration;
    rc.location_std = s.location_std;
    t.ram_config = rc;
  }
  return t;
}

std::string ExperimentConfig::effective_data_dir() const {
  return data_dir ? *data_dir : out_dir + "/dataset";
}

}  // namespace mostv
