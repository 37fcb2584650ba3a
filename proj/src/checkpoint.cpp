#include "mostv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mostv/errors.hpp"

namespace mostv {

namespace {

constexpr char kMagic[8] = {'M', 'V', 'C', 'P', '0', '0', '0', '1'};

nlohmann::json cnn_config_json(const CnnConfig& c) {
  nlohmann::json j;
  j["duration_level"] = c.duration_level;
  j["dropout"] = c.dropout;
  j["input_size"] = c.input_size;
  j["input_channels"] = c.input_channels;
  j["fc_widths"] = c.fc_widths;
  nlohmann::json convs = nlohmann::json::array();
  for (const auto& s : c.convs)
    convs.push_back({{"out_channels", s.out_channels}, {"pool_after", s.pool_after}});
  j["convs"] = convs;
  return j;
}

CnnConfig cnn_config_from_json(const nlohmann::json& j) {
  CnnConfig c;
  c.duration_level = j.at("duration_level");
  c.dropout = j.at("dropout");
  c.input_size = j.at("input_size");
  c.input_channels = j.at("input_channels");
  c.fc_widths = j.at("fc_widths").get<std::vector<int>>();
  for (const auto& s : j.at("convs"))
    c.convs.push_back({s.at("out_channels"), s.at("pool_after")});
  return c;
}

nlohmann::json ram_config_json(const RamConfig& c) {
  return {{"n_glimpses", c.n_glimpses},
          {"n_patches", c.n_patches},
          {"patch_size", c.patch_size},
          {"conv_filters", c.conv_filters},
          {"conv_kernels", c.conv_kernels},
          {"feature_dim", c.feature_dim},
          {"hidden_dim", c.hidden_dim},
          {"location_std", c.location_std}};
}

RamConfig ram_config_from_json(const nlohmann::json& j) {
  RamConfig c;
  c.n_glimpses = j.at("n_glimpses");
  c.n_patches = j.at("n_patches");
  c.patch_size = j.at("patch_size");
  c.conv_filters = j.at("conv_filters");
  c.conv_kernels = j.at("conv_kernels");
  c.feature_dim = j.at("feature_dim");
  c.hidden_dim = j.at("hidden_dim");
  c.location_std = j.at("location_std");
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["model_id"] = ckpt.model_id;
  header["family"] = ckpt.family;
  header["duration_level"] = ckpt.duration_level;
  header["epoch"] = ckpt.epoch;
  header["val_loss"] = ckpt.val_loss;
  if (ckpt.family == "cnn") header["cnn_config"] = cnn_config_json(ckpt.cnn_config);
  if (ckpt.family == "ram") header["ram_config"] = ram_config_json(ckpt.ram_config);

  nlohmann::json dir = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, tensor] : ckpt.arrays) {
    dir.push_back({{"name", name},
                   {"dtype", "f32"},
                   {"shape", tensor.shape},
                   {"offset", offset},
                   {"bytes", tensor.numel() * sizeof(float)}});
    offset += tensor.numel() * sizeof(float);
  }
  header["arrays"] = dir;

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t len = header_str.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_str.data(), static_cast<std::streamsize>(len));
  for (const auto& [name, tensor] : ckpt.arrays)
    out.write(reinterpret_cast<const char*>(tensor.ptr()),
              static_cast<std::streamsize>(tensor.numel() * sizeof(float)));
  if (!out) throw CheckpointError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file: " + path);
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw CheckpointError("truncated checkpoint header: " + path);

  nlohmann::json header = nlohmann::json::parse(header_str, nullptr, false);
  if (header.is_discarded() || header.value("format_version", 0) != 1)
    throw CheckpointError("unsupported checkpoint format: " + path);

  Checkpoint ckpt;
  ckpt.model_id = header.at("model_id");
  ckpt.family = header.at("family");
  ckpt.duration_level = header.at("duration_level");
  ckpt.epoch = header.at("epoch");
  ckpt.val_loss = header.at("val_loss");
  if (ckpt.family == "cnn") ckpt.cnn_config = cnn_config_from_json(header.at("cnn_config"));
  else if (ckpt.family == "ram") ckpt.ram_config = ram_config_from_json(header.at("ram_config"));
  else throw CheckpointError("unknown model family: " + ckpt.family);

  for (const auto& entry : header.at("arrays")) {
    Tensor<float> t(entry.at("shape").get<std::vector<int>>());
    if (entry.at("bytes").get<uint64_t>() != t.numel() * sizeof(float))
      throw CheckpointError("array size mismatch in: " + path);
    in.read(reinterpret_cast<char*>(t.ptr()),
            static_cast<std::streamsize>(t.numel() * sizeof(float)));
    if (!in) throw CheckpointError("truncated array data in: " + path);
    ckpt.arrays.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  return ckpt;
}

void arrays_from_params(const std::vector<Param<float>*>& params,
                        std::vector<std::pair<std::string, Tensor<float>>>* arrays) {
  arrays->clear();
  for (const Param<float>* p : params) arrays->emplace_back(p->name, p->value);
}

void params_from_arrays(const std::vector<std::pair<std::string, Tensor<float>>>& arrays,
                        const std::vector<Param<float>*>& params) {
  if (arrays.size() != params.size())
    throw CheckpointError("parameter count does not match checkpoint");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = arrays[i];
    if (name != params[i]->name)
      throw CheckpointError("parameter name mismatch: " + name + " vs " + params[i]->name);
    if (tensor.shape != params[i]->value.shape)
      throw CheckpointError("parameter shape mismatch for: " + name);
    params[i]->value = tensor;
  }
}

}  // namespace mostv
