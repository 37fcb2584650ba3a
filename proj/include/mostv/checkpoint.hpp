#ifndef MOSTV_CHECKPOINT_HPP_
#define MOSTV_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include "mostv/glimpse.hpp"
#include "mostv/nn.hpp"
#include "mostv/vgg.hpp"

namespace mostv {

// Single-file container: magic, a JSON header describing the model and the
// array directory, then raw little-endian float32 data. Format version 1.
struct Checkpoint {
  std::string model_id;     // e.g. "vgg7", "ram4"
  std::string family;       // "cnn" | "ram"
  int duration_level = 0;   // depth or glimpse count
  int epoch = 0;            // epoch the weights were saved at
  double val_loss = 0.0;
  CnnConfig cnn_config;     // valid when family == "cnn"
  RamConfig ram_config;     // valid when family == "ram"
  std::vector<std::pair<std::string, Tensor<float>>> arrays;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies between a parameter set and the named-array list. Mismatched names
// or shapes raise CheckpointError.
void arrays_from_params(const std::vector<Param<float>*>& params,
                        std::vector<std::pair<std::string, Tensor<float>>>* arrays);
void params_from_arrays(const std::vector<std::pair<std::string, Tensor<float>>>& arrays,
                        const std::vector<Param<float>*>& params);

}  // namespace mostv

#endif  // MOSTV_CHECKPOINT_HPP_
