#include "mostv/vgg.hpp"

#include "mostv/errors.hpp"

namespace mostv {

CnnConfig build_vgg_config(int duration_level) {
  // 11-layer conv stack; 13 adds one conv to each of the first two blocks.
  const std::vector<ConvSpec> stack11 = {
      {64, true}, {128, true}, {256, false}, {256, true},
      {512, false}, {512, true}, {512, false}, {512, true}};
  const std::vector<ConvSpec> stack13 = {
      {64, false}, {64, true}, {128, false}, {128, true}, {256, false},
      {256, true}, {512, false}, {512, true}, {512, false}, {512, true}};

  CnnConfig config;
  config.duration_level = duration_level;
  switch (duration_level) {
    case 13: config.convs = stack13; break;
    case 11: config.convs = stack11; break;
    case 9:
      config.convs.assign(stack11.begin(), stack11.begin() + 6);
      break;
    case 7:
      config.convs.assign(stack11.begin(), stack11.begin() + 4);
      break;
    default:
      throw ConfigError("unsupported depth level: " + std::to_string(duration_level));
  }
  config.fc_widths = {512, 512, 2};
  if (config.weighted_layers() != duration_level)
    throw ConfigError("conv/fc layout does not match the depth level");
  return config;
}

template <class T>
VggNet<T>::VggNet(const CnnConfig& config) : config_(config) {
  int channels = config.input_channels;
  int size = config.input_size;
  int conv_idx = 0;
  for (const ConvSpec& spec : config.convs) {
    ++conv_idx;
    const std::string id = "conv" + std::to_string(conv_idx);
    net_.add(std::make_unique<Conv2d<T>>(id, channels, spec.out_channels, 3, 1));
    net_.add(std::make_unique<ReLU<T>>(id + ".relu"));
    if (spec.pool_after) {
      net_.add(std::make_unique<MaxPool2d<T>>(id + ".pool"));
      size /= 2;
    }
    channels = spec.out_channels;
  }
  net_.add(std::make_unique<Flatten<T>>("flatten"));

  int width = channels * size * size;
  for (size_t i = 0; i < config.fc_widths.size(); ++i) {
    const std::string id = "fc" + std::to_string(i + 1);
    net_.add(std::make_unique<Dense<T>>(id, width, config.fc_widths[i]));
    width = config.fc_widths[i];
    if (i + 1 < config.fc_widths.size()) {
      net_.add(std::make_unique<ReLU<T>>(id + ".relu"));
      net_.add(std::make_unique<Dropout<T>>(id + ".drop", config.dropout));
    }
  }
}

template <class T>
void VggNet<T>::init(Rng& rng) {
  for (size_t i = 0; i < net_.size(); ++i) {
    if (auto* conv = dynamic_cast<Conv2d<T>*>(&net_.layer(i))) conv->init_he(rng);
    if (auto* dense = dynamic_cast<Dense<T>*>(&net_.layer(i))) {
      if (dense->out_dim() == config_.fc_widths.back())
        dense->init_xavier(rng);
      else
        dense->init_he(rng);
    }
  }
}

template <class T>
const Tensor<T>& VggNet<T>::forward(const Tensor<T>& images, bool train, Rng* rng) {
  if (images.dim(1) != config_.input_channels ||
      images.dim(2) != config_.input_size || images.dim(3) != config_.input_size)
    throw ConfigError("input shape does not match the network config");
  return net_.forward(images, trace_, train, rng);
}

template <class T>
void VggNet<T>::backward(const Tensor<T>& dlogits) {
  net_.backward(trace_, dlogits, dinput_);
}

template <class T>
std::vector<int> VggNet<T>::predictions() const {
  const Tensor<T>& logits = trace_.acts.back();
  std::vector<int> out(logits.dim(0));
  for (int i = 0; i < logits.dim(0); ++i)
    out[i] = predict_class(logits.ptr() + static_cast<size_t>(i) * logits.dim(1),
                           logits.dim(1));
  return out;
}

template class VggNet<float>;
template class VggNet<double>;

}  // namespace mostv
