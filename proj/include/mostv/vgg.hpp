#ifndef MOSTV_VGG_HPP_
#define MOSTV_VGG_HPP_

#include <vector>

#include "mostv/nn.hpp"

namespace mostv {

struct ConvSpec {
  int out_channels = 0;
  bool pool_after = false;
};

struct CnnConfig {
  int duration_level = 11;        // weighted-layer count
  std::vector<ConvSpec> convs;    // 3x3 pad-1 stride-1
  std::vector<int> fc_widths;     // ends in the 2 output logits
  double dropout = 0.25;
  int input_size = 128;
  int input_channels = 1;

  int weighted_layers() const {
    return static_cast<int>(convs.size() + fc_widths.size());
  }
};

// Depth levels 7/9/11/13. 11 and 13 are the standard layouts; 9 and 7 drop
// trailing conv layers from the 11-layer stack and keep the 3-layer head.
CnnConfig build_vgg_config(int duration_level);

template <class T>
class VggNet {
 public:
  explicit VggNet(const CnnConfig& config);

  void init(Rng& rng);
  std::vector<Param<T>*> params() { return net_.params(); }
  const CnnConfig& config() const { return config_; }

  // images: {N, C, H, W}, already normalized to [0, 1]. Returns {N, 2} logits.
  const Tensor<T>& forward(const Tensor<T>& images, bool train, Rng* rng);
  void backward(const Tensor<T>& dlogits);

  // Argmax over the final logits; a tie predicts "false".
  std::vector<int> predictions() const;

 private:
  CnnConfig config_;
  Sequential<T> net_;
  typename Sequential<T>::Trace trace_;
  Tensor<T> dinput_;
};

}  // namespace mostv

#endif  // MOSTV_VGG_HPP_
