#ifndef MOSTV_NN_HPP_
#define MOSTV_NN_HPP_

#include <memory>
#include <string>
#include <vector>

#include "mostv/rng.hpp"
#include "mostv/tensor.hpp"

namespace mostv {

template <class T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void resize(std::vector<int> shape) {
    value.resize(shape);
    grad.resize(std::move(shape));
  }
};

// Per-call activation cache. Layers are stateless across calls so weight
// sharing over time steps (the recurrent rollout) needs no special casing,
// and concurrent traces over one weight set do not race.
template <class T>
struct LayerCache {
  Tensor<int> argmax;    // max-pool routing
  Tensor<uint8_t> mask;  // dropout keep mask
  Tensor<T> col;         // im2col scratch
  Tensor<T> dcol;
};

template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  // Fills y from x. rng is only consumed by stochastic layers in train mode.
  virtual void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
                       bool train, Rng* rng) const = 0;
  // Accumulates parameter gradients and fills dx.
  virtual void backward(const Tensor<T>& x, const Tensor<T>& y,
                        const Tensor<T>& dy, Tensor<T>& dx,
                        const LayerCache<T>& cache) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  virtual std::string name() const = 0;
};

// 3x3/5x5 same-convolution, stride 1. im2col + GEMM per sample; the column
// buffer is recomputed in backward to keep batch memory flat.
template <class T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int pad);

  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  std::string name() const override { return name_; }

  void init_he(Rng& rng);
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::string name_;
  int in_channels_, out_channels_, kernel_, pad_;
  Param<T> weight_;  // {out_c, in_c * k * k}
  Param<T> bias_;    // {out_c}
};

template <class T>
class MaxPool2d : public Layer<T> {
 public:
  explicit MaxPool2d(std::string name) : name_(std::move(name)) {}
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
};

template <class T>
class ReLU : public Layer<T> {
 public:
  explicit ReLU(std::string name) : name_(std::move(name)) {}
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
};

template <class T>
class Dense : public Layer<T> {
 public:
  Dense(std::string name, int in_dim, int out_dim);
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  std::string name() const override { return name_; }

  void init_he(Rng& rng);
  void init_xavier(Rng& rng);
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

 private:
  std::string name_;
  int in_dim_, out_dim_;
  Param<T> weight_;  // {out, in}
  Param<T> bias_;    // {out}
};

// Inverted dropout; identity in eval mode.
template <class T>
class Dropout : public Layer<T> {
 public:
  Dropout(std::string name, double rate) : name_(std::move(name)), rate_(rate) {}
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  double rate_;
};

// Collapses {N, ...} to {N, rest}.
template <class T>
class Flatten : public Layer<T> {
 public:
  explicit Flatten(std::string name) : name_(std::move(name)) {}
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
};

template <class T>
class Tanh : public Layer<T> {
 public:
  explicit Tanh(std::string name) : name_(std::move(name)) {}
  void forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
               bool train, Rng* rng) const override;
  void backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>& dx, const LayerCache<T>& cache) override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
};

// Layer pipeline with externally owned activations, so one weight set can
// serve many concurrent traces.
template <class T>
class Sequential {
 public:
  struct Trace {
    std::vector<Tensor<T>> acts;          // acts[0] = input copy
    std::vector<LayerCache<T>> caches;
  };

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  const Tensor<T>& forward(const Tensor<T>& x, Trace& trace, bool train, Rng* rng) const;
  // Returns d(input); dy matches the last activation's shape.
  void backward(Trace& trace, const Tensor<T>& dy, Tensor<T>& dx);

  std::vector<Param<T>*> params();
  size_t size() const { return layers_.size(); }
  Layer<T>& layer(size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  Tensor<T> scratch_a_, scratch_b_;
};

// Single LSTM step with caller-held caches (one per time step).
template <class T>
class LSTMCell {
 public:
  LSTMCell(std::string name, int input_dim, int hidden_dim);

  struct StepCache {
    Tensor<T> x, h_prev, c_prev;
    Tensor<T> gates;   // {N, 4H} post-nonlinearity, order i,f,g,o
    Tensor<T> c, tanh_c;
  };

  // h and c are updated in place; all intermediate state lands in cache.
  void forward(const Tensor<T>& x, Tensor<T>& h, Tensor<T>& c, StepCache& cache) const;
  // Propagates (dh, dc) into (dx, dh_prev, dc_prev), accumulating weight grads.
  void backward(const Tensor<T>& dh, const Tensor<T>& dc, const StepCache& cache,
                Tensor<T>& dx, Tensor<T>& dh_prev, Tensor<T>& dc_prev);

  std::vector<Param<T>*> params() { return {&w_input_, &w_hidden_, &bias_}; }
  void init(Rng& rng);  // xavier weights, forget-gate bias 1

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }

 private:
  std::string name_;
  int input_dim_, hidden_dim_;
  Param<T> w_input_;   // {4H, D}
  Param<T> w_hidden_;  // {4H, H}
  Param<T> bias_;      // {4H}
  Tensor<T> dgates_;   // scratch
};

// Mean cross-entropy over the batch; fills dlogits for the mean loss.
template <class T>
T softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels,
                        Tensor<T>* dlogits);

// Argmax with ties resolved to class 0 ("false").
template <class T>
int predict_class(const T* logits, int n_classes);

template <class T>
class Adam {
 public:
  explicit Adam(std::vector<Param<T>*> params, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step();
  void zero_grad();
  // Scales gradients so their global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm);
  void scale_grads(double factor);
  double lr() const { return lr_; }

 private:
  std::vector<Param<T>*> params_;
  std::vector<Tensor<T>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

// Weight-init helpers.
template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double mean, double stddev);
template <class T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi);

}  // namespace mostv

#endif  // MOSTV_NN_HPP_
