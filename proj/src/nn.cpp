#include "mostv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mostv/errors.hpp"

namespace mostv {

namespace {

// im2col for stride-1 same-convolution: input {C,H,W} -> col {C*k*k, H*W}.
// Inner spans are contiguous copies.
template <class T>
void im2col(const T* input, int channels, int height, int width, int kernel,
            int pad, T* col) {
  const int out_hw = height * width;
  for (int c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        T* dst = col + (static_cast<size_t>((c * kernel + ki) * kernel + kj)) * out_hw;
        for (int r = 0; r < height; ++r, dst += width) {
          const int in_r = r + ki - pad;
          if (in_r < 0 || in_r >= height) {
            std::memset(dst, 0, sizeof(T) * width);
            continue;
          }
          const int shift = kj - pad;  // in_c = out_c + shift
          const int lo = std::max(0, -shift);
          const int hi = std::min(width, width - shift);
          if (lo > 0) std::memset(dst, 0, sizeof(T) * lo);
          if (hi > lo)
            std::memcpy(dst + lo,
                        input + (static_cast<size_t>(c) * height + in_r) * width + lo + shift,
                        sizeof(T) * (hi - lo));
          if (hi < width) std::memset(dst + hi, 0, sizeof(T) * (width - hi));
        }
      }
    }
  }
}

template <class T>
void col2im(const T* col, int channels, int height, int width, int kernel,
            int pad, T* input) {
  std::memset(input, 0, sizeof(T) * channels * height * width);
  const int out_hw = height * width;
  for (int c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const T* src = col + (static_cast<size_t>((c * kernel + ki) * kernel + kj)) * out_hw;
        for (int r = 0; r < height; ++r, src += width) {
          const int in_r = r + ki - pad;
          if (in_r < 0 || in_r >= height) continue;
          const int shift = kj - pad;
          const int lo = std::max(0, -shift);
          const int hi = std::min(width, width - shift);
          T* dst = input + (static_cast<size_t>(c) * height + in_r) * width + shift;
          for (int x = lo; x < hi; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

template <class T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

// ------------------------------------------------------------------- Conv2d

template <class T>
Conv2d<T>::Conv2d(std::string name, int in_channels, int out_channels,
                  int kernel, int pad)
    : name_(std::move(name)),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      pad_(pad) {
  weight_.name = name_ + ".weight";
  weight_.resize({out_channels, in_channels * kernel * kernel});
  bias_.name = name_ + ".bias";
  bias_.resize({out_channels});
}

template <class T>
void Conv2d<T>::init_he(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels_) * kernel_ * kernel_;
  fill_normal(weight_.value, rng, 0.0, std::sqrt(2.0 / fan_in));
  bias_.value.zero();
}

template <class T>
void Conv2d<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
                        bool, Rng*) const {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c != in_channels_) throw ConfigError(name_ + ": channel mismatch");
  y.resize({n, out_channels_, h, w});
  const int hw = h * w;
  const int kk = in_channels_ * kernel_ * kernel_;
  cache.col.resize({kk, hw});
  for (int i = 0; i < n; ++i) {
    const T* xi = x.ptr() + static_cast<size_t>(i) * c * hw;
    T* yi = y.ptr() + static_cast<size_t>(i) * out_channels_ * hw;
    im2col(xi, c, h, w, kernel_, pad_, cache.col.ptr());
    gemm(false, false, out_channels_, hw, kk, T(1), weight_.value.ptr(), kk,
         cache.col.ptr(), hw, T(0), yi, hw);
    for (int oc = 0; oc < out_channels_; ++oc) {
      const T b = bias_.value.data[oc];
      T* row = yi + static_cast<size_t>(oc) * hw;
      for (int p = 0; p < hw; ++p) row[p] += b;
    }
  }
}

template <class T>
void Conv2d<T>::backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                         Tensor<T>& dx, const LayerCache<T>& cache) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int hw = h * w;
  const int kk = in_channels_ * kernel_ * kernel_;
  dx.resize({n, c, h, w});
  auto& scratch = const_cast<LayerCache<T>&>(cache);
  scratch.col.resize({kk, hw});
  scratch.dcol.resize({kk, hw});
  for (int i = 0; i < n; ++i) {
    const T* xi = x.ptr() + static_cast<size_t>(i) * c * hw;
    const T* dyi = dy.ptr() + static_cast<size_t>(i) * out_channels_ * hw;
    T* dxi = dx.ptr() + static_cast<size_t>(i) * c * hw;

    im2col(xi, c, h, w, kernel_, pad_, scratch.col.ptr());
    gemm(false, true, out_channels_, kk, hw, T(1), dyi, hw, scratch.col.ptr(), hw,
         T(1), weight_.grad.ptr(), kk);
    for (int oc = 0; oc < out_channels_; ++oc) {
      const T* row = dyi + static_cast<size_t>(oc) * hw;
      T acc = 0;
      for (int p = 0; p < hw; ++p) acc += row[p];
      bias_.grad.data[oc] += acc;
    }
    gemm(true, false, kk, hw, out_channels_, T(1), weight_.value.ptr(), kk,
         dyi, hw, T(0), scratch.dcol.ptr(), hw);
    col2im(scratch.dcol.ptr(), c, h, w, kernel_, pad_, dxi);
  }
}

// ---------------------------------------------------------------- MaxPool2d

template <class T>
void MaxPool2d<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
                           bool, Rng*) const {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = h / 2, ow = w / 2;
  y.resize({n, c, oh, ow});
  cache.argmax.resize({n, c, oh, ow});
  for (int i = 0; i < n; ++i) {
    const T* xi = x.ptr() + static_cast<size_t>(i) * c * h * w;
    T* yi = y.ptr() + static_cast<size_t>(i) * c * oh * ow;
    int* ai = cache.argmax.ptr() + static_cast<size_t>(i) * c * oh * ow;
    for (int ch = 0; ch < c; ++ch) {
      for (int r = 0; r < oh; ++r) {
        for (int col = 0; col < ow; ++col) {
          const int base = (ch * h + 2 * r) * w + 2 * col;
          int best = base;
          T best_v = xi[base];
          const int candidates[3] = {base + 1, base + w, base + w + 1};
          for (int cand : candidates) {
            if (xi[cand] > best_v) {
              best_v = xi[cand];
              best = cand;
            }
          }
          yi[(ch * oh + r) * ow + col] = best_v;
          ai[(ch * oh + r) * ow + col] = best;
        }
      }
    }
  }
}

template <class T>
void MaxPool2d<T>::backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                            Tensor<T>& dx, const LayerCache<T>& cache) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  dx.resize({n, c, h, w});
  dx.zero();
  const int64_t out_per = dy.numel() / n;
  const int64_t in_per = static_cast<int64_t>(c) * h * w;
  for (int i = 0; i < n; ++i) {
    const T* dyi = dy.ptr() + i * out_per;
    const int* ai = cache.argmax.ptr() + i * out_per;
    T* dxi = dx.ptr() + i * in_per;
    for (int64_t p = 0; p < out_per; ++p) dxi[ai[p]] += dyi[p];
  }
}

// --------------------------------------------------------------------- ReLU

template <class T>
void ReLU<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>&, bool,
                      Rng*) const {
  y.resize(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
}

template <class T>
void ReLU<T>::backward(const Tensor<T>&, const Tensor<T>& y, const Tensor<T>& dy,
                       Tensor<T>& dx, const LayerCache<T>&) {
  dx.resize(y.shape);
  for (int64_t i = 0; i < y.numel(); ++i) dx.data[i] = y.data[i] > T(0) ? dy.data[i] : T(0);
}

// -------------------------------------------------------------------- Dense

template <class T>
Dense<T>::Dense(std::string name, int in_dim, int out_dim)
    : name_(std::move(name)), in_dim_(in_dim), out_dim_(out_dim) {
  weight_.name = name_ + ".weight";
  weight_.resize({out_dim, in_dim});
  bias_.name = name_ + ".bias";
  bias_.resize({out_dim});
}

template <class T>
void Dense<T>::init_he(Rng& rng) {
  fill_normal(weight_.value, rng, 0.0, std::sqrt(2.0 / in_dim_));
  bias_.value.zero();
}

template <class T>
void Dense<T>::init_xavier(Rng& rng) {
  const double bound = std::sqrt(6.0 / (in_dim_ + out_dim_));
  fill_uniform(weight_.value, rng, -bound, bound);
  bias_.value.zero();
}

template <class T>
void Dense<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>&, bool,
                       Rng*) const {
  const int n = x.dim(0);
  if (x.numel() / n != in_dim_) throw ConfigError(name_ + ": input width mismatch");
  y.resize({n, out_dim_});
  gemm(false, true, n, out_dim_, in_dim_, T(1), x.ptr(), in_dim_,
       weight_.value.ptr(), in_dim_, T(0), y.ptr(), out_dim_);
  for (int i = 0; i < n; ++i) {
    T* row = y.ptr() + static_cast<size_t>(i) * out_dim_;
    for (int j = 0; j < out_dim_; ++j) row[j] += bias_.value.data[j];
  }
}

template <class T>
void Dense<T>::backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                        Tensor<T>& dx, const LayerCache<T>&) {
  const int n = x.dim(0);
  gemm(true, false, out_dim_, in_dim_, n, T(1), dy.ptr(), out_dim_, x.ptr(),
       in_dim_, T(1), weight_.grad.ptr(), in_dim_);
  for (int i = 0; i < n; ++i) {
    const T* row = dy.ptr() + static_cast<size_t>(i) * out_dim_;
    for (int j = 0; j < out_dim_; ++j) bias_.grad.data[j] += row[j];
  }
  dx.resize({n, in_dim_});
  gemm(false, false, n, in_dim_, out_dim_, T(1), dy.ptr(), out_dim_,
       weight_.value.ptr(), in_dim_, T(0), dx.ptr(), in_dim_);
}

// ------------------------------------------------------------------ Dropout

template <class T>
void Dropout<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>& cache,
                         bool train, Rng* rng) const {
  y.resize(x.shape);
  if (!train || rate_ == 0.0) {
    y.data = x.data;
    cache.mask.resize({0});  // marks the pass-through for backward
    return;
  }
  if (!rng) throw ConfigError(name_ + ": dropout in train mode needs an rng");
  cache.mask.resize(x.shape);
  const T scale = T(1.0 / (1.0 - rate_));
  for (int64_t i = 0; i < x.numel(); ++i) {
    const bool keep = rng->uniform() >= rate_;
    cache.mask.data[i] = keep ? 1 : 0;
    y.data[i] = keep ? x.data[i] * scale : T(0);
  }
}

template <class T>
void Dropout<T>::backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                          Tensor<T>& dx, const LayerCache<T>& cache) {
  dx.resize(x.shape);
  if (cache.mask.numel() != x.numel()) {  // eval-mode pass-through
    dx.data = dy.data;
    return;
  }
  const T scale = T(1.0 / (1.0 - rate_));
  for (int64_t i = 0; i < x.numel(); ++i)
    dx.data[i] = cache.mask.data[i] ? dy.data[i] * scale : T(0);
}

// ------------------------------------------------------------------ Flatten

template <class T>
void Flatten<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>&, bool,
                         Rng*) const {
  const int n = x.dim(0);
  y.resize({n, static_cast<int>(x.numel() / n)});
  y.data = x.data;
}

template <class T>
void Flatten<T>::backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                          Tensor<T>& dx, const LayerCache<T>&) {
  dx.resize(x.shape);
  dx.data = dy.data;
}

// --------------------------------------------------------------------- Tanh

template <class T>
void Tanh<T>::forward(const Tensor<T>& x, Tensor<T>& y, LayerCache<T>&, bool,
                      Rng*) const {
  y.resize(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) y.data[i] = std::tanh(x.data[i]);
}

template <class T>
void Tanh<T>::backward(const Tensor<T>&, const Tensor<T>& y, const Tensor<T>& dy,
                       Tensor<T>& dx, const LayerCache<T>&) {
  dx.resize(y.shape);
  for (int64_t i = 0; i < y.numel(); ++i)
    dx.data[i] = dy.data[i] * (T(1) - y.data[i] * y.data[i]);
}

// --------------------------------------------------------------- Sequential

template <class T>
const Tensor<T>& Sequential<T>::forward(const Tensor<T>& x, Trace& trace,
                                        bool train, Rng* rng) const {
  trace.acts.resize(layers_.size() + 1);
  trace.caches.resize(layers_.size());
  trace.acts[0].resize(x.shape);
  trace.acts[0].data = x.data;
  for (size_t i = 0; i < layers_.size(); ++i)
    layers_[i]->forward(trace.acts[i], trace.acts[i + 1], trace.caches[i], train, rng);
  return trace.acts.back();
}

template <class T>
void Sequential<T>::backward(Trace& trace, const Tensor<T>& dy, Tensor<T>& dx) {
  const Tensor<T>* cur = &dy;
  Tensor<T>* bufs[2] = {&scratch_a_, &scratch_b_};
  for (size_t i = layers_.size(); i-- > 0;) {
    Tensor<T>* out = (i == 0) ? &dx : bufs[i % 2];
    layers_[i]->backward(trace.acts[i], trace.acts[i + 1], *cur, *out, trace.caches[i]);
    cur = out;
  }
}

template <class T>
std::vector<Param<T>*> Sequential<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_)
    for (Param<T>* p : l->params()) out.push_back(p);
  return out;
}

// ----------------------------------------------------------------- LSTMCell

template <class T>
LSTMCell<T>::LSTMCell(std::string name, int input_dim, int hidden_dim)
    : name_(std::move(name)), input_dim_(input_dim), hidden_dim_(hidden_dim) {
  w_input_.name = name_ + ".w_input";
  w_input_.resize({4 * hidden_dim, input_dim});
  w_hidden_.name = name_ + ".w_hidden";
  w_hidden_.resize({4 * hidden_dim, hidden_dim});
  bias_.name = name_ + ".bias";
  bias_.resize({4 * hidden_dim});
}

template <class T>
void LSTMCell<T>::init(Rng& rng) {
  const double bx = std::sqrt(6.0 / (input_dim_ + 4.0 * hidden_dim_));
  fill_uniform(w_input_.value, rng, -bx, bx);
  const double bh = std::sqrt(6.0 / (hidden_dim_ + 4.0 * hidden_dim_));
  fill_uniform(w_hidden_.value, rng, -bh, bh);
  bias_.value.zero();
  // Forget gate opens at init so state persists across glimpses.
  for (int i = hidden_dim_; i < 2 * hidden_dim_; ++i) bias_.value.data[i] = T(1);
}

template <class T>
void LSTMCell<T>::forward(const Tensor<T>& x, Tensor<T>& h, Tensor<T>& c,
                          StepCache& cache) const {
  const int n = x.dim(0);
  const int hd = hidden_dim_;
  cache.x = x;
  cache.h_prev = h;
  cache.c_prev = c;

  cache.gates.resize({n, 4 * hd});
  gemm(false, true, n, 4 * hd, input_dim_, T(1), x.ptr(), input_dim_,
       w_input_.value.ptr(), input_dim_, T(0), cache.gates.ptr(), 4 * hd);
  gemm(false, true, n, 4 * hd, hd, T(1), h.ptr(), hd, w_hidden_.value.ptr(), hd,
       T(1), cache.gates.ptr(), 4 * hd);

  cache.c.resize({n, hd});
  cache.tanh_c.resize({n, hd});
  for (int i = 0; i < n; ++i) {
    T* g = cache.gates.ptr() + static_cast<size_t>(i) * 4 * hd;
    const T* cp = cache.c_prev.ptr() + static_cast<size_t>(i) * hd;
    T* cn = cache.c.ptr() + static_cast<size_t>(i) * hd;
    T* tc = cache.tanh_c.ptr() + static_cast<size_t>(i) * hd;
    T* hn = h.ptr() + static_cast<size_t>(i) * hd;
    for (int j = 0; j < hd; ++j) {
      const T gi = sigmoid(g[j] + bias_.value.data[j]);
      const T gf = sigmoid(g[hd + j] + bias_.value.data[hd + j]);
      const T gg = std::tanh(g[2 * hd + j] + bias_.value.data[2 * hd + j]);
      const T go = sigmoid(g[3 * hd + j] + bias_.value.data[3 * hd + j]);
      g[j] = gi;
      g[hd + j] = gf;
      g[2 * hd + j] = gg;
      g[3 * hd + j] = go;
      cn[j] = gf * cp[j] + gi * gg;
      tc[j] = std::tanh(cn[j]);
      hn[j] = go * tc[j];
    }
  }
  c = cache.c;
}

template <class T>
void LSTMCell<T>::backward(const Tensor<T>& dh, const Tensor<T>& dc,
                           const StepCache& cache, Tensor<T>& dx,
                           Tensor<T>& dh_prev, Tensor<T>& dc_prev) {
  const int n = dh.dim(0);
  const int hd = hidden_dim_;
  dgates_.resize({n, 4 * hd});
  dc_prev.resize({n, hd});

  for (int i = 0; i < n; ++i) {
    const T* g = cache.gates.ptr() + static_cast<size_t>(i) * 4 * hd;
    const T* cp = cache.c_prev.ptr() + static_cast<size_t>(i) * hd;
    const T* tc = cache.tanh_c.ptr() + static_cast<size_t>(i) * hd;
    const T* dhi = dh.ptr() + static_cast<size_t>(i) * hd;
    const T* dci = dc.numel() ? dc.ptr() + static_cast<size_t>(i) * hd : nullptr;
    T* dg = dgates_.ptr() + static_cast<size_t>(i) * 4 * hd;
    T* dcp = dc_prev.ptr() + static_cast<size_t>(i) * hd;
    for (int j = 0; j < hd; ++j) {
      const T gi = g[j], gf = g[hd + j], gg = g[2 * hd + j], go = g[3 * hd + j];
      const T d_c = (dci ? dci[j] : T(0)) + dhi[j] * go * (T(1) - tc[j] * tc[j]);
      dg[j] = d_c * gg * gi * (T(1) - gi);                      // input gate
      dg[hd + j] = d_c * cp[j] * gf * (T(1) - gf);              // forget gate
      dg[2 * hd + j] = d_c * gi * (T(1) - gg * gg);             // candidate
      dg[3 * hd + j] = dhi[j] * tc[j] * go * (T(1) - go);       // output gate
      dcp[j] = d_c * gf;
    }
  }

  for (int i = 0; i < n; ++i) {
    const T* dg = dgates_.ptr() + static_cast<size_t>(i) * 4 * hd;
    for (int j = 0; j < 4 * hd; ++j) bias_.grad.data[j] += dg[j];
  }
  gemm(true, false, 4 * hd, input_dim_, n, T(1), dgates_.ptr(), 4 * hd,
       cache.x.ptr(), input_dim_, T(1), w_input_.grad.ptr(), input_dim_);
  gemm(true, false, 4 * hd, hd, n, T(1), dgates_.ptr(), 4 * hd,
       cache.h_prev.ptr(), hd, T(1), w_hidden_.grad.ptr(), hd);

  dx.resize({n, input_dim_});
  gemm(false, false, n, input_dim_, 4 * hd, T(1), dgates_.ptr(), 4 * hd,
       w_input_.value.ptr(), input_dim_, T(0), dx.ptr(), input_dim_);
  dh_prev.resize({n, hd});
  gemm(false, false, n, hd, 4 * hd, T(1), dgates_.ptr(), 4 * hd,
       w_hidden_.value.ptr(), hd, T(0), dh_prev.ptr(), hd);
}

// --------------------------------------------------------------------- loss

template <class T>
T softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels,
                        Tensor<T>* dlogits) {
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<size_t>(n) != labels.size())
    throw ConfigError("cross-entropy batch/label size mismatch");
  if (dlogits) dlogits->resize({n, c});
  T total = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = logits.ptr() + static_cast<size_t>(i) * c;
    T max_v = row[0];
    for (int j = 1; j < c; ++j) max_v = std::max(max_v, row[j]);
    T sum = 0;
    for (int j = 0; j < c; ++j) sum += std::exp(row[j] - max_v);
    const T log_z = std::log(sum) + max_v;
    total += log_z - row[labels[i]];
    if (dlogits) {
      T* drow = dlogits->ptr() + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j)
        drow[j] = (std::exp(row[j] - log_z) - (j == labels[i] ? T(1) : T(0))) / T(n);
    }
  }
  return total / T(n);
}

template <class T>
int predict_class(const T* logits, int n_classes) {
  int best = 0;
  for (int j = 1; j < n_classes; ++j)
    if (logits[j] > logits[best]) best = j;
  return best;
}

// --------------------------------------------------------------------- Adam

template <class T>
Adam<T>::Adam(std::vector<Param<T>*> params, double lr, double beta1,
              double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (Param<T>* p : params_) {
    m_.emplace_back(p->value.shape);
    v_.emplace_back(p->value.shape);
  }
}

template <class T>
void Adam<T>::zero_grad() {
  for (Param<T>* p : params_) p->grad.zero();
}

template <class T>
void Adam<T>::clip_grad_norm(double max_norm) {
  double sq = 0;
  for (Param<T>* p : params_)
    for (int64_t i = 0; i < p->grad.numel(); ++i)
      sq += static_cast<double>(p->grad.data[i]) * p->grad.data[i];
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const T scale = static_cast<T>(max_norm / norm);
  for (Param<T>* p : params_)
    for (int64_t i = 0; i < p->grad.numel(); ++i) p->grad.data[i] *= scale;
}

template <class T>
void Adam<T>::scale_grads(double factor) {
  for (Param<T>* p : params_)
    for (int64_t i = 0; i < p->grad.numel(); ++i)
      p->grad.data[i] = static_cast<T>(p->grad.data[i] * factor);
}

template <class T>
void Adam<T>::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Param<T>* p = params_[k];
    T* m = m_[k].ptr();
    T* v = v_[k].ptr();
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      const T g = p->grad.data[i];
      m[i] = static_cast<T>(beta1_ * m[i] + (1.0 - beta1_) * g);
      v[i] = static_cast<T>(beta2_ * v[i] + (1.0 - beta2_) * g * g);
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p->value.data[i] -= static_cast<T>(lr_ * m_hat / (std::sqrt(v_hat) + eps_));
    }
  }
}

// --------------------------------------------------------------------- init

template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double mean, double stddev) {
  for (auto& v : t.data) v = static_cast<T>(rng.normal(mean, stddev));
}

template <class T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
}

// ------------------------------------------------------------ instantiation

#define MOSTV_INSTANTIATE(T)                                                  \
  template class Conv2d<T>;                                                   \
  template class MaxPool2d<T>;                                                \
  template class ReLU<T>;                                                     \
  template class Dense<T>;                                                    \
  template class Dropout<T>;                                                  \
  template class Flatten<T>;                                                  \
  template class Tanh<T>;                                                     \
  template class Sequential<T>;                                               \
  template class LSTMCell<T>;                                                 \
  template class Adam<T>;                                                     \
  template T softmax_cross_entropy<T>(const Tensor<T>&, const std::vector<int>&, Tensor<T>*); \
  template int predict_class<T>(const T*, int);                               \
  template void fill_normal<T>(Tensor<T>&, Rng&, double, double);             \
  template void fill_uniform<T>(Tensor<T>&, Rng&, double, double);

MOSTV_INSTANTIATE(float)
MOSTV_INSTANTIATE(double)
#undef MOSTV_INSTANTIATE

}  // namespace mostv
