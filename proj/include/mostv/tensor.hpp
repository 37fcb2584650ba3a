#ifndef MOSTV_TENSOR_HPP_
#define MOSTV_TENSOR_HPP_

#include <cstdint>
#include <numeric>
#include <vector>

namespace mostv {

// Dense row-major tensor. Training uses float; gradient-check oracles double.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) { resize(std::move(s)); }

  void resize(std::vector<int> s) {
    shape = std::move(s);
    data.assign(numel_of(shape), T(0));
  }

  // Reinterprets the layout; element count must match.
  void reshape(std::vector<int> s);

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }
  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }
};

// C = alpha * op(A) * op(B) + beta * C, row-major. Backed by BLAS.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta,
          float* c, int ldc);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, int lda, const double* b, int ldb, double beta,
          double* c, int ldc);

}  // namespace mostv

#endif  // MOSTV_TENSOR_HPP_
