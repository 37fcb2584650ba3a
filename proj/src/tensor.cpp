#include "mostv/tensor.hpp"

#include <cblas.h>

#include <stdexcept>

namespace mostv {

template <class T>
void Tensor<T>::reshape(std::vector<int> s) {
  if (numel_of(s) != numel()) throw std::logic_error("reshape changes element count");
  shape = std::move(s);
}

template struct Tensor<float>;
template struct Tensor<double>;
template struct Tensor<int>;
template struct Tensor<uint8_t>;

void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta,
          float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, int lda, const double* b, int ldb, double beta,
          double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

}  // namespace mostv
