#ifndef MOSTV_TESTS_GRAD_CHECK_HPP_
#define MOSTV_TESTS_GRAD_CHECK_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "mostv/nn.hpp"

namespace mostv_test {

// Central finite differences against analytic gradients, double precision.
// loss_fn must recompute the full forward pass from current parameter values.
// Analytic grads must already sit in param->grad. Checks a strided sample of
// entries per parameter; returns the worst relative error. denom_floor keeps
// cancellation noise on negligible entries from dominating the metric.
inline double max_grad_rel_error(
    const std::vector<mostv::Param<double>*>& params,
    const std::function<double()>& loss_fn, double step = 1e-5,
    int samples_per_param = 8, double denom_floor = 1e-8) {
  double worst = 0.0;
  for (mostv::Param<double>* p : params) {
    const int64_t n = p->value.numel();
    const int64_t stride = std::max<int64_t>(1, n / samples_per_param);
    for (int64_t i = 0; i < n; i += stride) {
      const double original = p->value.data[i];
      p->value.data[i] = original + step;
      const double up = loss_fn();
      p->value.data[i] = original - step;
      const double down = loss_fn();
      p->value.data[i] = original;
      const double fd = (up - down) / (2.0 * step);
      const double analytic = p->grad.data[i];
      const double denom = std::max({std::abs(fd), std::abs(analytic), denom_floor});
      worst = std::max(worst, std::abs(fd - analytic) / denom);
    }
  }
  return worst;
}

}  // namespace mostv_test

#endif  // MOSTV_TESTS_GRAD_CHECK_HPP_
