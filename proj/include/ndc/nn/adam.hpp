#pragma once

#include <cstdint>
#include <vector>

namespace ndc::nn {

template <class T>
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;  // one accumulator per parameter array
  std::vector<std::vector<T>> v;
};

/// Bias-corrected Adam update over parallel lists of parameter and gradient
/// arrays. Moments are created on the first call.
template <class T>
void adam_step(AdamState<T>& state, const std::vector<std::vector<T>*>& params,
               const std::vector<const std::vector<T>*>& grads);

}  // namespace ndc::nn
