#pragma once

#include <cstdint>
#include <span>

#include "ndc/nn/tensor.hpp"

namespace ndc::nn {

inline constexpr double kBceEpsilon = 1e-7;

template <class T>
struct LossResult {
  double loss = 0.0;
  Tensor4<T> grad;        // same shape as the prediction
  std::size_t count = 0;  // masked items the mean runs over
};

/// Mean over masked positions of the per-position squared error summed over
/// channels. `mask` has one entry per spatial position.
template <class T>
LossResult<T> masked_mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target,
                              std::span<const std::uint8_t> mask);

/// Mean masked binary cross entropy on probabilities clamped to
/// [eps, 1 - eps]; the gradient is with respect to the probabilities.
/// `mask` has one entry per tensor element.
template <class T>
LossResult<T> masked_bce_loss(const Tensor4<T>& prob, const Tensor4<T>& labels,
                              std::span<const std::uint8_t> mask);

/// Same loss evaluated on logits (sigmoid folded in). The gradient is
/// sigmoid(z) - y per masked element over the count.
template <class T>
LossResult<T> masked_bce_logits(const Tensor4<T>& logits, const Tensor4<T>& labels,
                                std::span<const std::uint8_t> mask);

}  // namespace ndc::nn
