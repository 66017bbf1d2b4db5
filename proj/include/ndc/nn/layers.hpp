#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ndc/nn/tensor.hpp"

namespace ndc::nn {

enum class LayerKind : std::uint8_t { Conv3 = 0, Conv1 = 1, ResBlock = 2, Fc = 3, LeakyRelu = 4, Sigmoid = 5 };

inline constexpr double kLeakySlope = 0.01;

/// One layer of a sequential stack.
///
/// Conv3 / Conv1 / Fc: weight is (out, in, kz, ky, kx), bias has `out`
/// entries. Fc is a 1^3 convolution over a (C, N, 1, 1) point tensor.
/// ResBlock (in == out == C): y = lrelu(x + W2 lrelu(W1 x + b1) + b2); weight
/// holds W1 then W2, bias holds b1 then b2.
/// LeakyRelu: weight[0] is the negative slope. Sigmoid has no parameters.
template <class T>
struct Layer {
  LayerKind kind = LayerKind::Sigmoid;
  int in = 0;
  int out = 0;
  std::vector<T> weight;
  std::vector<T> bias;

  int kernel() const { return kind == LayerKind::Conv3 ? 3 : 1; }
  bool trainable() const {
    return kind == LayerKind::Conv3 || kind == LayerKind::Conv1 || kind == LayerKind::ResBlock ||
           kind == LayerKind::Fc;
  }

  template <class U>
  Layer<U> cast() const {
    return {kind, in, out, std::vector<U>(weight.begin(), weight.end()),
            std::vector<U>(bias.begin(), bias.end())};
  }
  friend bool operator==(const Layer&, const Layer&) = default;
};

template <class T>
Layer<T> make_conv(LayerKind kind, int in, int out);
template <class T>
Layer<T> make_resblock(int channels);
template <class T>
Layer<T> make_leaky_relu(T slope = T(kLeakySlope));
template <class T>
Layer<T> make_sigmoid();

/// Kaiming fan-in normal init for the leaky-ReLU slope; biases zero.
template <class T>
void kaiming_init(Layer<T>& layer, std::mt19937_64& rng);

/// Intermediates kept by a forward pass for the backward pass.
template <class T>
struct LayerCache {
  Tensor4<T> input;
  Tensor4<T> hidden;  // ResBlock: W1 x + b1
  Tensor4<T> output;  // Sigmoid output; ResBlock pre-activation sum
};

template <class T>
struct LayerGrad {
  std::vector<T> weight;
  std::vector<T> bias;

  static LayerGrad zeros_like(const Layer<T>& l) {
    return {std::vector<T>(l.weight.size(), T(0)), std::vector<T>(l.bias.size(), T(0))};
  }
};

/// Forward pass. `cache` may be null for inference.
template <class T>
Tensor4<T> layer_forward(const Layer<T>& layer, const Tensor4<T>& x, LayerCache<T>* cache = nullptr);

/// Backward pass; parameter gradients are accumulated into `grad`. Returns
/// dL/dx, or an empty tensor when `want_input_grad` is false.
template <class T>
Tensor4<T> layer_backward(const Layer<T>& layer, const LayerCache<T>& cache, const Tensor4<T>& dy,
                          LayerGrad<T>& grad, bool want_input_grad = true);

/// Stride-1 cross-correlation, zero padding (k-1)/2.
template <class T>
Tensor4<T> conv3d_forward(const Tensor4<T>& x, const Layer<T>& layer);

template <class T>
struct ConvGrads {
  Tensor4<T> input;
  std::vector<T> weight;
  std::vector<T> bias;
};

template <class T>
ConvGrads<T> conv3d_backward(const Tensor4<T>& x, const Layer<T>& layer, const Tensor4<T>& dy);

}  // namespace ndc::nn
