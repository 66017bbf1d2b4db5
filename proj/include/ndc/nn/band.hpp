#pragma once

#include <vector>

#include "ndc/nn/network.hpp"

namespace ndc::nn {

/// Training-time evaluation of a convolutional stack restricted to the
/// lattice positions that influence a chosen set of output positions.
///
/// Going backwards from the outputs, each CONV3 layer dilates the position
/// set by one voxel (clipped to the grid); 1^3 and elementwise layers keep it.
/// Values and gradients at the kept positions equal the dense computation;
/// positions outside the set never influence the selected outputs.
template <class T>
struct BandTape {
  Index3 shape{};                           // (W, H, D) = (x, y, z) extents
  std::vector<std::vector<int>> positions;  // per layer input, plus the output set last
  std::vector<Tensor4<T>> inputs;           // per layer input, (C, |positions|, 1, 1)
  std::vector<Tensor4<T>> outputs;          // sigmoid outputs where needed
  std::vector<std::vector<int>> neighbours; // CONV3 layers: 27 x |out| input columns or -1
  std::vector<Tensor4<T>> columns;          // CONV3 layers: gathered (27 C_in, |out|) patches
  std::size_t begin = 0, end = 0;
};

/// Runs layers [begin, end) of `net` on the dense `input`, evaluating only
/// what `out_positions` (sorted spatial indices) needs. Returns the
/// (C_out, |out_positions|, 1, 1) outputs.
template <class T>
Tensor4<T> band_forward(const Network<T>& net, std::size_t begin, std::size_t end, const Tensor4<T>& input,
                        const std::vector<int>& out_positions, BandTape<T>& tape);

/// Backward of band_forward. Parameter gradients accumulate into grads[layer];
/// the returned dense input gradient is zero off the band (empty unless
/// `want_input_grad`).
template <class T>
Tensor4<T> band_backward(const Network<T>& net, const BandTape<T>& tape, const Tensor4<T>& dout,
                         std::vector<LayerGrad<T>>& grads, bool want_input_grad);

}  // namespace ndc::nn
