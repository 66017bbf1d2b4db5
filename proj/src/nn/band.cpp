#include "ndc/nn/band.hpp"

#include <algorithm>
#include <cmath>

namespace ndc::nn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
Tensor4<T> columns(int channels, std::size_t n) {
  return Tensor4<T>(channels, int(n), 1, 1);
}

std::vector<int> dilate(const std::vector<int>& pos, const Index3& shape) {
  const int w = shape[0], h = shape[1], d = shape[2];
  std::vector<std::uint8_t> mark(std::size_t(w) * h * d, 0);
  for (int p : pos) {
    const int x = p % w, y = (p / w) % h, z = p / (w * h);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int a = x + dx, b = y + dy, c = z + dz;
          if (a < 0 || b < 0 || c < 0 || a >= w || b >= h || c >= d) continue;
          mark[(std::size_t(c) * h + b) * w + a] = 1;
        }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < mark.size(); ++i)
    if (mark[i]) out.push_back(int(i));
  return out;
}

// 27 x |out| table: input column of each kernel tap, -1 in the zero padding.
std::vector<int> neighbour_table(const std::vector<int>& out, const std::vector<int>& in, const Index3& shape) {
  const int w = shape[0], h = shape[1], d = shape[2];
  std::vector<int> column(std::size_t(w) * h * d, -1);
  for (std::size_t j = 0; j < in.size(); ++j) column[in[j]] = int(j);
  std::vector<int> table(27 * out.size(), -1);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const int p = out[j];
    const int x = p % w, y = (p / w) % h, z = p / (w * h);
    for (int kz = 0; kz < 3; ++kz)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const int a = x + kx - 1, b = y + ky - 1, c = z + kz - 1;
          if (a < 0 || b < 0 || c < 0 || a >= w || b >= h || c >= d) continue;
          table[(kz * 9 + ky * 3 + kx) * out.size() + j] = column[(std::size_t(c) * h + b) * w + a];
        }
  }
  return table;
}


template <class T>
void gather_columns(const Tensor4<T>& x, const std::vector<int>& table, std::size_t n, Tensor4<T>& col) {
  const std::size_t n_in = x.spatial();
  col = columns<T>(x.c * 27, n);
  for (int ci = 0; ci < x.c; ++ci) {
    const T* src = x.data.data() + std::size_t(ci) * n_in;
    for (int k = 0; k < 27; ++k) {
      T* dst = col.data.data() + std::size_t(ci * 27 + k) * n;
      const int* idx = table.data() + std::size_t(k) * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] = idx[j] >= 0 ? src[idx[j]] : T(0);
    }
  }
}

template <class T>
void scatter_columns(const RowMat<T>& col, const std::vector<int>& table, std::size_t n, Tensor4<T>& dx) {
  const std::size_t n_in = dx.spatial();
  for (int ci = 0; ci < dx.c; ++ci) {
    T* dst = dx.data.data() + std::size_t(ci) * n_in;
    for (int k = 0; k < 27; ++k) {
      const T* src = col.row(ci * 27 + k).data();
      const int* idx = table.data() + std::size_t(k) * n;
      for (std::size_t j = 0; j < n; ++j)
        if (idx[j] >= 0) dst[idx[j]] += src[j];
    }
  }
}

template <class T>
Eigen::Map<const RowMat<T>> wmat(const Layer<T>& l, int cols) {
  return {l.weight.data(), l.out, cols};
}

}  // namespace

template <class T>
Tensor4<T> band_forward(const Network<T>& net, std::size_t begin, std::size_t end, const Tensor4<T>& input,
                        const std::vector<int>& out_positions, BandTape<T>& tape) {
  tape = BandTape<T>{};
  tape.shape = {input.w, input.h, input.d};
  tape.begin = begin;
  tape.end = end;
  const std::size_t n_layers = end - begin;
  tape.positions.assign(n_layers + 1, {});
  tape.positions[n_layers] = out_positions;
  for (std::size_t i = n_layers; i-- > 0;) {
    const bool conv3 = net.layers[begin + i].kind == LayerKind::Conv3;
    tape.positions[i] = conv3 ? dilate(tape.positions[i + 1], tape.shape) : tape.positions[i + 1];
  }
  tape.neighbours.assign(n_layers, {});
  tape.inputs.assign(n_layers, {});
  tape.outputs.assign(n_layers, {});

  const auto& p0 = tape.positions[0];
  Tensor4<T> x = columns<T>(input.c, p0.size());
  const std::size_t s = input.spatial();
  for (int c = 0; c < input.c; ++c)
    for (std::size_t j = 0; j < p0.size(); ++j)
      x.data[std::size_t(c) * p0.size() + j] = input.data[std::size_t(c) * s + p0[j]];

  tape.columns.assign(n_layers, {});
  for (std::size_t i = 0; i < n_layers; ++i) {
    const Layer<T>& layer = net.layers[begin + i];
    const std::size_t n = tape.positions[i + 1].size();
    tape.inputs[i] = x;
    switch (layer.kind) {
      case LayerKind::Conv3: {
        if (x.c != layer.in) throw Error(ErrorCode::ShapeError, "band_forward: channel mismatch");
        tape.neighbours[i] = neighbour_table(tape.positions[i + 1], tape.positions[i], tape.shape);
        gather_columns(x, tape.neighbours[i], n, tape.columns[i]);
        Tensor4<T> y = columns<T>(layer.out, n);
        y.mat().noalias() = wmat(layer, layer.in * 27) * tape.columns[i].mat();
        y.mat().colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(layer.bias.data(), layer.out);
        x = std::move(y);
        break;
      }
      case LayerKind::ResBlock:
        throw Error(ErrorCode::ShapeError, "band_forward: residual blocks are not convolutional");
      case LayerKind::Conv1:
      case LayerKind::Fc:
      case LayerKind::LeakyRelu:
      case LayerKind::Sigmoid: {
        LayerCache<T> cache;
        x = layer_forward(layer, x, &cache);
        if (layer.kind == LayerKind::Sigmoid) tape.outputs[i] = std::move(cache.output);
        break;
      }
    }
  }
  return x;
}

template <class T>
Tensor4<T> band_backward(const Network<T>& net, const BandTape<T>& tape, const Tensor4<T>& dout,
                         std::vector<LayerGrad<T>>& grads, bool want_input_grad) {
  const std::size_t n_layers = tape.end - tape.begin;
  Tensor4<T> dy = dout;
  RowMat<T> dcol;
  for (std::size_t i = n_layers; i-- > 0;) {
    const std::size_t li = tape.begin + i;
    const Layer<T>& layer = net.layers[li];
    const bool need_input = want_input_grad || i > 0;
    const Tensor4<T>& x = tape.inputs[i];
    if (layer.kind == LayerKind::Conv3) {
      const std::size_t n = tape.positions[i + 1].size();
      Eigen::Map<RowMat<T>> dw(grads[li].weight.data(), layer.out, layer.in * 27);
      dw.noalias() += dy.mat() * tape.columns[i].mat().transpose();
      add_channel_sums(dy, grads[li].bias.data());
      if (need_input) {
        dcol.noalias() = wmat(layer, layer.in * 27).transpose() * dy.mat();
        Tensor4<T> dx = columns<T>(layer.in, tape.positions[i].size());
        scatter_columns(dcol, tape.neighbours[i], n, dx);
        dy = std::move(dx);
      }
    } else {
      LayerCache<T> cache;
      cache.input = x;
      if (layer.kind == LayerKind::Sigmoid) cache.output = tape.outputs[i];
      dy = layer_backward(layer, cache, dy, grads[li], need_input);
    }
  }
  if (!want_input_grad) return {};
  const auto& p0 = tape.positions[0];
  Tensor4<T> dense(dy.c, tape.shape[2], tape.shape[1], tape.shape[0]);
  const std::size_t s = dense.spatial();
  for (int c = 0; c < dy.c; ++c)
    for (std::size_t j = 0; j < p0.size(); ++j) dense.data[std::size_t(c) * s + p0[j]] = dy.data[std::size_t(c) * p0.size() + j];
  return dense;
}

template Tensor4<float> band_forward<float>(const Network<float>&, std::size_t, std::size_t, const Tensor4<float>&,
                                            const std::vector<int>&, BandTape<float>&);
template Tensor4<double> band_forward<double>(const Network<double>&, std::size_t, std::size_t,
                                              const Tensor4<double>&, const std::vector<int>&, BandTape<double>&);
template Tensor4<float> band_backward<float>(const Network<float>&, const BandTape<float>&, const Tensor4<float>&,
                                             std::vector<LayerGrad<float>>&, bool);
template Tensor4<double> band_backward<double>(const Network<double>&, const BandTape<double>&,
                                               const Tensor4<double>&, std::vector<LayerGrad<double>>&, bool);

}  // namespace ndc::nn
