#include "ndc/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ndc::nn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Column buffers are capped at this many elements; larger grids are processed
// in z-slabs so memory stays bounded at 64^3 and beyond.
constexpr std::size_t kMaxColumnElements = std::size_t(1) << 24;

int slab_depth(int d, int h, int w, int rows) {
  const std::size_t per_slice = std::size_t(rows) * h * w;
  return int(std::clamp<std::size_t>(kMaxColumnElements / std::max<std::size_t>(per_slice, 1), 1, d));
}

// Rows ordered (ci, kz, ky, kx) to match the weight layout; columns are the
// output voxels of slices [z0, z1).
template <class T>
void im2col(const Tensor4<T>& x, int z0, int z1, RowMat<T>& col) {
  const int h = x.h, w = x.w;
  const std::size_t hw = std::size_t(h) * w;
  col.resize(Eigen::Index(x.c) * 27, Eigen::Index((z1 - z0) * hw));
  for (int ci = 0; ci < x.c; ++ci)
    for (int kz = 0; kz < 3; ++kz)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          T* dst = col.row(ci * 27 + kz * 9 + ky * 3 + kx).data();
          const int dx = kx - 1;
          const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
          for (int z = z0; z < z1; ++z) {
            const int sz = z + kz - 1;
            for (int y = 0; y < h; ++y, dst += w) {
              const int sy = y + ky - 1;
              if (sz < 0 || sz >= x.d || sy < 0 || sy >= h) {
                std::fill(dst, dst + w, T(0));
                continue;
              }
              const T* src = &x.data[(std::size_t(ci) * x.d + sz) * hw + std::size_t(sy) * w];
              std::fill(dst, dst + x_lo, T(0));
              std::copy(src + x_lo + dx, src + x_hi + dx, dst + x_lo);
              std::fill(dst + x_hi, dst + w, T(0));
            }
          }
        }
}

// Adjoint of im2col: scatter-adds the column gradient back into dx.
template <class T>
void col2im_add(const RowMat<T>& col, int z0, int z1, Tensor4<T>& dx) {
  const int h = dx.h, w = dx.w;
  const std::size_t hw = std::size_t(h) * w;
  for (int ci = 0; ci < dx.c; ++ci)
    for (int kz = 0; kz < 3; ++kz)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const T* src = col.row(ci * 27 + kz * 9 + ky * 3 + kx).data();
          const int ddx = kx - 1;
          const int x_lo = std::max(0, -ddx), x_hi = std::min(w, w - ddx);
          for (int z = z0; z < z1; ++z) {
            const int sz = z + kz - 1;
            for (int y = 0; y < h; ++y, src += w) {
              const int sy = y + ky - 1;
              if (sz < 0 || sz >= dx.d || sy < 0 || sy >= h) continue;
              T* dst = &dx.data[(std::size_t(ci) * dx.d + sz) * hw + std::size_t(sy) * w];
              for (int xx = x_lo; xx < x_hi; ++xx) dst[xx + ddx] += src[xx];
            }
          }
        }
}

template <class T>
void check_conv_input(const Tensor4<T>& x, const Layer<T>& layer) {
  if (x.c != layer.in)
    throw Error(ErrorCode::ShapeError, "layer expects " + std::to_string(layer.in) + " channels, got " +
                                           std::to_string(x.c));
}

template <class T>
Eigen::Map<const RowMat<T>> weight_mat(const Layer<T>& l, int rows, int cols, std::size_t offset = 0) {
  return {l.weight.data() + offset, rows, cols};
}

template <class T>
Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias_vec(const Layer<T>& l, int n, std::size_t offset = 0) {
  return {l.bias.data() + offset, n};
}

// y = W x + b for a 1^3 kernel.
template <class T>
Tensor4<T> linear(const Tensor4<T>& x, const Layer<T>& l, std::size_t w_off, std::size_t b_off, int in, int out) {
  Tensor4<T> y(out, x.d, x.h, x.w);
  auto ym = y.mat();
  ym.noalias() = weight_mat(l, out, in, w_off) * x.mat();
  ym.colwise() += bias_vec(l, out, b_off);
  return y;
}

// Accumulates dW += dy x^T, db += rowsum(dy); returns W^T dy if requested.
template <class T>
Tensor4<T> linear_backward(const Tensor4<T>& x, const Layer<T>& l, const Tensor4<T>& dy, LayerGrad<T>& g,
                           std::size_t w_off, std::size_t b_off, int in, int out, bool want_input) {
  Eigen::Map<RowMat<T>> dw(g.weight.data() + w_off, out, in);
  dw.noalias() += dy.mat() * x.mat().transpose();
  add_channel_sums(dy, g.bias.data() + b_off);
  if (!want_input) return {};
  Tensor4<T> dx(in, x.d, x.h, x.w);
  dx.mat().noalias() = weight_mat(l, out, in, w_off).transpose() * dy.mat();
  return dx;
}

template <class T>
T lrelu(T v, T slope) {
  return v > T(0) ? v : slope * v;
}

template <class T>
T lrelu_grad(T v, T slope) {
  return v > T(0) ? T(1) : slope;
}

}  // namespace

template <class T>
Layer<T> make_conv(LayerKind kind, int in, int out) {
  Layer<T> l;
  l.kind = kind;
  l.in = in;
  l.out = out;
  const int k = l.kernel();
  l.weight.assign(std::size_t(out) * in * k * k * k, T(0));
  l.bias.assign(out, T(0));
  return l;
}

template <class T>
Layer<T> make_resblock(int channels) {
  Layer<T> l;
  l.kind = LayerKind::ResBlock;
  l.in = l.out = channels;
  l.weight.assign(2 * std::size_t(channels) * channels, T(0));
  l.bias.assign(2 * std::size_t(channels), T(0));
  return l;
}

template <class T>
Layer<T> make_leaky_relu(T slope) {
  Layer<T> l;
  l.kind = LayerKind::LeakyRelu;
  l.weight = {slope};
  return l;
}

template <class T>
Layer<T> make_sigmoid() {
  return Layer<T>{};
}

template <class T>
void kaiming_init(Layer<T>& layer, std::mt19937_64& rng) {
  if (!layer.trainable()) return;
  const int k = layer.kernel();
  const double fan_in = double(layer.in) * k * k * k;
  const double stddev = std::sqrt(2.0 / ((1.0 + kLeakySlope * kLeakySlope) * fan_in));
  std::normal_distribution<double> n(0.0, stddev);
  for (auto& v : layer.weight) v = static_cast<T>(n(rng));
  std::fill(layer.bias.begin(), layer.bias.end(), T(0));
}

template <class T>
Tensor4<T> conv3d_forward(const Tensor4<T>& x, const Layer<T>& layer) {
  check_conv_input(x, layer);
  if (layer.kernel() == 1) return linear(x, layer, 0, 0, layer.in, layer.out);

  Tensor4<T> y(layer.out, x.d, x.h, x.w);
  const std::size_t hw = std::size_t(x.h) * x.w;
  const auto wm = weight_mat(layer, layer.out, layer.in * 27);
  const auto b = bias_vec(layer, layer.out);
  auto ym = y.mat();
  RowMat<T> col;
  const int slab = slab_depth(x.d, x.h, x.w, layer.in * 27);
  for (int z0 = 0; z0 < x.d; z0 += slab) {
    const int z1 = std::min(x.d, z0 + slab);
    im2col(x, z0, z1, col);
    auto block = ym.middleCols(Eigen::Index(z0 * hw), col.cols());
    block.noalias() = wm * col;
    block.colwise() += b;
  }
  return y;
}

template <class T>
ConvGrads<T> conv3d_backward(const Tensor4<T>& x, const Layer<T>& layer, const Tensor4<T>& dy) {
  check_conv_input(x, layer);
  if (dy.c != layer.out || dy.d != x.d || dy.h != x.h || dy.w != x.w)
    throw Error(ErrorCode::ShapeError, "conv3d_backward: upstream gradient shape mismatch");
  LayerGrad<T> g = LayerGrad<T>::zeros_like(layer);
  ConvGrads<T> out;
  if (layer.kernel() == 1) {
    out.input = linear_backward(x, layer, dy, g, 0, 0, layer.in, layer.out, true);
  } else {
    out.input = Tensor4<T>(x.c, x.d, x.h, x.w);
    const std::size_t hw = std::size_t(x.h) * x.w;
    const auto wm = weight_mat(layer, layer.out, layer.in * 27);
    Eigen::Map<RowMat<T>> dw(g.weight.data(), layer.out, layer.in * 27);
    const auto dym = dy.mat();
    RowMat<T> col, dcol;
    const int slab = slab_depth(x.d, x.h, x.w, layer.in * 27);
    for (int z0 = 0; z0 < x.d; z0 += slab) {
      const int z1 = std::min(x.d, z0 + slab);
      im2col(x, z0, z1, col);
      const auto dblock = dym.middleCols(Eigen::Index(z0 * hw), col.cols());
      dw.noalias() += dblock * col.transpose();
      dcol.noalias() = wm.transpose() * dblock;
      col2im_add(dcol, z0, z1, out.input);
    }
    add_channel_sums(dy, g.bias.data());
  }
  out.weight = std::move(g.weight);
  out.bias = std::move(g.bias);
  return out;
}

template <class T>
Tensor4<T> layer_forward(const Layer<T>& layer, const Tensor4<T>& x, LayerCache<T>* cache) {
  if (cache) cache->input = x;
  switch (layer.kind) {
    case LayerKind::Conv3:
    case LayerKind::Conv1:
    case LayerKind::Fc:
      return conv3d_forward(x, layer);
    case LayerKind::ResBlock: {
      check_conv_input(x, layer);
      const int c = layer.in;
      const std::size_t w2 = std::size_t(c) * c;
      Tensor4<T> h1 = linear(x, layer, 0, 0, c, c);
      Tensor4<T> a = h1;
      for (auto& v : a.data) v = lrelu(v, T(kLeakySlope));
      Tensor4<T> s = linear(a, layer, w2, c, c, c);
      s.mat() += x.mat();
      Tensor4<T> y = s;
      for (auto& v : y.data) v = lrelu(v, T(kLeakySlope));
      if (cache) {
        cache->hidden = std::move(h1);
        cache->output = std::move(s);
      }
      return y;
    }
    case LayerKind::LeakyRelu: {
      Tensor4<T> y = x;
      const T slope = layer.weight.at(0);
      for (auto& v : y.data) v = lrelu(v, slope);
      return y;
    }
    case LayerKind::Sigmoid: {
      Tensor4<T> y = x;
      for (auto& v : y.data) v = T(1) / (T(1) + std::exp(-v));
      if (cache) cache->output = y;
      return y;
    }
  }
  throw Error(ErrorCode::ShapeError, "unknown layer kind");
}

template <class T>
Tensor4<T> layer_backward(const Layer<T>& layer, const LayerCache<T>& cache, const Tensor4<T>& dy,
                          LayerGrad<T>& grad, bool want_input_grad) {
  const Tensor4<T>& x = cache.input;
  switch (layer.kind) {
    case LayerKind::Conv3: {
      ConvGrads<T> g = conv3d_backward(x, layer, dy);
      for (std::size_t i = 0; i < g.weight.size(); ++i) grad.weight[i] += g.weight[i];
      for (std::size_t i = 0; i < g.bias.size(); ++i) grad.bias[i] += g.bias[i];
      return want_input_grad ? std::move(g.input) : Tensor4<T>{};
    }
    case LayerKind::Conv1:
    case LayerKind::Fc:
      return linear_backward(x, layer, dy, grad, 0, 0, layer.in, layer.out, want_input_grad);
    case LayerKind::ResBlock: {
      const int c = layer.in;
      const std::size_t w2 = std::size_t(c) * c;
      const T slope = T(kLeakySlope);
      Tensor4<T> ds = dy;
      for (std::size_t i = 0; i < ds.data.size(); ++i) ds.data[i] *= lrelu_grad(cache.output.data[i], slope);
      Tensor4<T> a = cache.hidden;
      for (auto& v : a.data) v = lrelu(v, slope);
      Tensor4<T> dh = linear_backward(a, layer, ds, grad, w2, c, c, c, true);
      for (std::size_t i = 0; i < dh.data.size(); ++i) dh.data[i] *= lrelu_grad(cache.hidden.data[i], slope);
      Tensor4<T> dx = linear_backward(x, layer, dh, grad, 0, 0, c, c, true);
      dx.mat() += ds.mat();
      return dx;
    }
    case LayerKind::LeakyRelu: {
      if (!want_input_grad) return {};
      Tensor4<T> dx = dy;
      const T slope = layer.weight.at(0);
      for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= lrelu_grad(x.data[i], slope);
      return dx;
    }
    case LayerKind::Sigmoid: {
      if (!want_input_grad) return {};
      Tensor4<T> dx = dy;
      for (std::size_t i = 0; i < dx.data.size(); ++i) {
        const T s = cache.output.data[i];
        dx.data[i] *= s * (T(1) - s);
      }
      return dx;
    }
  }
  throw Error(ErrorCode::ShapeError, "unknown layer kind");
}

#define NDC_INSTANTIATE(T)                                                                        \
  template Layer<T> make_conv<T>(LayerKind, int, int);                                           \
  template Layer<T> make_resblock<T>(int);                                                        \
  template Layer<T> make_leaky_relu<T>(T);                                                        \
  template Layer<T> make_sigmoid<T>();                                                            \
  template void kaiming_init<T>(Layer<T>&, std::mt19937_64&);                                     \
  template Tensor4<T> conv3d_forward<T>(const Tensor4<T>&, const Layer<T>&);                      \
  template ConvGrads<T> conv3d_backward<T>(const Tensor4<T>&, const Layer<T>&, const Tensor4<T>&); \
  template Tensor4<T> layer_forward<T>(const Layer<T>&, const Tensor4<T>&, LayerCache<T>*);       \
  template Tensor4<T> layer_backward<T>(const Layer<T>&, const LayerCache<T>&, const Tensor4<T>&, \
                                        LayerGrad<T>&, bool);

NDC_INSTANTIATE(float)
NDC_INSTANTIATE(double)
#undef NDC_INSTANTIATE

}  // namespace ndc::nn
