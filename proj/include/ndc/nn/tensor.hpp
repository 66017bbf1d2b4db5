#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ndc/error.hpp"

namespace ndc::nn {

/// Dense (C, D, H, W) activation tensor, W fastest. D, H, W map to the grid's
/// z, y, x axes so the flat spatial index equals the lattice vertex index.
template <class T>
struct Tensor4 {
  int c = 0, d = 0, h = 0, w = 0;
  std::vector<T> data;

  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor4() = default;
  Tensor4(int channels, int depth, int height, int width, T fill = T(0))
      : c(channels), d(depth), h(height), w(width),
        data(std::size_t(channels) * depth * height * width, fill) {}

  std::size_t spatial() const { return std::size_t(d) * h * w; }
  std::size_t size() const { return data.size(); }

  T& at(int ch, int z, int y, int x) { return data[(std::size_t(ch) * d + z) * h * w + std::size_t(y) * w + x]; }
  T at(int ch, int z, int y, int x) const {
    return data[(std::size_t(ch) * d + z) * h * w + std::size_t(y) * w + x];
  }

  /// C x (D*H*W) view.
  Eigen::Map<Matrix> mat() { return {data.data(), c, Eigen::Index(spatial())}; }
  Eigen::Map<const Matrix> mat() const { return {data.data(), c, Eigen::Index(spatial())}; }

  bool same_shape(const Tensor4& o) const { return c == o.c && d == o.d && h == o.h && w == o.w; }

  template <class U>
  Tensor4<U> cast() const {
    Tensor4<U> out(c, d, h, w);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;
};

/// out[c] += sum over positions of channel c, summed in index order. Eigen's
/// vectorized reductions peel by pointer alignment, which would make results
/// depend on where the allocator placed the buffer.
template <class T>
void add_channel_sums(const Tensor4<T>& t, T* out) {
  const std::size_t s = t.spatial();
  for (int c = 0; c < t.c; ++c) {
    T acc = T(0);
    for (std::size_t i = 0; i < s; ++i) acc += t.data[std::size_t(c) * s + i];
    out[c] += acc;
  }
}

template <class T>
void require_same_shape(const Tensor4<T>& a, const Tensor4<T>& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeError, std::string(what) + ": tensor shapes differ");
}

}  // namespace ndc::nn
