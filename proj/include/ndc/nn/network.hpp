#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ndc/grid.hpp"
#include "ndc/mesher.hpp"
#include "ndc/nn/layers.hpp"
#include "ndc/pointcloud.hpp"

namespace ndc::nn {

/// Sdf covers both signed and unsigned distance inputs.
enum class InputKind : std::uint8_t { Sdf = 0, Voxel = 1, Points = 2 };
enum class Head : std::uint8_t { Signs = 0, Vertices = 1, Flags = 2 };

int head_channels(Head head);
std::string variant_name(InputKind input, Head head);  // e.g. "SDF_V", "VOX_F", "PC_F"
std::string to_string(InputKind input);
std::string to_string(Head head);
InputKind input_kind_for(FieldKind kind);

inline constexpr int kGridWidth = 64;
inline constexpr int kPointWidth = 128;
inline constexpr int kPointNeighbors = 8;
inline constexpr int kPointBand = 3;  // Manhattan radius of active cells

/// One trained head: an ordered layer list plus the variant it belongs to.
///
/// Grid nets: CONV3 x n3 (3 for Sdf, 7 for Voxel) then CONV1 x 3, leaky ReLU
/// between layers, sigmoid at the end.
/// Point nets: [FC, LRELU, FC, LRELU] local PointNet, [RES, RES], [FC, LRELU]
/// grid pooling, then the Sdf grid stack.
template <class T>
struct Network {
  InputKind input = InputKind::Sdf;
  Head head = Head::Vertices;
  int width = kGridWidth;
  std::vector<Layer<T>> layers;

  template <class U>
  Network<U> cast() const {
    Network<U> out{input, head, width, {}};
    for (const auto& l : layers) out.layers.push_back(l.template cast<U>());
    return out;
  }
  friend bool operator==(const Network&, const Network&) = default;
};

using NetworkWeights = Network<float>;

/// Kaiming-initialized network from `seed`; with `zero` every parameter is 0.
template <class T>
Network<T> make_grid_net(InputKind input, Head head, int width, std::uint64_t seed, bool zero = false);
template <class T>
Network<T> make_point_net(Head head, int width, int feature_channels, std::uint64_t seed, bool zero = false);

/// Layer index ranges of the point-net stages.
struct PointStages {
  static constexpr std::size_t local_begin = 0, local_end = 4;
  static constexpr std::size_t res_begin = 4, res_end = 6;
  static constexpr std::size_t pool_begin = 6, pool_end = 8;
  static constexpr std::size_t grid_begin = 8;
};

/// Throws ShapeMismatch unless the layer list is the documented architecture
/// for (input, head, width).
template <class T>
void validate_architecture(const Network<T>& net);

/// Side length of the cubic receptive field of the grid stack.
template <class T>
int receptive_field(const Network<T>& net);

/// Runs layers [begin, end). With `caches` every layer's intermediates are kept.
template <class T>
Tensor4<T> run_layers(const Network<T>& net, std::size_t begin, std::size_t end, Tensor4<T> x,
                      std::vector<LayerCache<T>>* caches);

/// Reverse of run_layers over the same range. Parameter gradients go into
/// grads[layer index]. The input gradient of layer `begin` is returned only
/// when requested.
template <class T>
Tensor4<T> backprop_layers(const Network<T>& net, std::size_t begin, std::size_t end,
                           const std::vector<LayerCache<T>>& caches, Tensor4<T> dy,
                           std::vector<LayerGrad<T>>& grads, bool want_input_grad);

/// (1, lattice) input tensor. Distance grids are placed on lattice vertices;
/// voxel (i, j, l) sits at lattice vertex (i, j, l), the min corner of its
/// cell, and the extra far layer is zero.
template <class T>
Tensor4<T> grid_input_tensor(const ScalarGrid& grid);

/// Per-lattice-vertex output probabilities (head channels, lattice).
Tensor4<float> forward_grid_net(const NetworkWeights& net, const ScalarGrid& grid);

/// Neighbourhood structure of a cloud on a lattice.
struct PointGraph {
  GridDims lattice;
  std::vector<int> point_knn;    // N x K, self first
  std::vector<int> active;       // active cell linear indices, storage order
  std::vector<int> cell_knn;     // active.size() x K
  CellField<std::uint8_t> active_mask;
};

PointGraph build_point_graph(const PointCloud& cloud, const GridDims& lattice);

/// Point-net intermediates for backpropagation.
template <class T>
struct PointTape {
  PointGraph graph;
  Tensor4<T> local_in;
  std::vector<LayerCache<T>> local, res, pool, grid;
  std::vector<int> local_arg;  // W x N argmax over K
  std::vector<int> pool_arg;   // W x A argmax over K
  std::size_t local_out_cols = 0;
  std::size_t pool_out_cols = 0;
};

/// Point-net forward up to the logits of the last layer (sigmoid excluded).
template <class T>
Tensor4<T> point_net_logits(const Network<T>& net, const PointCloud& cloud, const PointGraph& graph,
                            PointTape<T>* tape);

template <class T>
void point_net_backward(const Network<T>& net, const PointTape<T>& tape, const Tensor4<T>& dlogits,
                        std::vector<LayerGrad<T>>& grads);

/// Per-lattice-vertex output probabilities; positions whose cell is inactive
/// (or that are no cell's min corner) are 0.
Tensor4<float> knn_pointnet_encode(const NetworkWeights& net, const PointCloud& cloud, const GridDims& lattice);

/// Output decoding. Cell values are read at the cell's min-corner vertex and
/// flag channel a at vertex v belongs to edge (a, v).
SignGrid decode_signs(const Tensor4<float>& prob, const GridDims& lattice);
VertexOffsetGrid decode_offsets(const Tensor4<float>& prob, const GridDims& lattice);
FlagField decode_flags(const Tensor4<float>& prob, const GridDims& lattice);
void apply_head(PredictionFields& fields, Head head, const Tensor4<float>& prob, const GridDims& lattice);

/// Shape of a head's output on `lattice`.
Tensor4<float> zero_output(Head head, const GridDims& lattice);

void write_weights(std::ostream& out, const NetworkWeights& net);
NetworkWeights read_weights(std::istream& in);
void save_weights(const std::filesystem::path& path, const NetworkWeights& net);
NetworkWeights load_weights(const std::filesystem::path& path);

}  // namespace ndc::nn
