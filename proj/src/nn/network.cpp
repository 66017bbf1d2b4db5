#include "ndc/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ndc/binio.hpp"
#include "ndc/kdtree.hpp"
#include "ndc/rng.hpp"

namespace ndc::nn {

int head_channels(Head head) { return head == Head::Signs ? 1 : 3; }

std::string to_string(InputKind input) {
  switch (input) {
    case InputKind::Sdf: return "sdf";
    case InputKind::Voxel: return "voxel";
    case InputKind::Points: return "points";
  }
  return "?";
}

std::string to_string(Head head) {
  switch (head) {
    case Head::Signs: return "signs";
    case Head::Vertices: return "vertices";
    case Head::Flags: return "flags";
  }
  return "?";
}

std::string variant_name(InputKind input, Head head) {
  const char* prefix = input == InputKind::Sdf ? "SDF" : input == InputKind::Voxel ? "VOX" : "PC";
  const char* suffix = head == Head::Signs ? "S" : head == Head::Vertices ? "V" : "F";
  return std::string(prefix) + "_" + suffix;
}

InputKind input_kind_for(FieldKind kind) { return kind == FieldKind::OCC ? InputKind::Voxel : InputKind::Sdf; }

namespace {

int conv3_count(InputKind input) { return input == InputKind::Voxel ? 7 : 3; }

template <class T>
void push_grid_stack(std::vector<Layer<T>>& layers, InputKind input, int in, int width, int out) {
  const int n3 = conv3_count(input);
  for (int i = 0; i < n3; ++i) {
    layers.push_back(make_conv<T>(LayerKind::Conv3, i == 0 ? in : width, width));
    layers.push_back(make_leaky_relu<T>());
  }
  for (int i = 0; i < 2; ++i) {
    layers.push_back(make_conv<T>(LayerKind::Conv1, width, width));
    layers.push_back(make_leaky_relu<T>());
  }
  layers.push_back(make_conv<T>(LayerKind::Conv1, width, out));
  layers.push_back(make_sigmoid<T>());
}

template <class T>
void initialize(Network<T>& net, std::uint64_t seed, bool zero) {
  if (zero) return;
  std::mt19937_64 rng(seed);
  for (auto& l : net.layers) kaiming_init(l, rng);
}

}  // namespace

template <class T>
Network<T> make_grid_net(InputKind input, Head head, int width, std::uint64_t seed, bool zero) {
  if (input == InputKind::Points) throw Error(ErrorCode::InvalidConfig, "point inputs use make_point_net");
  if (width < 1) throw Error(ErrorCode::InvalidConfig, "network width must be positive");
  Network<T> net{input, head, width, {}};
  push_grid_stack(net.layers, input, 1, width, head_channels(head));
  initialize(net, seed, zero);
  return net;
}

template <class T>
Network<T> make_point_net(Head head, int width, int feature_channels, std::uint64_t seed, bool zero) {
  if (width < 1 || feature_channels < 0) throw Error(ErrorCode::InvalidConfig, "bad point-net shape");
  Network<T> net{InputKind::Points, head, width, {}};
  auto& ls = net.layers;
  ls.push_back(make_conv<T>(LayerKind::Fc, 3 + feature_channels, width));
  ls.push_back(make_leaky_relu<T>());
  ls.push_back(make_conv<T>(LayerKind::Fc, width, width));
  ls.push_back(make_leaky_relu<T>());
  ls.push_back(make_resblock<T>(width));
  ls.push_back(make_resblock<T>(width));
  ls.push_back(make_conv<T>(LayerKind::Fc, 3 + width, width));
  ls.push_back(make_leaky_relu<T>());
  push_grid_stack(ls, InputKind::Sdf, width, width, head_channels(head));
  initialize(net, seed, zero);
  return net;
}

template <class T>
void validate_architecture(const Network<T>& net) {
  Network<T> ref;
  if (net.input == InputKind::Points) {
    const int features = net.layers.empty() ? 0 : net.layers[0].in - 3;
    ref = make_point_net<T>(net.head, net.width, std::max(features, 0), 0, true);
  } else {
    ref = make_grid_net<T>(net.input, net.head, net.width, 0, true);
  }
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ShapeMismatch, "network layout: " + why); };
  if (ref.layers.size() != net.layers.size()) fail("layer count");
  for (std::size_t i = 0; i < ref.layers.size(); ++i) {
    const auto &a = ref.layers[i], &b = net.layers[i];
    if (a.kind != b.kind || a.in != b.in || a.out != b.out || a.weight.size() != b.weight.size() ||
        a.bias.size() != b.bias.size())
      fail("layer " + std::to_string(i));
  }
}

template <class T>
int receptive_field(const Network<T>& net) {
  std::size_t begin = net.input == InputKind::Points ? PointStages::grid_begin : 0;
  int r = 1;
  for (std::size_t i = begin; i < net.layers.size(); ++i)
    if (net.layers[i].kind == LayerKind::Conv3) r += 2;
  return r;
}

template <class T>
Tensor4<T> run_layers(const Network<T>& net, std::size_t begin, std::size_t end, Tensor4<T> x,
                      std::vector<LayerCache<T>>* caches) {
  if (caches) caches->assign(end - begin, {});
  for (std::size_t i = begin; i < end; ++i)
    x = layer_forward(net.layers[i], x, caches ? &(*caches)[i - begin] : nullptr);
  return x;
}

template <class T>
Tensor4<T> backprop_layers(const Network<T>& net, std::size_t begin, std::size_t end,
                           const std::vector<LayerCache<T>>& caches, Tensor4<T> dy,
                           std::vector<LayerGrad<T>>& grads, bool want_input_grad) {
  for (std::size_t i = end; i-- > begin;) {
    const bool need = want_input_grad || i > begin;
    dy = layer_backward(net.layers[i], caches[i - begin], dy, grads[i], need);
  }
  return dy;
}

template <class T>
Tensor4<T> grid_input_tensor(const ScalarGrid& grid) {
  const GridDims lat = grid.lattice_dims();
  Tensor4<T> x(1, lat.k, lat.n, lat.m);
  for_each_index(grid.dims.vertex_shape(), [&](int i, int j, int l) {
    x.at(0, l, j, i) = static_cast<T>(grid.at(i, j, l));
  });
  return x;
}

namespace {

void check_input(const NetworkWeights& net, InputKind got) {
  if (net.input != got)
    throw Error(ErrorCode::InvalidKind, "network variant " + variant_name(net.input, net.head) +
                                            " does not accept " + to_string(got) + " input");
}

}  // namespace

Tensor4<float> forward_grid_net(const NetworkWeights& net, const ScalarGrid& grid) {
  check_input(net, input_kind_for(grid.kind));
  grid.lattice_dims().validate();
  return run_layers<float>(net, 0, net.layers.size(), grid_input_tensor<float>(grid), nullptr);
}

PointGraph build_point_graph(const PointCloud& cloud, const GridDims& lattice) {
  lattice.validate();
  const int n = int(cloud.size());
  if (n < kPointNeighbors)
    throw Error(ErrorCode::TooFewPoints, "point cloud has " + std::to_string(n) + " points, needs >= " +
                                             std::to_string(kPointNeighbors));
  if (cloud.features.size() != std::size_t(n) * cloud.feature_channels)
    throw Error(ErrorCode::ShapeError, "point feature array size mismatch");
  PointGraph g;
  g.lattice = lattice;
  const KdTree tree(cloud.points);
  g.point_knn.resize(std::size_t(n) * kPointNeighbors);
  for (int p = 0; p < n; ++p) {
    const auto nb = tree.knn(cloud.points[p], kPointNeighbors);
    // self first; a duplicate point with a smaller index may tie at distance 0
    g.point_knn[std::size_t(p) * kPointNeighbors] = p;
    int k = 1;
    for (const auto& q : nb)
      if (q.index != p && k < kPointNeighbors) g.point_knn[std::size_t(p) * kPointNeighbors + k++] = q.index;
    while (k < kPointNeighbors) g.point_knn[std::size_t(p) * kPointNeighbors + k++] = p;
  }

  const Index3 cs = lattice.cell_shape();
  g.active_mask = cells_near_points(lattice, cloud.points, kPointBand);
  for_each_index(cs, [&](int i, int j, int l) {
    if (!g.active_mask.at(i, j, l)) return;
    g.active.push_back(int(lattice.cell_index(i, j, l)));
    const auto nb = tree.knn(Vec3(i + 0.5, j + 0.5, l + 0.5), kPointNeighbors);
    for (const auto& q : nb) g.cell_knn.push_back(q.index);
  });
  return g;
}

namespace {

Index3 cell_from_index(const GridDims& d, int idx) {
  const Index3 cs = d.cell_shape();
  return {idx % cs[0], (idx / cs[0]) % cs[1], idx / (cs[0] * cs[1])};
}

// Max over groups of K consecutive columns; records the winning k per entry.
template <class T>
Tensor4<T> max_pool_k(const Tensor4<T>& x, std::vector<int>& arg) {
  const int ch = x.c;
  const std::size_t cols = x.spatial() / kPointNeighbors;
  Tensor4<T> y(ch, int(cols), 1, 1);
  arg.assign(std::size_t(ch) * cols, 0);
  for (int c = 0; c < ch; ++c)
    for (std::size_t g = 0; g < cols; ++g) {
      const T* src = &x.data[std::size_t(c) * x.spatial() + g * kPointNeighbors];
      int best = 0;
      for (int k = 1; k < kPointNeighbors; ++k)
        if (src[k] > src[best]) best = k;
      y.data[std::size_t(c) * cols + g] = src[best];
      arg[std::size_t(c) * cols + g] = best;
    }
  return y;
}

template <class T>
Tensor4<T> unpool_k(const Tensor4<T>& dy, const std::vector<int>& arg) {
  const std::size_t cols = dy.spatial();
  Tensor4<T> dx(dy.c, int(cols * kPointNeighbors), 1, 1);
  for (int c = 0; c < dy.c; ++c)
    for (std::size_t g = 0; g < cols; ++g)
      dx.data[std::size_t(c) * cols * kPointNeighbors + g * kPointNeighbors + arg[std::size_t(c) * cols + g]] =
          dy.data[std::size_t(c) * cols + g];
  return dx;
}

}  // namespace

template <class T>
Tensor4<T> point_net_logits(const Network<T>& net, const PointCloud& cloud, const PointGraph& graph,
                            PointTape<T>* tape) {
  if (net.input != InputKind::Points) throw Error(ErrorCode::InvalidKind, "not a point network");
  const int n = int(cloud.size());
  const int f = cloud.feature_channels;
  if (net.layers.at(0).in != 3 + f)
    throw Error(ErrorCode::ShapeError, "point network expects " + std::to_string(net.layers[0].in - 3) +
                                           " feature channels, cloud has " + std::to_string(f));
  const int K = kPointNeighbors;
  const int W = net.width;

  Tensor4<T> local_in(3 + f, n * K, 1, 1);
  const std::size_t lcols = std::size_t(n) * K;
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < K; ++k) {
      const int q = graph.point_knn[std::size_t(p) * K + k];
      const std::size_t col = std::size_t(p) * K + k;
      const Vec3 rel = cloud.points[q] - cloud.points[p];
      for (int a = 0; a < 3; ++a) local_in.data[a * lcols + col] = static_cast<T>(rel[a]);
      for (int c = 0; c < f; ++c)
        local_in.data[(3 + c) * lcols + col] = static_cast<T>(cloud.features[std::size_t(q) * f + c]);
    }

  std::vector<LayerCache<T>>* lc = tape ? &tape->local : nullptr;
  Tensor4<T> h = run_layers(net, PointStages::local_begin, PointStages::local_end, local_in, lc);
  std::vector<int> local_arg;
  Tensor4<T> feat = max_pool_k(h, local_arg);
  feat = run_layers(net, PointStages::res_begin, PointStages::res_end, feat, tape ? &tape->res : nullptr);

  const std::size_t a_count = graph.active.size();
  const std::size_t pcols = a_count * K;
  Tensor4<T> pool_in(3 + W, int(pcols), 1, 1);
  for (std::size_t a = 0; a < a_count; ++a) {
    const Index3 c = cell_from_index(graph.lattice, graph.active[a]);
    const Vec3 centre(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
    for (int k = 0; k < K; ++k) {
      const int q = graph.cell_knn[a * K + k];
      const std::size_t col = a * K + k;
      const Vec3 rel = cloud.points[q] - centre;
      for (int r = 0; r < 3; ++r) pool_in.data[r * pcols + col] = static_cast<T>(rel[r]);
      for (int ch = 0; ch < W; ++ch) pool_in.data[(3 + ch) * pcols + col] = feat.data[std::size_t(ch) * n + q];
    }
  }
  std::vector<int> pool_arg;
  Tensor4<T> pooled;
  if (a_count > 0) {
    Tensor4<T> ph = run_layers(net, PointStages::pool_begin, PointStages::pool_end, pool_in,
                               tape ? &tape->pool : nullptr);
    pooled = max_pool_k(ph, pool_arg);
  } else if (tape) {
    tape->pool.clear();
  }

  const GridDims& lat = graph.lattice;
  Tensor4<T> grid(W, lat.k, lat.n, lat.m);
  const std::size_t s = grid.spatial();
  for (std::size_t a = 0; a < a_count; ++a) {
    const Index3 c = cell_from_index(lat, graph.active[a]);
    const std::size_t v = lat.vertex_index(c[0], c[1], c[2]);
    for (int ch = 0; ch < W; ++ch) grid.data[std::size_t(ch) * s + v] = pooled.data[std::size_t(ch) * a_count + a];
  }
  const std::size_t last = net.layers.size() - 1;  // final sigmoid excluded
  Tensor4<T> logits = run_layers(net, PointStages::grid_begin, last, grid, tape ? &tape->grid : nullptr);
  if (tape) {
    tape->graph = graph;
    tape->local_in = std::move(local_in);
    tape->local_arg = std::move(local_arg);
    tape->pool_arg = std::move(pool_arg);
    tape->local_out_cols = lcols;
    tape->pool_out_cols = pcols;
  }
  return logits;
}

template <class T>
void point_net_backward(const Network<T>& net, const PointTape<T>& tape, const Tensor4<T>& dlogits,
                        std::vector<LayerGrad<T>>& grads) {
  const int K = kPointNeighbors;
  const int W = net.width;
  const GridDims& lat = tape.graph.lattice;
  const std::size_t last = net.layers.size() - 1;
  Tensor4<T> dgrid = backprop_layers(net, PointStages::grid_begin, last, tape.grid, dlogits, grads, true);

  const std::size_t a_count = tape.graph.active.size();
  const int n = int(tape.local_out_cols / K);
  Tensor4<T> dfeat(W, n, 1, 1);
  if (a_count > 0) {
    const std::size_t s = dgrid.spatial();
    Tensor4<T> dpooled(W, int(a_count), 1, 1);
    for (std::size_t a = 0; a < a_count; ++a) {
      const Index3 c = cell_from_index(lat, tape.graph.active[a]);
      const std::size_t v = lat.vertex_index(c[0], c[1], c[2]);
      for (int ch = 0; ch < W; ++ch) dpooled.data[std::size_t(ch) * a_count + a] = dgrid.data[std::size_t(ch) * s + v];
    }
    Tensor4<T> dph = unpool_k(dpooled, tape.pool_arg);
    Tensor4<T> dpool_in = backprop_layers(net, PointStages::pool_begin, PointStages::pool_end, tape.pool, dph, grads, true);
    const std::size_t pcols = tape.pool_out_cols;
    for (std::size_t a = 0; a < a_count; ++a)
      for (int k = 0; k < K; ++k) {
        const int q = tape.graph.cell_knn[a * K + k];
        for (int ch = 0; ch < W; ++ch)
          dfeat.data[std::size_t(ch) * n + q] += dpool_in.data[(3 + ch) * pcols + a * K + k];
      }
  }
  Tensor4<T> dpool_local = backprop_layers(net, PointStages::res_begin, PointStages::res_end, tape.res, dfeat, grads, true);
  Tensor4<T> dh = unpool_k(dpool_local, tape.local_arg);
  backprop_layers(net, PointStages::local_begin, PointStages::local_end, tape.local, dh, grads, false);
}

Tensor4<float> knn_pointnet_encode(const NetworkWeights& net, const PointCloud& cloud, const GridDims& lattice) {
  check_input(net, InputKind::Points);
  const PointGraph graph = build_point_graph(cloud, lattice);
  Tensor4<float> out = layer_forward(net.layers.back(), point_net_logits<float>(net, cloud, graph, nullptr));
  const std::size_t s = out.spatial();
  for_each_index(lattice.vertex_shape(), [&](int i, int j, int l) {
    const bool keep = lattice.contains_cell(i, j, l) && graph.active_mask.at(i, j, l);
    if (keep) return;
    const std::size_t v = lattice.vertex_index(i, j, l);
    for (int c = 0; c < out.c; ++c) out.data[std::size_t(c) * s + v] = 0.0f;
  });
  return out;
}

namespace {

void check_output(const Tensor4<float>& prob, const GridDims& lat, int channels) {
  if (prob.c != channels || prob.d != lat.k || prob.h != lat.n || prob.w != lat.m)
    throw Error(ErrorCode::ShapeError, "network output does not match the lattice");
}

}  // namespace

SignGrid decode_signs(const Tensor4<float>& prob, const GridDims& lattice) {
  check_output(prob, lattice, 1);
  SignGrid s(lattice, 0);
  for (std::size_t v = 0; v < s.data.size(); ++v) s.data[v] = prob.data[v] > 0.5f;
  return s;
}

VertexOffsetGrid decode_offsets(const Tensor4<float>& prob, const GridDims& lattice) {
  check_output(prob, lattice, 3);
  VertexOffsetGrid o(lattice, Vec3::Constant(0.5));
  const std::size_t s = prob.spatial();
  for_each_index(lattice.cell_shape(), [&](int i, int j, int l) {
    const std::size_t v = lattice.vertex_index(i, j, l);
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = std::clamp(double(prob.data[a * s + v]), 0.0, 1.0);
    o.at(i, j, l) = p;
  });
  return o;
}

FlagField decode_flags(const Tensor4<float>& prob, const GridDims& lattice) {
  check_output(prob, lattice, 3);
  FlagField f(lattice, 0);
  const std::size_t s = prob.spatial();
  for (int a = 0; a < 3; ++a)
    for_each_index(lattice.edge_shape(a), [&](int i, int j, int l) {
      f.at(a, i, j, l) = prob.data[a * s + lattice.vertex_index(i, j, l)] > 0.5f;
    });
  return f;
}

void apply_head(PredictionFields& fields, Head head, const Tensor4<float>& prob, const GridDims& lattice) {
  switch (head) {
    case Head::Signs: fields.signs = decode_signs(prob, lattice); break;
    case Head::Vertices: fields.offsets = decode_offsets(prob, lattice); break;
    case Head::Flags: fields.flags = decode_flags(prob, lattice); break;
  }
}

Tensor4<float> zero_output(Head head, const GridDims& lattice) {
  return Tensor4<float>(head_channels(head), lattice.k, lattice.n, lattice.m);
}

namespace {

constexpr char kWeightsMagic[4] = {'N', 'D', 'C', 'W'};
constexpr std::uint8_t kWeightsVersion = 1;

}  // namespace

void write_weights(std::ostream& out, const NetworkWeights& net) {
  using namespace binio;
  out.write(kWeightsMagic, 4);
  put_u8(out, kWeightsVersion);
  put_u8(out, std::uint8_t(net.input));
  put_u8(out, std::uint8_t(net.head));
  put_u32(out, std::uint32_t(net.width));
  put_u32(out, std::uint32_t(net.layers.size()));
  for (const auto& l : net.layers) {
    put_u8(out, std::uint8_t(l.kind));
    put_u32(out, std::uint32_t(l.in));
    put_u32(out, std::uint32_t(l.out));
    put_u8(out, std::uint8_t(l.kernel()));
    for (float v : l.weight) put_f32(out, v);
    for (float v : l.bias) put_f32(out, v);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing network weights");
}

NetworkWeights read_weights(std::istream& in) {
  using namespace binio;
  char magic[4];
  read_exact(in, magic, 4, "weights header");
  if (!std::equal(magic, magic + 4, kWeightsMagic)) throw Error(ErrorCode::BadMagic, "not an NDCW weights file");
  const std::uint8_t version = get_u8(in, "weights header");
  if (version != kWeightsVersion)
    throw Error(ErrorCode::VersionMismatch, "weights version " + std::to_string(version) + ", expected 1");
  NetworkWeights net;
  const std::uint8_t input = get_u8(in, "weights header");
  const std::uint8_t head = get_u8(in, "weights header");
  if (input > 2 || head > 2) throw Error(ErrorCode::ShapeMismatch, "unknown network variant code");
  net.input = InputKind(input);
  net.head = Head(head);
  net.width = int(get_u32(in, "weights header"));
  const std::uint32_t count = get_u32(in, "weights header");
  if (count > 4096) throw Error(ErrorCode::ShapeMismatch, "implausible layer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t kind = get_u8(in, "layer header");
    if (kind > 5) throw Error(ErrorCode::ShapeMismatch, "unknown layer kind");
    const int lin = int(get_u32(in, "layer header"));
    const int lout = int(get_u32(in, "layer header"));
    const int ksize = get_u8(in, "layer header");
    Layer<float> l;
    switch (LayerKind(kind)) {
      case LayerKind::Conv3:
      case LayerKind::Conv1:
      case LayerKind::Fc: l = make_conv<float>(LayerKind(kind), lin, lout); break;
      case LayerKind::ResBlock: l = make_resblock<float>(lin); break;
      case LayerKind::LeakyRelu: l = make_leaky_relu<float>(); break;
      case LayerKind::Sigmoid: l = make_sigmoid<float>(); break;
    }
    if (l.in != lin || l.out != lout || l.kernel() != ksize)
      throw Error(ErrorCode::ShapeMismatch, "inconsistent header for layer " + std::to_string(i));
    for (float& v : l.weight) v = get_f32(in, "layer weights");
    for (float& v : l.bias) v = get_f32(in, "layer bias");
    net.layers.push_back(std::move(l));
  }
  validate_architecture(net);
  return net;
}

void save_weights(const std::filesystem::path& path, const NetworkWeights& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_weights(out, net);
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_weights(in);
}

#define NDC_INSTANTIATE(T)                                                                              \
  template Network<T> make_grid_net<T>(InputKind, Head, int, std::uint64_t, bool);                      \
  template Network<T> make_point_net<T>(Head, int, int, std::uint64_t, bool);                           \
  template void validate_architecture<T>(const Network<T>&);                                            \
  template int receptive_field<T>(const Network<T>&);                                                   \
  template Tensor4<T> run_layers<T>(const Network<T>&, std::size_t, std::size_t, Tensor4<T>,            \
                                    std::vector<LayerCache<T>>*);                                       \
  template Tensor4<T> backprop_layers<T>(const Network<T>&, std::size_t, std::size_t,                   \
                                         const std::vector<LayerCache<T>>&, Tensor4<T>,                 \
                                         std::vector<LayerGrad<T>>&, bool);                             \
  template Tensor4<T> grid_input_tensor<T>(const ScalarGrid&);                                          \
  template Tensor4<T> point_net_logits<T>(const Network<T>&, const PointCloud&, const PointGraph&,      \
                                          PointTape<T>*);                                               \
  template void point_net_backward<T>(const Network<T>&, const PointTape<T>&, const Tensor4<T>&,        \
                                      std::vector<LayerGrad<T>>&);

NDC_INSTANTIATE(float)
NDC_INSTANTIATE(double)
#undef NDC_INSTANTIATE

}  // namespace ndc::nn
