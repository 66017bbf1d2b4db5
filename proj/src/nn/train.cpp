#include "ndc/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ndc/data/augment.hpp"
#include "ndc/nn/adam.hpp"
#include "ndc/nn/band.hpp"
#include "ndc/nn/loss.hpp"
#include "ndc/rng.hpp"

namespace ndc::nn {

using data::SampleKind;
using data::TrainingSample;

InputKind input_kind_for(SampleKind kind) {
  switch (kind) {
    case SampleKind::SDF:
    case SampleKind::UDF: return InputKind::Sdf;
    case SampleKind::OCC: return InputKind::Voxel;
    case SampleKind::POINTS: return InputKind::Points;
  }
  return InputKind::Sdf;
}

namespace {

const CellField<std::uint8_t>& vertex_cells(const TrainingSample& s, VertexMask m) {
  if (m == VertexMask::Auto)
    m = (s.kind == SampleKind::SDF || s.kind == SampleKind::OCC) ? VertexMask::Ndc : VertexMask::Undc;
  return m == VertexMask::Ndc ? s.masks.cells_ndc : s.masks.cells_undc;
}

}  // namespace

HeadTargets head_targets(const TrainingSample& s, Head head, VertexMask vertex_mask) {
  const GridDims& lat = s.lattice;
  const int ch = head_channels(head);
  HeadTargets t{Tensor4<float>(ch, lat.k, lat.n, lat.m), std::vector<std::uint8_t>(std::size_t(ch) * lat.vertex_count(), 0)};
  const std::size_t sp = lat.vertex_count();
  switch (head) {
    case Head::Signs:
      for (std::size_t v = 0; v < sp; ++v) {
        t.labels.data[v] = s.gt_signs.data[v];
        t.mask[v] = s.masks.signs.data[v];
      }
      break;
    case Head::Vertices: {
      const auto& cells = vertex_cells(s, vertex_mask);
      for_each_index(lat.cell_shape(), [&](int i, int j, int l) {
        const std::size_t v = lat.vertex_index(i, j, l);
        const bool on = cells.at(i, j, l);
        for (int a = 0; a < 3; ++a) {
          t.labels.data[a * sp + v] = float(s.gt_offsets.at(i, j, l)[a]);
          t.mask[a * sp + v] = on;
        }
      });
      break;
    }
    case Head::Flags:
      for (int a = 0; a < 3; ++a)
        for_each_index(lat.edge_shape(a), [&](int i, int j, int l) {
          const std::size_t v = lat.vertex_index(i, j, l);
          t.labels.data[a * sp + v] = s.gt_flags.at(a, i, j, l);
          t.mask[a * sp + v] = s.masks.edges.at(a, i, j, l);
        });
      break;
  }
  return t;
}

namespace {

// Loss on (C, n) outputs against gathered labels; grad has the output's shape.
// The vertex head receives sigmoid outputs, the others logits.
LossResult<float> column_loss(Head head, const Tensor4<float>& out, const Tensor4<float>& labels,
                              const std::vector<std::uint8_t>& mask) {
  if (head != Head::Vertices) return masked_bce_logits(out, labels, std::span<const std::uint8_t>(mask));
  // Vertex masks are per cell, identical across the 3 channels.
  const std::size_t n = out.spatial();
  return masked_mse_loss(out, labels, std::span<const std::uint8_t>(mask.data(), n));
}

void check_finite(double loss, std::size_t step) {
  if (std::isfinite(loss)) return;
  std::ostringstream msg;
  msg << "non-finite loss " << loss << " at step " << step;
  throw Error(ErrorCode::TrainingDiverged, msg.str());
}

double grid_head_loss(const NetworkWeights& net, const TrainingSample& s, const HeadTargets& t,
                      std::vector<LayerGrad<float>>* grads, bool band) {
  const std::size_t end = net.head == Head::Vertices ? net.layers.size() : net.layers.size() - 1;
  const Tensor4<float> input = grid_input_tensor<float>(s.grid);
  const int ch = t.labels.c;
  const std::size_t sp = t.labels.spatial();

  if (!band) {
    std::vector<LayerCache<float>> caches;
    const Tensor4<float> out = run_layers(net, 0, end, input, grads ? &caches : nullptr);
    LossResult<float> r = net.head == Head::Vertices
                              ? masked_mse_loss(out, t.labels, std::span<const std::uint8_t>(t.mask.data(), sp))
                              : masked_bce_logits(out, t.labels, std::span<const std::uint8_t>(t.mask));
    if (grads && r.count > 0) backprop_layers(net, 0, end, caches, r.grad, *grads, false);
    return r.loss;
  }

  std::vector<int> pos;
  for (std::size_t v = 0; v < sp; ++v)
    for (int c = 0; c < ch; ++c)
      if (t.mask[c * sp + v]) {
        pos.push_back(int(v));
        break;
      }
  if (pos.empty()) return 0.0;
  const std::size_t n = pos.size();
  Tensor4<float> labels(ch, int(n), 1, 1);
  std::vector<std::uint8_t> mask(std::size_t(ch) * n);
  for (int c = 0; c < ch; ++c)
    for (std::size_t j = 0; j < n; ++j) {
      labels.data[c * n + j] = t.labels.data[c * sp + pos[j]];
      mask[c * n + j] = t.mask[c * sp + pos[j]];
    }
  BandTape<float> tape;
  const Tensor4<float> out = band_forward(net, 0, end, input, pos, tape);
  const LossResult<float> r = column_loss(net.head, out, labels, mask);
  if (grads && r.count > 0) band_backward(net, tape, r.grad, *grads, false);
  return r.loss;
}

double point_head_loss(const NetworkWeights& net, const TrainingSample& s, HeadTargets t,
                       std::vector<LayerGrad<float>>* grads) {
  const PointGraph graph = build_point_graph(s.cloud, s.lattice);
  // Inactive cells are never evaluated at inference; drop their supervision.
  const std::size_t sp = t.labels.spatial();
  for_each_index(s.lattice.vertex_shape(), [&](int i, int j, int l) {
    if (s.lattice.contains_cell(i, j, l) && graph.active_mask.at(i, j, l)) return;
    const std::size_t v = s.lattice.vertex_index(i, j, l);
    for (int c = 0; c < t.labels.c; ++c) t.mask[c * sp + v] = 0;
  });
  PointTape<float> tape;
  const Tensor4<float> logits = point_net_logits<float>(net, s.cloud, graph, grads ? &tape : nullptr);
  LossResult<float> r;
  Tensor4<float> dlogits;
  if (net.head == Head::Vertices) {
    Tensor4<float> prob = logits;
    for (float& z : prob.data) z = 1.0f / (1.0f + std::exp(-z));
    r = masked_mse_loss(prob, t.labels, std::span<const std::uint8_t>(t.mask.data(), sp));
    dlogits = r.grad;
    for (std::size_t i = 0; i < prob.size(); ++i) dlogits.data[i] *= prob.data[i] * (1.0f - prob.data[i]);
  } else {
    r = masked_bce_logits(logits, t.labels, std::span<const std::uint8_t>(t.mask));
    dlogits = r.grad;
  }
  if (grads && r.count > 0) point_net_backward(net, tape, dlogits, *grads);
  return r.loss;
}

}  // namespace

double head_loss(const NetworkWeights& net, const TrainingSample& s, VertexMask vertex_mask,
                 std::vector<LayerGrad<float>>* grads, bool band) {
  if (net.input != input_kind_for(s.kind))
    throw Error(ErrorCode::InvalidKind, "network " + variant_name(net.input, net.head) + " cannot train on " +
                                            data::to_string(s.kind) + " samples");
  HeadTargets t = head_targets(s, net.head, vertex_mask);
  if (net.input == InputKind::Points) return point_head_loss(net, s, std::move(t), grads);
  return grid_head_loss(net, s, t, grads, band);
}

TrainResult train_loop(const TrainConfig& cfg, const std::vector<TrainingSample>& dataset,
                       const NetworkWeights* init) {
  if (dataset.empty()) throw Error(ErrorCode::InvalidConfig, "train_loop needs at least one sample");
  if (cfg.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  const InputKind input = input_kind_for(dataset.front().kind);
  for (const auto& s : dataset)
    if (input_kind_for(s.kind) != input) throw Error(ErrorCode::InvalidConfig, "dataset mixes input kinds");

  TrainResult res;
  if (init) {
    res.weights = *init;
    if (res.weights.input != input || res.weights.head != cfg.head)
      throw Error(ErrorCode::InvalidConfig, "initial network does not match the head or input kind");
    validate_architecture(res.weights);
  } else if (input == InputKind::Points) {
    const int width = cfg.width > 0 ? cfg.width : kPointWidth;
    res.weights = make_point_net<float>(cfg.head, width, dataset.front().cloud.feature_channels,
                                        derive_seed(cfg.seed, 0), false);
  } else {
    const int width = cfg.width > 0 ? cfg.width : kGridWidth;
    res.weights = make_grid_net<float>(input, cfg.head, width, derive_seed(cfg.seed, 0), false);
  }
  NetworkWeights& net = res.weights;

  AdamState<float> adam;
  std::vector<std::vector<float>*> params;
  for (auto& l : net.layers)
    if (l.trainable()) {
      params.push_back(&l.weight);
      params.push_back(&l.bias);
    }

  std::vector<std::size_t> order(dataset.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.lr = cfg.lr_halving_epochs > 0 ? cfg.lr * std::pow(0.5, epoch / cfg.lr_halving_epochs) : cfg.lr;
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x5eed0000ULL + std::uint64_t(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_sum = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (cfg.max_steps && res.steps >= cfg.max_steps) break;
      const TrainingSample* sample = &dataset[order[k]];
      TrainingSample augmented;
      if (cfg.augment) {
        std::mt19937_64 r(derive_seed(cfg.seed, 0xa0000000ULL + std::uint64_t(epoch) * dataset.size() + k));
        augmented = data::augment_sample(*sample, int(r() % data::kTransformCount));
        sample = &augmented;
      }
      std::vector<LayerGrad<float>> grads;
      for (const auto& l : net.layers) grads.push_back(LayerGrad<float>::zeros_like(l));
      const double loss = head_loss(net, *sample, cfg.vertex_mask, &grads, cfg.band);
      check_finite(loss, res.steps);
      res.step_loss.push_back(loss);
      epoch_sum += loss;
      ++epoch_steps;
      ++res.steps;
      if (cfg.stop_loss > 0.0 && loss < cfg.stop_loss) {
        res.stopped_early = true;
        break;
      }
      std::vector<const std::vector<float>*> g;
      for (std::size_t i = 0; i < net.layers.size(); ++i)
        if (net.layers[i].trainable()) {
          g.push_back(&grads[i].weight);
          g.push_back(&grads[i].bias);
        }
      adam_step(adam, params, g);
    }
    if (epoch_steps) res.epoch_loss.push_back(epoch_sum / double(epoch_steps));
    if (res.stopped_early || (cfg.max_steps && res.steps >= cfg.max_steps)) break;
  }
  return res;
}

}  // namespace ndc::nn
