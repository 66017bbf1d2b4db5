#pragma once

#include <cstdint>
#include <vector>

#include "ndc/data/sample.hpp"
#include "ndc/nn/network.hpp"

namespace ndc::nn {

/// Which cell mask supervises the vertex head. Auto picks cells_ndc for SDF
/// and voxel samples and cells_undc for UDF and point samples.
enum class VertexMask : std::uint8_t { Auto, Ndc, Undc };

struct TrainConfig {
  Head head = Head::Vertices;
  int width = 0;  // 0 = default width of the input kind
  std::uint64_t seed = 0;
  double lr = 1e-4;
  int epochs = 1;
  std::size_t max_steps = 0;    // 0 = no cap
  int lr_halving_epochs = 100;  // 0 = constant rate
  bool augment = false;         // one random transform per sample and epoch
  double stop_loss = 0.0;       // stop once a step's loss is below this (0 = never)
  VertexMask vertex_mask = VertexMask::Auto;
  bool band = true;             // grid nets: evaluate only the supervised band
};

struct TrainResult {
  NetworkWeights weights;
  std::vector<double> step_loss;   // loss of each step, before its update
  std::vector<double> epoch_loss;  // mean step loss per epoch
  std::size_t steps = 0;
  bool stopped_early = false;
};

InputKind input_kind_for(data::SampleKind kind);

/// Supervision of one head on one sample: labels and a per-element mask in
/// the head's (channels, lattice) output layout.
struct HeadTargets {
  Tensor4<float> labels;
  std::vector<std::uint8_t> mask;
};

HeadTargets head_targets(const data::TrainingSample& sample, Head head, VertexMask vertex_mask = VertexMask::Auto);

/// Masked loss of `net` on `sample`: MSE of the sigmoid offsets for the
/// vertex head, BCE on logits otherwise. With `grads`, parameter gradients
/// are accumulated (one LayerGrad per layer).
double head_loss(const NetworkWeights& net, const data::TrainingSample& sample, VertexMask vertex_mask,
                 std::vector<LayerGrad<float>>* grads, bool band = true);

/// Trains one head with Adam at batch size 1. Sample order is a seeded
/// shuffle per epoch; augmentation transforms are drawn from the same seed.
/// A non-finite loss raises TrainingDiverged. `init` (when given) is the
/// starting network, otherwise a Kaiming-initialized one from `seed`.
TrainResult train_loop(const TrainConfig& config, const std::vector<data::TrainingSample>& dataset,
                       const NetworkWeights* init = nullptr);

}  // namespace ndc::nn
