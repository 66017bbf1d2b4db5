#include "ndc/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "ndc/nn/adam.hpp"

namespace ndc::nn {

template <class T>
LossResult<T> masked_mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target,
                              std::span<const std::uint8_t> mask) {
  require_same_shape(pred, target, "masked_mse_loss");
  const std::size_t s = pred.spatial();
  if (mask.size() != s) throw Error(ErrorCode::ShapeError, "masked_mse_loss: mask size mismatch");
  LossResult<T> r{0.0, Tensor4<T>(pred.c, pred.d, pred.h, pred.w), 0};
  for (std::size_t p = 0; p < s; ++p) r.count += mask[p] != 0;
  if (r.count == 0) return r;
  const double inv = 1.0 / double(r.count);
  for (int c = 0; c < pred.c; ++c)
    for (std::size_t p = 0; p < s; ++p) {
      if (!mask[p]) continue;
      const std::size_t i = std::size_t(c) * s + p;
      const double e = double(pred.data[i]) - double(target.data[i]);
      r.loss += e * e * inv;
      r.grad.data[i] = static_cast<T>(2.0 * e * inv);
    }
  return r;
}

template <class T>
LossResult<T> masked_bce_loss(const Tensor4<T>& prob, const Tensor4<T>& labels,
                              std::span<const std::uint8_t> mask) {
  require_same_shape(prob, labels, "masked_bce_loss");
  if (mask.size() != prob.size()) throw Error(ErrorCode::ShapeError, "masked_bce_loss: mask size mismatch");
  LossResult<T> r{0.0, Tensor4<T>(prob.c, prob.d, prob.h, prob.w), 0};
  for (auto m : mask) r.count += m != 0;
  if (r.count == 0) return r;
  const double inv = 1.0 / double(r.count);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!mask[i]) continue;
    const double p = std::clamp(double(prob.data[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    const double y = double(labels.data[i]);
    r.loss -= (y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv;
    r.grad.data[i] = static_cast<T>((p - y) / (p * (1.0 - p)) * inv);
  }
  return r;
}

template <class T>
LossResult<T> masked_bce_logits(const Tensor4<T>& logits, const Tensor4<T>& labels,
                                std::span<const std::uint8_t> mask) {
  require_same_shape(logits, labels, "masked_bce_logits");
  if (mask.size() != logits.size()) throw Error(ErrorCode::ShapeError, "masked_bce_logits: mask size mismatch");
  LossResult<T> r{0.0, Tensor4<T>(logits.c, logits.d, logits.h, logits.w), 0};
  for (auto m : mask) r.count += m != 0;
  if (r.count == 0) return r;
  const double inv = 1.0 / double(r.count);
  // Clamping the logit for the value is the same as clamping the probability.
  const double zmax = std::log((1.0 - kBceEpsilon) / kBceEpsilon);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    const double z = double(logits.data[i]);
    const double y = double(labels.data[i]);
    const double zc = std::clamp(z, -zmax, zmax);
    r.loss += (std::max(zc, 0.0) - zc * y + std::log1p(std::exp(-std::abs(zc)))) * inv;
    r.grad.data[i] = static_cast<T>((1.0 / (1.0 + std::exp(-z)) - y) * inv);
  }
  return r;
}

template <class T>
void adam_step(AdamState<T>& state, const std::vector<std::vector<T>*>& params,
               const std::vector<const std::vector<T>*>& grads) {
  if (params.size() != grads.size()) throw Error(ErrorCode::ShapeError, "adam_step: list sizes differ");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->size(), T(0));
      state.v.emplace_back(p->size(), T(0));
    }
  }
  if (state.m.size() != params.size()) throw Error(ErrorCode::ShapeError, "adam_step: state size mismatch");
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, double(state.step));
  const double c2 = 1.0 - std::pow(b2, double(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    const auto& g = *grads[k];
    if (p.size() != g.size() || state.m[k].size() != p.size())
      throw Error(ErrorCode::ShapeError, "adam_step: parameter shape mismatch");
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = double(g[i]);
      const double mi = b1 * double(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * double(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      p[i] = static_cast<T>(double(p[i]) - state.lr * (mi / c1) / (std::sqrt(vi / c2) + state.eps));
    }
  }
}

template LossResult<float> masked_mse_loss<float>(const Tensor4<float>&, const Tensor4<float>&,
                                                  std::span<const std::uint8_t>);
template LossResult<double> masked_mse_loss<double>(const Tensor4<double>&, const Tensor4<double>&,
                                                    std::span<const std::uint8_t>);
template LossResult<float> masked_bce_loss<float>(const Tensor4<float>&, const Tensor4<float>&,
                                                  std::span<const std::uint8_t>);
template LossResult<double> masked_bce_loss<double>(const Tensor4<double>&, const Tensor4<double>&,
                                                    std::span<const std::uint8_t>);
template LossResult<float> masked_bce_logits<float>(const Tensor4<float>&, const Tensor4<float>&,
                                                    std::span<const std::uint8_t>);
template LossResult<double> masked_bce_logits<double>(const Tensor4<double>&, const Tensor4<double>&,
                                                      std::span<const std::uint8_t>);
template void adam_step<float>(AdamState<float>&, const std::vector<std::vector<float>*>&,
                               const std::vector<const std::vector<float>*>&);
template void adam_step<double>(AdamState<double>&, const std::vector<std::vector<double>*>&,
                                const std::vector<const std::vector<double>*>&);

}  // namespace ndc::nn
