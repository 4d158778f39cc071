#ifndef MPT_ENGINE_HPP
#define MPT_ENGINE_HPP

#include <vector>

#include "mpt/network.hpp"
#include "mpt/nn_ops.hpp"
#include "mpt/tensor.hpp"

// Straight-line execution of a NetworkSpec given one effective weight tensor
// per prunable layer. Gradients are hand-written per layer kind; there is no
// autodiff graph. The cache carries per-conv-layer workspaces so the backward
// pass reuses the forward's im2col columns.

namespace mpt {

template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> inputs;                  // input to each layer
  std::vector<std::vector<int64_t>> pool_argmax;  // per layer, empty unless maxpool
  std::vector<ConvWorkspace<T>> conv_ws;          // per layer, used by conv2d
};

template <typename T>
Tensor<T> network_forward(const NetworkSpec& spec,
                          const std::vector<Tensor<T>>& eff_weights,
                          Tensor<T> input, ForwardCache<T>* cache = nullptr) {
  if (cache) {
    cache->inputs.clear();
    cache->pool_argmax.assign(spec.layers.size(), {});
    cache->conv_ws.resize(spec.layers.size());
  }
  size_t next_weight = 0;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (cache) cache->inputs.push_back(input);
    switch (l.kind) {
      case LayerKind::conv2d:
        input = conv2d_forward(input, eff_weights.at(next_weight++), l.stride,
                               l.padding, cache ? &cache->conv_ws[i] : nullptr);
        break;
      case LayerKind::linear:
        input = linear_forward(input, eff_weights.at(next_weight++));
        break;
      case LayerKind::relu:
        input = relu_forward(input);
        break;
      case LayerKind::maxpool2x2: {
        PoolResult<T> r = maxpool2x2_forward(input);
        if (cache) cache->pool_argmax[i] = std::move(r.argmax);
        input = std::move(r.output);
        break;
      }
      case LayerKind::flatten:
        input = flatten_forward(input);
        break;
    }
  }
  return input;
}

// Gradients with respect to every effective weight tensor, given the cache of
// a forward pass over the same weights. The first layer's input gradient is
// never materialized.
template <typename T>
std::vector<Tensor<T>> network_backward(const NetworkSpec& spec,
                                        const std::vector<Tensor<T>>& eff_weights,
                                        ForwardCache<T>& cache, Tensor<T> grad) {
  std::vector<Tensor<T>> weight_grads(eff_weights.size());
  size_t next_weight = eff_weights.size();
  for (size_t i = spec.layers.size(); i-- > 0;) {
    const LayerSpec& l = spec.layers[i];
    const Tensor<T>& in = cache.inputs[i];
    switch (l.kind) {
      case LayerKind::conv2d: {
        --next_weight;
        ConvGrads<T> g = conv2d_backward(in, eff_weights[next_weight], grad,
                                         l.stride, l.padding, i > 0,
                                         &cache.conv_ws[i]);
        weight_grads[next_weight] = std::move(g.weight);
        grad = std::move(g.input);
        break;
      }
      case LayerKind::linear: {
        --next_weight;
        LinearGrads<T> g = linear_backward(in, eff_weights[next_weight], grad);
        weight_grads[next_weight] = std::move(g.weight);
        grad = std::move(g.input);
        break;
      }
      case LayerKind::relu:
        grad = relu_backward(in, grad);
        break;
      case LayerKind::maxpool2x2:
        grad = maxpool2x2_backward(cache.pool_argmax[i], in.shape, grad);
        break;
      case LayerKind::flatten:
        grad.shape = in.shape;
        break;
    }
  }
  return weight_grads;
}

}  // namespace mpt

#endif  // MPT_ENGINE_HPP
