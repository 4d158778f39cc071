#ifndef MPT_MODEL_HPP
#define MPT_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mpt/network.hpp"
#include "mpt/rng.hpp"
#include "mpt/supermask.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

enum class Phase : uint8_t { mpt = 0, finetune = 1 };

inline const char* phase_name(Phase p) {
  return p == Phase::mpt ? "mpt" : "finetune";
}

// Everything persisted for one prunable layer.
template <typename T>
struct PrunableTensor {
  int layer_index = 0;  // position in NetworkSpec::layers
  Tensor<T> weights;    // latent W, untouched during MPT training
  Tensor<T> scores;     // raw power-prop parameter s
  Tensor<uint8_t> mask; // M
  T scale = 0;          // binarization scale of Eq-style mean |W| over kept
};

template <typename T>
struct Checkpoint {
  NetworkSpec spec;
  std::vector<PrunableTensor<T>> prunable;
  double alpha = 1.0;
  uint64_t seed = 0;
  Phase phase = Phase::mpt;

  int64_t total_params() const {
    int64_t n = 0;
    for (const auto& p : prunable) n += p.weights.numel();
    return n;
  }
  int64_t pruned_params() const {
    int64_t n = 0;
    for (const auto& p : prunable)
      for (int64_t i = 0; i < p.mask.numel(); ++i)
        if (!p.mask[i]) ++n;
    return n;
  }
  double actual_prune_ratio() const {
    int64_t t = total_params();
    return t ? static_cast<double>(pruned_params()) / static_cast<double>(t) : 0.0;
  }
};

// Fresh model: latent weights and scores from per-layer counter streams,
// all-ones masks, scales from the initial binarization.
template <typename T>
Checkpoint<T> init_checkpoint(const NetworkSpec& spec, double alpha, uint64_t seed) {
  validate_spec(spec);
  Checkpoint<T> ckpt;
  ckpt.spec = spec;
  ckpt.alpha = alpha;
  ckpt.seed = seed;
  ckpt.phase = Phase::mpt;

  ScoreState<T> scores = init_scores<T>(spec, alpha, seed);
  std::vector<int> prunable = prunable_layer_indices(spec);
  for (size_t j = 0; j < prunable.size(); ++j) {
    const LayerSpec& layer = spec.layers[static_cast<size_t>(prunable[j])];
    double bound = std::sqrt(6.0 / static_cast<double>(detail::score_fan_in(layer)));
    PrunableTensor<T> p;
    p.layer_index = prunable[j];
    p.weights = Tensor<T>(detail::weight_shape(layer));
    CounterRng rng(seed, rng_stream::kWeights + j);
    for (int64_t i = 0; i < p.weights.numel(); ++i)
      p.weights[i] = static_cast<T>(rng.uniform(-bound, bound));
    p.scores = std::move(scores.s[j]);
    p.mask = Tensor<uint8_t>(p.weights.shape);
    std::fill(p.mask.data.begin(), p.mask.data.end(), uint8_t{1});
    p.scale = binarize_layer(p.weights, p.mask).scale;
    ckpt.prunable.push_back(std::move(p));
  }
  return ckpt;
}

// Effective (masked, binarized) weights of every prunable layer, recomputed
// from the live latent weights and current masks.
template <typename T>
std::vector<Tensor<T>> effective_weights_all(Checkpoint<T>& ckpt) {
  std::vector<Tensor<T>> eff;
  eff.reserve(ckpt.prunable.size());
  for (auto& p : ckpt.prunable) {
    Binarized<T> b = binarize_layer(p.weights, p.mask);
    p.scale = b.scale;
    eff.push_back(effective_weights(b.values, p.mask));
  }
  return eff;
}

}  // namespace mpt

#endif  // MPT_MODEL_HPP
