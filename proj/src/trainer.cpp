#include "mpt/trainer.hpp"

#include <malloc.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "mpt/engine.hpp"
#include "mpt/errors.hpp"
#include "mpt/powerprop.hpp"
#include "mpt/rng.hpp"

namespace mpt {

namespace {

// Gradients are always reduced over this fixed number of batch chunks, in
// chunk order, so results do not depend on how many threads actually run.
constexpr int kGradChunks = 8;

// Large transient buffers (im2col columns, activations) churn every batch;
// keeping them on the heap instead of mmap avoids page-fault storms.
void tune_allocator() {
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
}

// Per-chunk forward caches, reused across batches so conv workspaces persist.
struct ChunkSlots {
  std::vector<ForwardCache<float>> caches{kGradChunks};
};

int resolve_threads(int requested) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int t = requested > 0 ? requested : (hw > 0 ? hw : 1);
  return std::min(std::max(t, 1), kGradChunks);
}

std::pair<int64_t, int64_t> chunk_bounds(int64_t n, int chunk) {
  return {n * chunk / kGradChunks, n * (chunk + 1) / kGradChunks};
}

Tensor<float> gather_images(const Dataset& ds, const std::vector<int64_t>& order,
                            int64_t lo, int64_t hi) {
  int64_t sample = ds.images.numel() / ds.images.dim(0);
  std::vector<int64_t> shape = ds.images.shape;
  shape[0] = hi - lo;
  Tensor<float> out(shape);
  for (int64_t i = lo; i < hi; ++i)
    std::copy_n(ds.images.data.data() + order[static_cast<size_t>(i)] * sample,
                sample, out.data.data() + (i - lo) * sample);
  return out;
}

std::vector<int32_t> gather_labels(const Dataset& ds, const std::vector<int64_t>& order,
                                   int64_t lo, int64_t hi) {
  std::vector<int32_t> out(static_cast<size_t>(hi - lo));
  for (int64_t i = lo; i < hi; ++i)
    out[static_cast<size_t>(i - lo)] = ds.labels[static_cast<size_t>(order[static_cast<size_t>(i)])];
  return out;
}

// Cross-entropy rows normalized by the full batch size, so chunk gradients
// sum to the batch-mean gradient.
Tensor<float> ce_grad_rows(const Tensor<float>& logits, const std::vector<int32_t>& labels,
                           int64_t total_batch, double* loss_rows) {
  const int64_t B = logits.dim(0), C = logits.dim(1);
  Tensor<float> grad(logits.shape);
  for (int64_t b = 0; b < B; ++b) {
    int32_t y = labels[static_cast<size_t>(b)];
    if (y < 0 || y >= C)
      throw DataError("label " + std::to_string(y) + " out of range [0," +
                      std::to_string(C) + ")");
    const float* row = logits.data.data() + b * C;
    float* grow = grad.data.data() + b * C;
    float m = row[0];
    for (int64_t c = 1; c < C; ++c) m = std::max(m, row[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < C; ++c) sum += std::exp(static_cast<double>(row[c] - m));
    loss_rows[b] = -(static_cast<double>(row[y] - m) - std::log(sum));
    for (int64_t c = 0; c < C; ++c) {
      double p = std::exp(static_cast<double>(row[c] - m)) / sum;
      grow[c] = static_cast<float>((p - (c == y ? 1.0 : 0.0)) /
                                   static_cast<double>(total_batch));
    }
  }
  return grad;
}

struct BatchGrads {
  std::vector<Tensor<float>> grads;  // per prunable layer
  double loss_sum = 0.0;             // sum of per-sample losses
};

// Forward + backward over one batch, fanned out over fixed chunks. Chunk
// results are merged in chunk order.
BatchGrads run_batch(const NetworkSpec& spec, const std::vector<Tensor<float>>& eff,
                     const Dataset& data, const std::vector<int64_t>& order,
                     int64_t lo, int64_t hi, int threads, ChunkSlots& slots) {
  const int64_t batch = hi - lo;
  std::vector<std::vector<Tensor<float>>> outs(kGradChunks);
  std::vector<double> losses(static_cast<size_t>(batch), 0.0);

  auto work = [&](int tid, int nthreads) {
    for (int c = tid; c < kGradChunks; c += nthreads) {
      auto [clo, chi] = chunk_bounds(batch, c);
      if (clo >= chi) continue;
      Tensor<float> images = gather_images(data, order, lo + clo, lo + chi);
      std::vector<int32_t> labels = gather_labels(data, order, lo + clo, lo + chi);
      ForwardCache<float>& cache = slots.caches[static_cast<size_t>(c)];
      Tensor<float> logits = network_forward(spec, eff, std::move(images), &cache);
      Tensor<float> grad = ce_grad_rows(logits, labels, batch, losses.data() + clo);
      outs[static_cast<size_t>(c)] = network_backward(spec, eff, cache, std::move(grad));
    }
  };
  int nthreads = static_cast<int>(std::min<int64_t>(resolve_threads(threads), batch));
  if (nthreads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
    for (auto& th : pool) th.join();
  }

  BatchGrads result;
  for (int c = 0; c < kGradChunks; ++c) {
    auto& g = outs[static_cast<size_t>(c)];
    if (g.empty()) continue;
    if (result.grads.empty()) {
      result.grads = std::move(g);
    } else {
      for (size_t j = 0; j < g.size(); ++j)
        for (int64_t i = 0; i < g[j].numel(); ++i) result.grads[j][i] += g[j][i];
    }
  }
  for (double l : losses) result.loss_sum += l;
  return result;
}

int64_t count_correct(const NetworkSpec& spec, const std::vector<Tensor<float>>& eff,
                      const Dataset& data, int64_t lo, int64_t hi,
                      const std::vector<int64_t>& order, int threads,
                      ChunkSlots& slots) {
  const int64_t batch = hi - lo;
  std::vector<int64_t> correct(kGradChunks, 0);
  auto work = [&](int tid, int nthreads) {
    for (int c = tid; c < kGradChunks; c += nthreads) {
      auto [clo, chi] = chunk_bounds(batch, c);
      if (clo >= chi) continue;
      Tensor<float> images = gather_images(data, order, lo + clo, lo + chi);
      Tensor<float> logits = network_forward(spec, eff, std::move(images),
                                             &slots.caches[static_cast<size_t>(c)]);
      const int64_t C = logits.dim(1);
      for (int64_t b = 0; b < chi - clo; ++b) {
        const float* row = logits.data.data() + b * C;
        int64_t best = 0;
        for (int64_t k = 1; k < C; ++k)
          if (row[k] > row[best]) best = k;
        if (best == data.labels[static_cast<size_t>(order[static_cast<size_t>(lo + clo + b)])])
          ++correct[static_cast<size_t>(c)];
      }
    }
  };
  int nthreads = static_cast<int>(std::min<int64_t>(resolve_threads(threads), batch));
  if (nthreads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
    for (auto& th : pool) th.join();
  }
  return std::accumulate(correct.begin(), correct.end(), int64_t{0});
}

void check_config(const TrainConfig& config, const Dataset& train, const Dataset& test) {
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(config.lr > 0)) throw ConfigError("lr must be > 0");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (train.size() == 0) throw DataError("training dataset is empty");
  if (test.size() == 0) throw DataError("test dataset is empty");
  check_powerprop_alpha(config.alpha);
}

// Effective weights of the current state; updates masks/scales in the
// checkpoint. Selection runs over the effective scores.
struct IterationState {
  std::vector<Tensor<float>> binarized;  // W_b per layer
  std::vector<Tensor<float>> eff;        // W_b (.) M per layer
};

IterationState select_and_binarize(Checkpoint<float>& ckpt, const TrainConfig& config,
                                   const std::vector<float>* calibrated_thetas) {
  std::vector<Tensor<float>> scores;
  scores.reserve(ckpt.prunable.size());
  for (auto& p : ckpt.prunable)
    scores.push_back(config.bypass_powerprop ? p.scores
                                             : powerprop_apply(p.scores, ckpt.alpha));

  Masks masks;
  if (config.selection.method == SelectionPolicy::Method::topk_sort) {
    masks = select_mask_topk(scores, config.selection.prune_ratio, config.selection.scope);
  } else if (calibrated_thetas) {
    masks = select_mask_threshold(scores, *calibrated_thetas).masks;
  } else {
    masks = select_mask_threshold(scores, static_cast<float>(config.selection.theta)).masks;
  }

  IterationState st;
  for (size_t j = 0; j < ckpt.prunable.size(); ++j) {
    auto& p = ckpt.prunable[j];
    p.mask = std::move(masks[j]);
    try {
      Binarized<float> b = binarize_layer(p.weights, p.mask);
      p.scale = b.scale;
      st.eff.push_back(effective_weights(b.values, p.mask));
      st.binarized.push_back(std::move(b.values));
    } catch (const ConfigError&) {
      throw TrainAbort("layer " + std::to_string(p.layer_index) +
                       " fully pruned; training cannot continue");
    }
  }
  return st;
}

std::vector<float>* maybe_calibrate(const TrainConfig& config, Checkpoint<float>& ckpt,
                                    std::vector<float>& storage) {
  if (config.selection.method != SelectionPolicy::Method::threshold ||
      !config.selection.calibrate_theta)
    return nullptr;
  std::vector<Tensor<float>> scores;
  for (auto& p : ckpt.prunable)
    scores.push_back(config.bypass_powerprop ? p.scores
                                             : powerprop_apply(p.scores, ckpt.alpha));
  if (config.selection.scope == SelectionPolicy::Scope::layerwise) {
    storage = calibrate_theta_layerwise(scores, config.selection.prune_ratio);
  } else {
    storage.assign(scores.size(),
                   calibrate_theta_global(scores, config.selection.prune_ratio));
  }
  return &storage;
}

}  // namespace

TrainResult train_mpt(const TrainConfig& config, const Dataset& train, const Dataset& test) {
  if (train.images.rank() != 4) throw DataError("training images must be [N,C,H,W]");
  NetworkSpec spec = make_conv_family(
      config.arch,
      {train.images.dim(1), train.images.dim(2), train.images.dim(3)},
      train.num_classes);
  return train_mpt(spec, config, train, test);
}

TrainResult train_mpt(const NetworkSpec& spec, const TrainConfig& config,
                      const Dataset& train, const Dataset& test) {
  tune_allocator();
  check_config(config, train, test);
  ChunkSlots slots;
  Checkpoint<float> ckpt = init_checkpoint<float>(spec, config.alpha, config.seed);

  std::vector<float> theta_storage;
  std::vector<float>* thetas = maybe_calibrate(config, ckpt, theta_storage);

  std::vector<const Tensor<float>*> score_params;
  for (auto& p : ckpt.prunable) score_params.push_back(&p.scores);
  OptimizerState<float> opt = OptimizerState<float>::make(config.optimizer, score_params);

  const int64_t n = train.size();
  std::vector<int64_t> order(static_cast<size_t>(n));

  std::vector<EpochMetrics> metrics;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle_rng(config.seed, rng_stream::kShuffle + static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);
    double lr = lr_at(config.lr_schedule, config.lr, epoch, config.epochs);

    double loss_sum = 0.0;
    double t_sel = 0, t_batch = 0, t_opt = 0;  // PROFILE
    for (int64_t lo = 0; lo < n; lo += config.batch_size) {
      int64_t hi = std::min<int64_t>(lo + config.batch_size, n);
      auto p0 = std::chrono::steady_clock::now();
      IterationState st = select_and_binarize(ckpt, config, thetas);
      auto p1 = std::chrono::steady_clock::now();
      BatchGrads bg = run_batch(spec, st.eff, train, order, lo, hi, config.threads, slots);
      auto p2 = std::chrono::steady_clock::now();
      double batch_loss = bg.loss_sum / static_cast<double>(hi - lo);
      if (!std::isfinite(batch_loss))
        throw TrainAbort("divergent loss at epoch " + std::to_string(epoch));
      loss_sum += bg.loss_sum;

      ++opt.step;
      for (size_t j = 0; j < ckpt.prunable.size(); ++j) {
        Tensor<float> gS = score_gradient(bg.grads[j], st.binarized[j]);
        Tensor<float> gs = config.bypass_powerprop
                               ? std::move(gS)
                               : powerprop_grad(ckpt.prunable[j].scores, gS, ckpt.alpha);
        optimizer_step(opt, j, ckpt.prunable[j].scores, gs, lr, config.momentum,
                       config.weight_decay);
      }
      auto p3 = std::chrono::steady_clock::now();
      t_sel += std::chrono::duration<double>(p1-p0).count();
      t_batch += std::chrono::duration<double>(p2-p1).count();
      t_opt += std::chrono::duration<double>(p3-p2).count();
    }
    if (getenv("MPT_PROFILE")) fprintf(stderr, "PROFILE sel=%.2fs batch=%.2fs opt=%.2fs\n", t_sel, t_batch, t_opt);
    double epoch_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Evaluate with the post-update selection; leaves ckpt masks current.
    IterationState st = select_and_binarize(ckpt, config, thetas);
    double acc = evaluate_effective(spec, st.eff, test, config.batch_size, config.threads);
    metrics.push_back(EpochMetrics{epoch, Phase::mpt, loss_sum / static_cast<double>(n),
                                   acc, ckpt.actual_prune_ratio(), epoch_time});
  }
  return TrainResult{std::move(ckpt), std::move(metrics)};
}

const char* finetune_scope_name(FinetuneScope scope) {
  switch (scope) {
    case FinetuneScope::first_layer: return "first";
    case FinetuneScope::last_layer: return "last";
    case FinetuneScope::full_model: return "full";
  }
  return "?";
}

TrainResult finetune(Checkpoint<float> ckpt, FinetuneScope scope,
                     const TrainConfig& config, const Dataset& train,
                     const Dataset& test) {
  tune_allocator();
  check_config(config, train, test);
  ChunkSlots slots;
  if (config.epochs > 200)
    throw ConfigError("finetune epochs capped at 200, got " + std::to_string(config.epochs));
  if (ckpt.prunable.empty()) throw ConfigError("checkpoint has no prunable layers");

  std::vector<size_t> in_scope;
  switch (scope) {
    case FinetuneScope::first_layer: in_scope = {0}; break;
    case FinetuneScope::last_layer: in_scope = {ckpt.prunable.size() - 1}; break;
    case FinetuneScope::full_model:
      for (size_t j = 0; j < ckpt.prunable.size(); ++j) in_scope.push_back(j);
      break;
  }
  if (in_scope.empty()) throw ConfigError("finetune scope resolves to no weight tensors");

  std::vector<const Tensor<float>*> params;
  for (size_t j : in_scope) params.push_back(&ckpt.prunable[j].weights);
  OptimizerState<float> opt = OptimizerState<float>::make(config.optimizer, params);

  const NetworkSpec& spec = ckpt.spec;
  const int64_t n = train.size();
  std::vector<int64_t> order(static_cast<size_t>(n));

  std::vector<EpochMetrics> metrics;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle_rng(config.seed, rng_stream::kShuffle + static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);
    double lr = lr_at(config.lr_schedule, config.lr, epoch, config.epochs);

    double loss_sum = 0.0;
    for (int64_t lo = 0; lo < n; lo += config.batch_size) {
      int64_t hi = std::min<int64_t>(lo + config.batch_size, n);
      // Masks frozen; scale recomputed from the live weights every forward.
      std::vector<Tensor<float>> eff;
      eff.reserve(ckpt.prunable.size());
      for (auto& p : ckpt.prunable) {
        try {
          Binarized<float> b = binarize_layer(p.weights, p.mask);
          p.scale = b.scale;
          eff.push_back(effective_weights(b.values, p.mask));
        } catch (const ConfigError&) {
          throw TrainAbort("layer " + std::to_string(p.layer_index) + " fully pruned");
        }
      }
      BatchGrads bg = run_batch(spec, eff, train, order, lo, hi, config.threads, slots);
      double batch_loss = bg.loss_sum / static_cast<double>(hi - lo);
      if (!std::isfinite(batch_loss))
        throw TrainAbort("divergent loss at epoch " + std::to_string(epoch));
      loss_sum += bg.loss_sum;

      ++opt.step;
      for (size_t slot = 0; slot < in_scope.size(); ++slot) {
        size_t j = in_scope[slot];
        auto& p = ckpt.prunable[j];
        // Straight-through on sign with mask gating.
        Tensor<float> gW(p.weights.shape);
        for (int64_t i = 0; i < gW.numel(); ++i)
          gW[i] = p.mask[i] ? bg.grads[j][i] : 0.0f;
        optimizer_step(opt, slot, p.weights, gW, lr, config.momentum,
                       config.weight_decay);
      }
    }
    double epoch_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double acc = evaluate(ckpt, test, config.batch_size, config.threads);
    metrics.push_back(EpochMetrics{epoch, Phase::finetune,
                                   loss_sum / static_cast<double>(n), acc,
                                   ckpt.actual_prune_ratio(), epoch_time});
  }
  ckpt.phase = Phase::finetune;
  return TrainResult{std::move(ckpt), std::move(metrics)};
}

double evaluate_effective(const NetworkSpec& spec,
                          const std::vector<Tensor<float>>& eff_weights,
                          const Dataset& data, int batch_size, int threads) {
  tune_allocator();
  if (data.size() == 0) throw DataError("dataset is empty");
  ChunkSlots slots;
  std::vector<int64_t> order(static_cast<size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  int64_t correct = 0;
  for (int64_t lo = 0; lo < data.size(); lo += batch_size) {
    int64_t hi = std::min<int64_t>(lo + batch_size, data.size());
    correct += count_correct(spec, eff_weights, data, lo, hi, order, threads, slots);
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double evaluate(Checkpoint<float>& ckpt, const Dataset& data, int batch_size, int threads) {
  std::vector<Tensor<float>> eff = effective_weights_all(ckpt);
  return evaluate_effective(ckpt.spec, eff, data, batch_size, threads);
}

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
  std::string out = "epoch,phase,train_loss,test_accuracy,actual_prune_ratio,epoch_time_s\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.9g,%.9g,%.9g,%.6f\n", m.epoch,
                  phase_name(m.phase), m.train_loss, m.test_accuracy,
                  m.actual_prune_ratio, m.epoch_time_s);
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << metrics_csv(metrics);
  if (!out) throw DataError("write error on '" + path + "'");
}

}  // namespace mpt
