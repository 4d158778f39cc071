#ifndef MPT_TRAINER_HPP
#define MPT_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mpt/data.hpp"
#include "mpt/model.hpp"
#include "mpt/optimizer.hpp"
#include "mpt/supermask.hpp"

namespace mpt {

struct TrainConfig {
  std::string arch = "conv4";
  double alpha = 1.0;
  SelectionPolicy selection;
  int epochs = 1;
  int batch_size = 128;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double lr = 0.1;
  LrSchedule lr_schedule = LrSchedule::cosine;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  uint64_t seed = 1;
  // Routes around the power-prop layer entirely; with alpha = 1 the
  // trajectory is bit-identical either way.
  bool bypass_powerprop = false;
  int threads = 0;  // 0 = hardware concurrency
};

enum class FinetuneScope { first_layer, last_layer, full_model };

struct EpochMetrics {
  int epoch = 0;
  Phase phase = Phase::mpt;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double actual_prune_ratio = 0.0;
  double epoch_time_s = 0.0;  // wall clock over the training batches
};

struct TrainResult {
  Checkpoint<float> checkpoint;
  std::vector<EpochMetrics> metrics;
};

// Score training: latent weights frozen, masks recomputed from the scores
// every iteration, optimizer steps applied to the raw power-prop parameters.
TrainResult train_mpt(const TrainConfig& config, const Dataset& train,
                      const Dataset& test);
TrainResult train_mpt(const NetworkSpec& spec, const TrainConfig& config,
                      const Dataset& train, const Dataset& test);

// Weight finetuning: masks and scores frozen, latent weights in scope updated
// through the binarization (straight-through with mask gating); inference
// stays binarized with the scale recomputed from the live weights.
TrainResult finetune(Checkpoint<float> ckpt, FinetuneScope scope,
                     const TrainConfig& config, const Dataset& train,
                     const Dataset& test);

// Top-1 accuracy of the masked binarized model on a dataset.
double evaluate(Checkpoint<float>& ckpt, const Dataset& data, int batch_size,
                int threads = 0);
double evaluate_effective(const NetworkSpec& spec,
                          const std::vector<Tensor<float>>& eff_weights,
                          const Dataset& data, int batch_size, int threads = 0);

// CSV contract: header epoch,phase,train_loss,test_accuracy,
// actual_prune_ratio,epoch_time_s.
std::string metrics_csv(const std::vector<EpochMetrics>& metrics);
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics);

const char* finetune_scope_name(FinetuneScope scope);

}  // namespace mpt

#endif  // MPT_TRAINER_HPP
