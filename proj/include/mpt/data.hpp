#ifndef MPT_DATA_HPP
#define MPT_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mpt/tensor.hpp"

namespace mpt {

struct Dataset {
  Tensor<float> images;          // [N,C,H,W]
  std::vector<int32_t> labels;   // in [0, num_classes)
  int num_classes = 0;
  std::string split;

  int64_t size() const { return images.numel() ? images.dim(0) : 0; }
};

// CIFAR-10 binary batches: 3073-byte records, 1 label byte followed by 3072
// channel-major pixel bytes (R,G,B planes of 32x32, row-major). split is
// "train" (data_batch_*.bin) or "test" (test_batch.bin). subset_n > 0 loads
// the first subset_n records. Pixel values are raw 0..255.
Dataset load_cifar10(const std::string& dir, const std::string& split,
                     int64_t subset_n = 0);

// Single CIFAR-format batch file (any record count).
Dataset load_cifar10_batch(const std::string& path, int64_t max_records = 0);

// Writes images [N,3,32,32] with values 0..255 into the CIFAR batch layout.
void write_cifar10_batch(const std::string& path, const Tensor<float>& images,
                         const std::vector<int32_t>& labels);

// IDX pair (big-endian headers): images magic 0x00000803 with dims N,H,W and
// u8 pixels; labels magic 0x00000801 with dim N. Result is [N,1,H,W].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

void write_idx_images(const std::string& path, const Tensor<float>& images);
void write_idx_labels(const std::string& path, const std::vector<int32_t>& labels);

// Deterministic Gaussian class blobs: image = margin * prototype[class] +
// unit noise, class-balanced, linearly separable at the generated margin.
Dataset synth_dataset(uint64_t seed, int64_t n, int classes,
                      std::vector<int64_t> chw, const std::string& split = "train");

struct ChannelStats {
  std::vector<float> mean;
  std::vector<float> stdev;
};

// Per-channel statistics of a (training) dataset.
ChannelStats channel_stats(const Dataset& ds);

// x <- (x - mean[c]) / stdev[c]
void normalize_inplace(Dataset& ds, const ChannelStats& stats);

}  // namespace mpt

#endif  // MPT_DATA_HPP
