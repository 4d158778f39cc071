#ifndef MPT_SPARSITY_HPP
#define MPT_SPARSITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mpt/errors.hpp"
#include "mpt/network.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

struct LayerKernelCensus {
  int layer_id = 0;  // index into NetworkSpec::layers
  int64_t total_kernels = 0;
  int64_t zero_kernels = 0;
  int kernel_size = 0;
  int in_channels = 0;
  int out_channels = 0;
  int64_t feature_map_size = 0;  // output spatial extent D
};

// Zero-kernel census over the conv layers: a kernel (one k x k mask slice at
// a fixed channel pair) counts as zero iff every entry is 0. Masks are given
// per prunable layer in spec order; non-conv entries are skipped with a
// notice.
std::vector<LayerKernelCensus> count_zero_kernels(
    const NetworkSpec& spec, const std::vector<Tensor<uint8_t>>& prunable_masks,
    std::vector<std::string>* notices = nullptr);

struct AccelerationRate {
  uint64_t dense_macs = 0;   // sum over conv layers of N*M*D*D*k*k
  uint64_t sparse_macs = 0;  // sum over conv layers of P*D*D*k*k
  double rate() const {
    return static_cast<double>(dense_macs) / static_cast<double>(sparse_macs);
  }
};

// Ratio of dense to kernel-sparse multiply-accumulate counts over all conv
// layers, exact integer arithmetic.
AccelerationRate acceleration_rate(const NetworkSpec& spec,
                                   const std::vector<Tensor<uint8_t>>& prunable_masks);

// MACs of the linear layers (reported separately; the AR formula is conv-only).
uint64_t linear_mac_count(const NetworkSpec& spec);

struct SparsityReport {
  std::vector<LayerKernelCensus> per_layer;
  double acceleration_rate = 1.0;
  double zero_kernel_fraction = 0.0;
  double actual_prune_ratio = 0.0;
  uint64_t conv_macs_dense = 0;
  uint64_t conv_macs_sparse = 0;
  uint64_t linear_macs = 0;
  std::vector<std::string> notices;
};

SparsityReport build_sparsity_report(const NetworkSpec& spec,
                                     const std::vector<Tensor<uint8_t>>& prunable_masks);

std::string sparsity_report_json(const SparsityReport& report);

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 edges
  std::vector<int64_t> counts;    // bins entries, sums to the population
};

Histogram histogram_of(const double* values, int64_t n, int bins);

template <typename T>
Histogram score_histogram(const Tensor<T>& values, int bins) {
  std::vector<double> v(values.data.begin(), values.data.end());
  return histogram_of(v.data(), values.numel(), bins);
}

// Two columns: bin_left_edge,count.
std::string histogram_csv(const Histogram& h);

}  // namespace mpt

#endif  // MPT_SPARSITY_HPP
