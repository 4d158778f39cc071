#include "mpt/sparsity.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mpt {

namespace {

struct ConvLayerView {
  size_t prunable_ordinal;
  int layer_id;
  const LayerSpec* layer;
  int64_t d;  // output spatial extent
};

std::vector<ConvLayerView> conv_views(const NetworkSpec& spec, size_t num_masks) {
  std::vector<int> prunable = prunable_layer_indices(spec);
  if (prunable.size() != num_masks)
    throw ConfigError("expected " + std::to_string(prunable.size()) +
                      " prunable masks, got " + std::to_string(num_masks));
  std::vector<int64_t> d_sizes = conv_feature_map_sizes(spec);
  std::vector<ConvLayerView> views;
  size_t conv_seen = 0;
  for (size_t j = 0; j < prunable.size(); ++j) {
    const LayerSpec& l = spec.layers[static_cast<size_t>(prunable[j])];
    if (l.kind != LayerKind::conv2d) continue;
    views.push_back(ConvLayerView{j, prunable[j], &l, d_sizes[conv_seen++]});
  }
  return views;
}

int64_t zero_kernels_in(const Tensor<uint8_t>& mask, const LayerSpec& layer) {
  const int64_t M = layer.out_channels, N = layer.in_channels;
  const int64_t kk = static_cast<int64_t>(layer.kernel_size) * layer.kernel_size;
  int64_t zero = 0;
  for (int64_t mn = 0; mn < M * N; ++mn) {
    const uint8_t* slice = mask.data.data() + mn * kk;
    bool all_zero = true;
    for (int64_t i = 0; i < kk; ++i)
      if (slice[i]) {
        all_zero = false;
        break;
      }
    if (all_zero) ++zero;
  }
  return zero;
}

}  // namespace

std::vector<LayerKernelCensus> count_zero_kernels(
    const NetworkSpec& spec, const std::vector<Tensor<uint8_t>>& prunable_masks,
    std::vector<std::string>* notices) {
  std::vector<int> prunable = prunable_layer_indices(spec);
  if (prunable.size() != prunable_masks.size())
    throw ConfigError("expected " + std::to_string(prunable.size()) +
                      " prunable masks, got " + std::to_string(prunable_masks.size()));
  std::vector<LayerKernelCensus> census;
  std::vector<int64_t> d_sizes = conv_feature_map_sizes(spec);
  size_t conv_seen = 0;
  for (size_t j = 0; j < prunable.size(); ++j) {
    const LayerSpec& l = spec.layers[static_cast<size_t>(prunable[j])];
    if (l.kind != LayerKind::conv2d) {
      if (notices)
        notices->push_back("layer " + std::to_string(prunable[j]) +
                           " is not conv2d: skipped in kernel census");
      continue;
    }
    LayerKernelCensus c;
    c.layer_id = prunable[j];
    c.kernel_size = l.kernel_size;
    c.in_channels = l.in_channels;
    c.out_channels = l.out_channels;
    c.total_kernels = static_cast<int64_t>(l.out_channels) * l.in_channels;
    c.zero_kernels = zero_kernels_in(prunable_masks[j], l);
    c.feature_map_size = d_sizes[conv_seen++];
    census.push_back(c);
  }
  return census;
}

AccelerationRate acceleration_rate(const NetworkSpec& spec,
                                   const std::vector<Tensor<uint8_t>>& prunable_masks) {
  AccelerationRate ar;
  for (const ConvLayerView& v : conv_views(spec, prunable_masks.size())) {
    const LayerSpec& l = *v.layer;
    uint64_t kk = static_cast<uint64_t>(l.kernel_size) * l.kernel_size;
    uint64_t dd = static_cast<uint64_t>(v.d) * static_cast<uint64_t>(v.d);
    uint64_t total = static_cast<uint64_t>(l.out_channels) * l.in_channels;
    uint64_t zero = static_cast<uint64_t>(zero_kernels_in(prunable_masks[v.prunable_ordinal], l));
    uint64_t surviving = total - zero;
    if (surviving == 0 && total > 0)
      throw ConfigError("degenerate layer " + std::to_string(v.layer_id) +
                        ": every kernel is zero");
    ar.dense_macs += total * dd * kk;
    ar.sparse_macs += surviving * dd * kk;
  }
  if (ar.dense_macs == 0) {
    // No conv layers at all: the ratio degenerates to 1.
    ar.dense_macs = ar.sparse_macs = 1;
  }
  return ar;
}

uint64_t linear_mac_count(const NetworkSpec& spec) {
  uint64_t macs = 0;
  for (const LayerSpec& l : spec.layers)
    if (l.kind == LayerKind::linear)
      macs += static_cast<uint64_t>(l.in_features) * l.out_features;
  return macs;
}

SparsityReport build_sparsity_report(const NetworkSpec& spec,
                                     const std::vector<Tensor<uint8_t>>& prunable_masks) {
  SparsityReport report;
  report.per_layer = count_zero_kernels(spec, prunable_masks, &report.notices);
  AccelerationRate ar = acceleration_rate(spec, prunable_masks);
  report.acceleration_rate = ar.rate();
  report.conv_macs_dense = ar.dense_macs;
  report.conv_macs_sparse = ar.sparse_macs;
  report.linear_macs = linear_mac_count(spec);

  int64_t total_kernels = 0, zero_kernels = 0;
  for (const LayerKernelCensus& c : report.per_layer) {
    total_kernels += c.total_kernels;
    zero_kernels += c.zero_kernels;
  }
  report.zero_kernel_fraction =
      total_kernels ? static_cast<double>(zero_kernels) / static_cast<double>(total_kernels)
                    : 0.0;

  int64_t total = 0, pruned = 0;
  for (const Tensor<uint8_t>& m : prunable_masks) {
    total += m.numel();
    for (int64_t i = 0; i < m.numel(); ++i)
      if (!m[i]) ++pruned;
  }
  report.actual_prune_ratio =
      total ? static_cast<double>(pruned) / static_cast<double>(total) : 0.0;
  return report;
}

std::string sparsity_report_json(const SparsityReport& report) {
  nlohmann::json j;
  j["per_layer"] = nlohmann::json::array();
  for (const LayerKernelCensus& c : report.per_layer) {
    j["per_layer"].push_back({{"layer_id", c.layer_id},
                              {"total_kernels", c.total_kernels},
                              {"zero_kernels", c.zero_kernels},
                              {"kernel_size", c.kernel_size},
                              {"in_channels", c.in_channels},
                              {"out_channels", c.out_channels},
                              {"feature_map_size", c.feature_map_size}});
  }
  j["acceleration_rate"] = report.acceleration_rate;
  j["zero_kernel_fraction"] = report.zero_kernel_fraction;
  j["actual_prune_ratio"] = report.actual_prune_ratio;
  j["conv_macs_dense"] = report.conv_macs_dense;
  j["conv_macs_sparse"] = report.conv_macs_sparse;
  j["linear_macs"] = report.linear_macs;
  j["notices"] = report.notices;
  return j.dump(2) + "\n";
}

Histogram histogram_of(const double* values, int64_t n, int bins) {
  if (bins < 1) throw ConfigError("histogram needs bins >= 1");
  if (n < 1) throw ConfigError("histogram of an empty layer");
  double lo = values[0], hi = values[0];
  for (int64_t i = 1; i < n; ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  double width = (hi - lo) / static_cast<double>(bins);
  Histogram h;
  h.bin_edges.resize(static_cast<size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    h.bin_edges[static_cast<size_t>(b)] = lo + width * static_cast<double>(b);
  h.bin_edges.back() = hi;
  h.counts.assign(static_cast<size_t>(bins), 0);
  for (int64_t i = 0; i < n; ++i) {
    int b = width > 0.0 ? static_cast<int>((values[i] - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<size_t>(b)];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left_edge,count\n";
  char buf[64];
  for (size_t b = 0; b < h.counts.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.9g,%lld\n", h.bin_edges[b],
                  static_cast<long long>(h.counts[b]));
    out += buf;
  }
  return out;
}

}  // namespace mpt
