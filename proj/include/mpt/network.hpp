#ifndef MPT_NETWORK_HPP
#define MPT_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace mpt {

enum class LayerKind { conv2d, linear, relu, maxpool2x2, flatten };

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  // conv2d
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 0;
  int stride = 1;
  int padding = 0;
  // linear
  int in_features = 0;
  int out_features = 0;

  static LayerSpec conv(int in_ch, int out_ch, int k, int stride = 1, int pad = 0);
  static LayerSpec lin(int in_features, int out_features);
  static LayerSpec activation(LayerKind kind);
};

struct NetworkSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<int64_t> input_shape;  // C,H,W
  int num_classes = 0;
};

// floor((extent + 2*pad - k) / stride) + 1
int conv_out_extent(int extent, int k, int stride, int pad);

// Shape of one layer's output given its input shape (without batch dim).
std::vector<int64_t> layer_output_shape(const LayerSpec& layer,
                                        const std::vector<int64_t>& in);

// Checks layer-to-layer composition and the final linear head; throws
// ShapeError/ConfigError with the offending layer named.
void validate_spec(const NetworkSpec& spec);

// Indices into spec.layers of weight-carrying (prunable) layers, in order.
std::vector<int> prunable_layer_indices(const NetworkSpec& spec);

// Output spatial extent D of each conv layer; requires square feature maps.
std::vector<int64_t> conv_feature_map_sizes(const NetworkSpec& spec);

// CONV-2/4/6/8 family: 3x3 stride-1 pad-1 convolutions with relu, a 2x2
// maxpool after every conv pair, then flatten -> linear(256) -> relu ->
// linear(num_classes). Bias-free throughout.
NetworkSpec make_conv_family(const std::string& tag,
                             std::vector<int64_t> input_shape,
                             int num_classes);

std::string serialize_spec(const NetworkSpec& spec);
NetworkSpec parse_spec(const std::string& text);

const char* layer_kind_name(LayerKind kind);

}  // namespace mpt

#endif  // MPT_NETWORK_HPP
