#include "mpt/network.hpp"

#include <map>
#include <sstream>

#include "mpt/errors.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

LayerSpec LayerSpec::conv(int in_ch, int out_ch, int k, int stride, int pad) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in_channels = in_ch;
  s.out_channels = out_ch;
  s.kernel_size = k;
  s.stride = stride;
  s.padding = pad;
  return s;
}

LayerSpec LayerSpec::lin(int in_features, int out_features) {
  LayerSpec s;
  s.kind = LayerKind::linear;
  s.in_features = in_features;
  s.out_features = out_features;
  return s;
}

LayerSpec LayerSpec::activation(LayerKind kind) {
  LayerSpec s;
  s.kind = kind;
  return s;
}

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::linear: return "linear";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2x2: return "maxpool2x2";
    case LayerKind::flatten: return "flatten";
  }
  return "?";
}

int conv_out_extent(int extent, int k, int stride, int pad) {
  int span = extent + 2 * pad - k;
  if (span < 0)
    throw ShapeError("kernel size " + std::to_string(k) +
                     " exceeds padded extent " + std::to_string(extent + 2 * pad));
  return span / stride + 1;
}

std::vector<int64_t> layer_output_shape(const LayerSpec& layer,
                                        const std::vector<int64_t>& in) {
  switch (layer.kind) {
    case LayerKind::conv2d: {
      if (in.size() != 3)
        throw ShapeError("conv2d expects C,H,W input, got " + Tensor<float>::shape_str(in));
      if (in[0] != layer.in_channels)
        throw ShapeError("conv2d expects " + std::to_string(layer.in_channels) +
                         " input channels, got " + std::to_string(in[0]));
      int oh = conv_out_extent(static_cast<int>(in[1]), layer.kernel_size,
                               layer.stride, layer.padding);
      int ow = conv_out_extent(static_cast<int>(in[2]), layer.kernel_size,
                               layer.stride, layer.padding);
      return {layer.out_channels, oh, ow};
    }
    case LayerKind::linear: {
      if (in.size() != 1)
        throw ShapeError("linear expects flat input, got " + Tensor<float>::shape_str(in));
      if (in[0] != layer.in_features)
        throw ShapeError("linear expects " + std::to_string(layer.in_features) +
                         " features, got " + std::to_string(in[0]));
      return {layer.out_features};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::maxpool2x2: {
      if (in.size() != 3)
        throw ShapeError("maxpool2x2 expects C,H,W input, got " + Tensor<float>::shape_str(in));
      if (in[1] % 2 != 0 || in[2] % 2 != 0)
        throw ShapeError("maxpool2x2 requires even spatial extents, got " +
                         Tensor<float>::shape_str(in));
      return {in[0], in[1] / 2, in[2] / 2};
    }
    case LayerKind::flatten: {
      int64_t n = 1;
      for (int64_t e : in) n *= e;
      return {n};
    }
  }
  throw ShapeError("unknown layer kind");
}

void validate_spec(const NetworkSpec& spec) {
  if (spec.layers.empty()) throw ConfigError("network has no layers");
  if (spec.num_classes < 1) throw ConfigError("num_classes must be >= 1");
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.kind == LayerKind::conv2d) {
      if (l.in_channels < 1 || l.out_channels < 1 || l.kernel_size < 1 ||
          l.stride < 1 || l.padding < 0)
        throw ConfigError("layer " + std::to_string(i) + ": invalid conv2d parameters");
    }
    if (l.kind == LayerKind::linear && (l.in_features < 1 || l.out_features < 1))
      throw ConfigError("layer " + std::to_string(i) + ": invalid linear parameters");
  }
  std::vector<int64_t> shape = spec.input_shape;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    try {
      shape = layer_output_shape(spec.layers[i], shape);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" +
                       layer_kind_name(spec.layers[i].kind) + "): " + e.what());
    }
  }
  const LayerSpec& last = spec.layers.back();
  if (last.kind != LayerKind::linear || last.out_features != spec.num_classes)
    throw ConfigError("final layer must be linear with out_features == num_classes");
}

std::vector<int> prunable_layer_indices(const NetworkSpec& spec) {
  std::vector<int> out;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    LayerKind k = spec.layers[i].kind;
    if (k == LayerKind::conv2d || k == LayerKind::linear)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int64_t> conv_feature_map_sizes(const NetworkSpec& spec) {
  std::vector<int64_t> sizes;
  std::vector<int64_t> shape = spec.input_shape;
  for (const LayerSpec& l : spec.layers) {
    std::vector<int64_t> out = layer_output_shape(l, shape);
    if (l.kind == LayerKind::conv2d) {
      if (out[1] != out[2])
        throw ConfigError("non-square feature map " + Tensor<float>::shape_str(out));
      sizes.push_back(out[1]);
    }
    shape = std::move(out);
  }
  return sizes;
}

NetworkSpec make_conv_family(const std::string& tag,
                             std::vector<int64_t> input_shape,
                             int num_classes) {
  static const std::map<std::string, std::vector<int>> widths = {
      {"conv2", {32, 32}},
      {"conv4", {32, 32, 64, 64}},
      {"conv6", {32, 32, 64, 64, 128, 128}},
      {"conv8", {32, 32, 64, 64, 128, 128, 256, 256}},
  };
  auto it = widths.find(tag);
  if (it == widths.end())
    throw ConfigError("unknown architecture '" + tag +
                      "' (expected conv2|conv4|conv6|conv8)");
  if (input_shape.size() != 3)
    throw ConfigError("input shape must be C,H,W");

  NetworkSpec spec;
  spec.name = tag;
  spec.input_shape = input_shape;
  spec.num_classes = num_classes;

  int in_ch = static_cast<int>(input_shape[0]);
  const std::vector<int>& w = it->second;
  for (size_t i = 0; i < w.size(); ++i) {
    spec.layers.push_back(LayerSpec::conv(in_ch, w[i], 3, 1, 1));
    spec.layers.push_back(LayerSpec::activation(LayerKind::relu));
    in_ch = w[i];
    if (i % 2 == 1)
      spec.layers.push_back(LayerSpec::activation(LayerKind::maxpool2x2));
  }
  spec.layers.push_back(LayerSpec::activation(LayerKind::flatten));

  std::vector<int64_t> shape = input_shape;
  for (const LayerSpec& l : spec.layers) shape = layer_output_shape(l, shape);
  constexpr int kHidden = 256;
  spec.layers.push_back(LayerSpec::lin(static_cast<int>(shape[0]), kHidden));
  spec.layers.push_back(LayerSpec::activation(LayerKind::relu));
  spec.layers.push_back(LayerSpec::lin(kHidden, num_classes));

  validate_spec(spec);
  return spec;
}

std::string serialize_spec(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "name=" << spec.name << "\n";
  os << "input=";
  for (size_t i = 0; i < spec.input_shape.size(); ++i)
    os << (i ? "," : "") << spec.input_shape[i];
  os << "\nclasses=" << spec.num_classes << "\n";
  for (const LayerSpec& l : spec.layers) {
    os << "layer=" << layer_kind_name(l.kind);
    if (l.kind == LayerKind::conv2d)
      os << ",in=" << l.in_channels << ",out=" << l.out_channels
         << ",k=" << l.kernel_size << ",stride=" << l.stride
         << ",pad=" << l.padding;
    else if (l.kind == LayerKind::linear)
      os << ",in=" << l.in_features << ",out=" << l.out_features;
    os << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("bad integer for ") + what + ": '" + s + "'");
  }
}

}  // namespace

NetworkSpec parse_spec(const std::string& text) {
  NetworkSpec spec;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("bad spec line: '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "name") {
      spec.name = val;
    } else if (key == "input") {
      spec.input_shape.clear();
      for (const std::string& p : split(val, ','))
        spec.input_shape.push_back(parse_int(p, "input shape"));
    } else if (key == "classes") {
      spec.num_classes = parse_int(val, "classes");
    } else if (key == "layer") {
      std::vector<std::string> parts = split(val, ',');
      LayerSpec l;
      const std::string& kind = parts[0];
      std::map<std::string, int> kv;
      for (size_t i = 1; i < parts.size(); ++i) {
        size_t e = parts[i].find('=');
        if (e == std::string::npos)
          throw DataError("bad layer attribute: '" + parts[i] + "'");
        kv[parts[i].substr(0, e)] = parse_int(parts[i].substr(e + 1), "layer attribute");
      }
      if (kind == "conv2d") {
        l = LayerSpec::conv(kv.at("in"), kv.at("out"), kv.at("k"),
                            kv.at("stride"), kv.at("pad"));
      } else if (kind == "linear") {
        l = LayerSpec::lin(kv.at("in"), kv.at("out"));
      } else if (kind == "relu") {
        l = LayerSpec::activation(LayerKind::relu);
      } else if (kind == "maxpool2x2") {
        l = LayerSpec::activation(LayerKind::maxpool2x2);
      } else if (kind == "flatten") {
        l = LayerSpec::activation(LayerKind::flatten);
      } else {
        throw DataError("unknown layer kind '" + kind + "'");
      }
      spec.layers.push_back(l);
    } else {
      throw DataError("unknown spec key '" + key + "'");
    }
  }
  try {
    validate_spec(spec);
  } catch (const std::exception& e) {
    throw DataError(std::string("invalid network spec: ") + e.what());
  }
  return spec;
}

}  // namespace mpt
