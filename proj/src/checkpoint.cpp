#include "mpt/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mpt/errors.hpp"

namespace mpt {

namespace {

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw DataError("cannot write '" + path + "'");
  }
  void bytes(const void* p, size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
};

struct Reader {
  std::vector<uint8_t> buf;
  size_t pos = 0;
  std::string path;
  explicit Reader(const std::string& p) : path(p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open '" + p + "'");
    in.seekg(0, std::ios::end);
    buf.resize(static_cast<size_t>(in.tellg()));
    in.seekg(0, std::ios::beg);
    if (!buf.empty()) in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw DataError("read error on '" + p + "'");
  }
  const uint8_t* take(size_t n) {
    if (pos + n > buf.size())
      throw DataError("truncated checkpoint '" + path + "'");
    const uint8_t* p = buf.data() + pos;
    pos += n;
    return p;
  }
  uint8_t u8() { return *take(1); }
  uint32_t u32() {
    const uint8_t* p = take(4);
    return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
           (uint32_t(p[3]) << 24);
  }
  uint64_t u64() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    return lo | (hi << 32);
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

std::vector<uint8_t> pack_mask_bits(const Tensor<uint8_t>& mask) {
  std::vector<uint8_t> bytes((static_cast<size_t>(mask.numel()) + 7) / 8, 0);
  for (int64_t i = 0; i < mask.numel(); ++i)
    if (mask[i]) bytes[static_cast<size_t>(i / 8)] |= uint8_t(1u << (i % 8));
  return bytes;
}

void unpack_mask_bits(const std::vector<uint8_t>& bytes, Tensor<uint8_t>& mask) {
  if (bytes.size() != (static_cast<size_t>(mask.numel()) + 7) / 8)
    throw DataError("mask byte count does not match tensor size");
  for (int64_t i = 0; i < mask.numel(); ++i)
    mask[i] = (bytes[static_cast<size_t>(i / 8)] >> (i % 8)) & 1u;
}

void save_checkpoint(const Checkpoint<float>& ckpt, const std::string& path) {
  Writer w(path);
  w.bytes("MPT1", 4);
  w.u32(kCheckpointVersion);
  std::string spec_text = serialize_spec(ckpt.spec);
  w.u32(static_cast<uint32_t>(spec_text.size()));
  w.bytes(spec_text.data(), spec_text.size());
  for (const PrunableTensor<float>& p : ckpt.prunable) {
    w.u32(static_cast<uint32_t>(p.weights.shape.size()));
    for (int64_t d : p.weights.shape) w.u32(static_cast<uint32_t>(d));
    for (float v : p.weights.data) w.f32(v);
    for (float v : p.scores.data) w.f32(v);
    std::vector<uint8_t> mask_bytes = pack_mask_bits(p.mask);
    w.bytes(mask_bytes.data(), mask_bytes.size());
    w.f32(static_cast<float>(ckpt.alpha));
    w.f32(p.scale);
  }
  w.u64(ckpt.seed);
  w.u8(static_cast<uint8_t>(ckpt.phase));
  if (!w.out) throw DataError("write error on '" + path + "'");
}

Checkpoint<float> load_checkpoint(const std::string& path) {
  Reader r(path);
  const uint8_t* magic = r.take(4);
  if (std::memcmp(magic, "MPT1", 4) != 0)
    throw DataError("bad magic in '" + path + "' (not an MPT1 checkpoint)");
  uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  uint32_t spec_len = r.u32();
  const uint8_t* spec_bytes = r.take(spec_len);
  Checkpoint<float> ckpt;
  ckpt.spec = parse_spec(std::string(reinterpret_cast<const char*>(spec_bytes), spec_len));

  std::vector<int> prunable = prunable_layer_indices(ckpt.spec);
  float alpha = 1.0f;
  for (size_t j = 0; j < prunable.size(); ++j) {
    const LayerSpec& layer_spec = ckpt.spec.layers[static_cast<size_t>(prunable[j])];
    std::vector<int64_t> expect = detail::weight_shape(layer_spec);
    uint32_t rank = r.u32();
    std::vector<int64_t> dims(rank);
    for (uint32_t d = 0; d < rank; ++d) dims[d] = r.u32();
    if (dims != expect)
      throw DataError("checkpoint layer " + std::to_string(j) + " shape " +
                      Tensor<float>::shape_str(dims) + " does not match spec " +
                      Tensor<float>::shape_str(expect));
    PrunableTensor<float> p;
    p.layer_index = prunable[j];
    p.weights = Tensor<float>(dims);
    p.scores = Tensor<float>(dims);
    p.mask = Tensor<uint8_t>(dims);
    for (int64_t i = 0; i < p.weights.numel(); ++i) p.weights[i] = r.f32();
    for (int64_t i = 0; i < p.scores.numel(); ++i) p.scores[i] = r.f32();
    size_t mask_bytes = (static_cast<size_t>(p.mask.numel()) + 7) / 8;
    const uint8_t* mb = r.take(mask_bytes);
    unpack_mask_bits(std::vector<uint8_t>(mb, mb + mask_bytes), p.mask);
    float layer_alpha = r.f32();
    if (j == 0) {
      alpha = layer_alpha;
    } else if (layer_alpha != alpha) {
      throw DataError("inconsistent alpha across checkpoint layers");
    }
    p.scale = r.f32();

    // Stored scale must agree with an Eq.-(2) recomputation from W and M.
    int64_t kept = 0;
    double sum = 0.0;
    for (int64_t i = 0; i < p.weights.numel(); ++i)
      if (p.mask[i]) {
        ++kept;
        sum += std::abs(static_cast<double>(p.weights[i]));
      }
    if (kept > 0) {
      float recomputed = static_cast<float>(sum / static_cast<double>(kept));
      float tol = 1e-6f * std::max(1.0f, std::abs(recomputed));
      if (std::abs(recomputed - p.scale) > tol)
        throw DataError("checkpoint layer " + std::to_string(j) +
                        " violates the scale invariant: stored " +
                        std::to_string(p.scale) + ", recomputed " +
                        std::to_string(recomputed));
    }
    ckpt.prunable.push_back(std::move(p));
  }
  ckpt.alpha = alpha;
  ckpt.seed = r.u64();
  ckpt.phase = r.u8() == 0 ? Phase::mpt : Phase::finetune;
  if (r.pos != r.buf.size())
    throw DataError("trailing bytes in checkpoint '" + path + "'");
  return ckpt;
}

}  // namespace mpt
