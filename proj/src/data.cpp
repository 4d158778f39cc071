#include "mpt/data.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mpt/errors.hpp"
#include "mpt/rng.hpp"

namespace mpt {

namespace {

constexpr int64_t kCifarRecord = 3073;  // 1 label byte + 3*32*32 pixels

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("read error on '" + path + "'");
  return bytes;
}

uint32_t read_be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
         uint32_t(p[3]);
}

void write_be32(std::ofstream& out, uint32_t v) {
  uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void append_cifar_records(const std::vector<uint8_t>& bytes, const std::string& path,
                          int64_t limit, std::vector<float>& pixels,
                          std::vector<int32_t>& labels) {
  if (bytes.empty() || static_cast<int64_t>(bytes.size()) % kCifarRecord != 0)
    throw DataError("corrupt batch '" + path + "': size " +
                    std::to_string(bytes.size()) + " is not a multiple of 3073");
  int64_t records = static_cast<int64_t>(bytes.size()) / kCifarRecord;
  if (limit > 0) records = std::min(records, limit);
  for (int64_t r = 0; r < records; ++r) {
    const uint8_t* rec = bytes.data() + r * kCifarRecord;
    if (rec[0] > 9)
      throw DataError("corrupt batch '" + path + "': label byte " +
                      std::to_string(rec[0]) + " > 9 at record " + std::to_string(r));
    labels.push_back(rec[0]);
    for (int64_t i = 0; i < kCifarRecord - 1; ++i)
      pixels.push_back(static_cast<float>(rec[1 + i]));
  }
}

}  // namespace

Dataset load_cifar10_batch(const std::string& path, int64_t max_records) {
  std::vector<float> pixels;
  std::vector<int32_t> labels;
  append_cifar_records(read_file(path), path, max_records, pixels, labels);
  Dataset ds;
  int64_t n = static_cast<int64_t>(labels.size());
  ds.images = Tensor<float>({n, 3, 32, 32}, std::move(pixels));
  ds.labels = std::move(labels);
  ds.num_classes = 10;
  return ds;
}

Dataset load_cifar10(const std::string& dir, const std::string& split, int64_t subset_n) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (split == "train") {
    for (int i = 1; i <= 5; ++i) {
      fs::path p = fs::path(dir) / ("data_batch_" + std::to_string(i) + ".bin");
      if (fs::exists(p)) files.push_back(p.string());
    }
    if (files.empty())
      throw DataError("no data_batch_*.bin files under '" + dir + "'");
  } else if (split == "test") {
    fs::path p = fs::path(dir) / "test_batch.bin";
    if (!fs::exists(p)) throw DataError("missing test_batch.bin under '" + dir + "'");
    files.push_back(p.string());
  } else {
    throw ConfigError("cifar10 split must be train or test, got '" + split + "'");
  }

  std::vector<float> pixels;
  std::vector<int32_t> labels;
  for (const std::string& f : files) {
    int64_t remaining = subset_n > 0 ? subset_n - static_cast<int64_t>(labels.size()) : 0;
    if (subset_n > 0 && remaining <= 0) break;
    append_cifar_records(read_file(f), f, remaining, pixels, labels);
  }
  if (subset_n > 0 && static_cast<int64_t>(labels.size()) < subset_n)
    throw DataError("requested subset of " + std::to_string(subset_n) +
                    " records but only " + std::to_string(labels.size()) +
                    " available under '" + dir + "'");

  Dataset ds;
  int64_t n = static_cast<int64_t>(labels.size());
  ds.images = Tensor<float>({n, 3, 32, 32}, std::move(pixels));
  ds.labels = std::move(labels);
  ds.num_classes = 10;
  ds.split = split;
  return ds;
}

void write_cifar10_batch(const std::string& path, const Tensor<float>& images,
                         const std::vector<int32_t>& labels) {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != 32 || images.dim(3) != 32)
    throw ShapeError("cifar batch images must be [N,3,32,32], got " + images.shape_str());
  if (images.dim(0) != static_cast<int64_t>(labels.size()))
    throw ShapeError("cifar batch label count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  const int64_t plane = 3 * 32 * 32;
  for (int64_t r = 0; r < images.dim(0); ++r) {
    if (labels[static_cast<size_t>(r)] < 0 || labels[static_cast<size_t>(r)] > 9)
      throw DataError("cifar label out of range");
    uint8_t lab = static_cast<uint8_t>(labels[static_cast<size_t>(r)]);
    out.put(static_cast<char>(lab));
    for (int64_t i = 0; i < plane; ++i) {
      float v = images[r * plane + i];
      uint8_t b = static_cast<uint8_t>(std::min(255.0f, std::max(0.0f, v)));
      out.put(static_cast<char>(b));
    }
  }
  if (!out) throw DataError("write error on '" + path + "'");
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::vector<uint8_t> img = read_file(images_path);
  std::vector<uint8_t> lab = read_file(labels_path);
  if (img.size() < 16) throw DataError("idx image file '" + images_path + "' truncated");
  if (lab.size() < 8) throw DataError("idx label file '" + labels_path + "' truncated");
  uint32_t img_magic = read_be32(img.data());
  uint32_t lab_magic = read_be32(lab.data());
  if (img_magic != 0x00000803u)
    throw DataError("bad magic in '" + images_path + "': expected 0x00000803");
  if (lab_magic != 0x00000801u)
    throw DataError("bad magic in '" + labels_path + "': expected 0x00000801");
  int64_t n = read_be32(img.data() + 4);
  int64_t h = read_be32(img.data() + 8);
  int64_t w = read_be32(img.data() + 12);
  int64_t n_lab = read_be32(lab.data() + 4);
  if (n != n_lab)
    throw DataError("idx count mismatch: " + std::to_string(n) + " images vs " +
                    std::to_string(n_lab) + " labels");
  if (static_cast<int64_t>(img.size()) != 16 + n * h * w)
    throw DataError("idx image file '" + images_path + "' has wrong size");
  if (static_cast<int64_t>(lab.size()) != 8 + n)
    throw DataError("idx label file '" + labels_path + "' has wrong size");

  Dataset ds;
  ds.images = Tensor<float>({n, 1, h, w});
  for (int64_t i = 0; i < n * h * w; ++i)
    ds.images[i] = static_cast<float>(img[static_cast<size_t>(16 + i)]);
  ds.labels.resize(static_cast<size_t>(n));
  int32_t max_label = 0;
  for (int64_t i = 0; i < n; ++i) {
    ds.labels[static_cast<size_t>(i)] = lab[static_cast<size_t>(8 + i)];
    max_label = std::max(max_label, ds.labels[static_cast<size_t>(i)]);
  }
  ds.num_classes = max_label + 1;
  return ds;
}

void write_idx_images(const std::string& path, const Tensor<float>& images) {
  if (images.rank() != 4 || images.dim(1) != 1)
    throw ShapeError("idx images must be [N,1,H,W], got " + images.shape_str());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_be32(out, 0x00000803u);
  write_be32(out, static_cast<uint32_t>(images.dim(0)));
  write_be32(out, static_cast<uint32_t>(images.dim(2)));
  write_be32(out, static_cast<uint32_t>(images.dim(3)));
  for (int64_t i = 0; i < images.numel(); ++i) {
    float v = images[i];
    out.put(static_cast<char>(static_cast<uint8_t>(std::min(255.0f, std::max(0.0f, v)))));
  }
  if (!out) throw DataError("write error on '" + path + "'");
}

void write_idx_labels(const std::string& path, const std::vector<int32_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_be32(out, 0x00000801u);
  write_be32(out, static_cast<uint32_t>(labels.size()));
  for (int32_t l : labels) out.put(static_cast<char>(static_cast<uint8_t>(l)));
  if (!out) throw DataError("write error on '" + path + "'");
}

Dataset synth_dataset(uint64_t seed, int64_t n, int classes,
                      std::vector<int64_t> chw, const std::string& split) {
  if (classes < 1) throw ConfigError("synthetic dataset needs classes >= 1");
  if (n < classes) throw ConfigError("synthetic dataset needs n >= classes");
  if (chw.size() != 3) throw ConfigError("synthetic image shape must be C,H,W");
  int64_t dim = chw[0] * chw[1] * chw[2];

  // Unit-norm class prototypes; shared across splits of the same seed.
  std::vector<std::vector<double>> protos(static_cast<size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    CounterRng rng(seed, rng_stream::kSynthProto + static_cast<uint64_t>(c));
    auto& t = protos[static_cast<size_t>(c)];
    t.resize(static_cast<size_t>(dim));
    double norm = 0.0;
    for (auto& v : t) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : t) v /= norm;
  }

  constexpr double kMargin = 4.0;
  uint64_t noise_tag = split == "train" ? 0 : 1;
  Dataset ds;
  ds.images = Tensor<float>({n, chw[0], chw[1], chw[2]});
  ds.labels.resize(static_cast<size_t>(n));
  ds.num_classes = classes;
  ds.split = split;
  CounterRng noise(seed, rng_stream::kSynthNoise + noise_tag);
  for (int64_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i % classes);
    ds.labels[static_cast<size_t>(i)] = c;
    const auto& proto = protos[static_cast<size_t>(c)];
    float* img = ds.images.data.data() + i * dim;
    for (int64_t j = 0; j < dim; ++j)
      img[j] = static_cast<float>(kMargin * proto[static_cast<size_t>(j)] + noise.normal());
  }
  return ds;
}

ChannelStats channel_stats(const Dataset& ds) {
  if (ds.images.rank() != 4) throw ShapeError("dataset images must be [N,C,H,W]");
  int64_t n = ds.images.dim(0), c = ds.images.dim(1);
  int64_t plane = ds.images.dim(2) * ds.images.dim(3);
  ChannelStats stats;
  stats.mean.assign(static_cast<size_t>(c), 0.0f);
  stats.stdev.assign(static_cast<size_t>(c), 0.0f);
  for (int64_t ch = 0; ch < c; ++ch) {
    double sum = 0.0, sq = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const float* p = ds.images.data.data() + (i * c + ch) * plane;
      for (int64_t j = 0; j < plane; ++j) {
        sum += p[j];
        sq += static_cast<double>(p[j]) * p[j];
      }
    }
    double count = static_cast<double>(n * plane);
    double mean = sum / count;
    double sd = std::sqrt(std::max(0.0, sq / count - mean * mean));
    stats.mean[static_cast<size_t>(ch)] = static_cast<float>(mean);
    stats.stdev[static_cast<size_t>(ch)] = static_cast<float>(sd > 0.0 ? sd : 1.0);
  }
  return stats;
}

void normalize_inplace(Dataset& ds, const ChannelStats& stats) {
  int64_t n = ds.images.dim(0), c = ds.images.dim(1);
  int64_t plane = ds.images.dim(2) * ds.images.dim(3);
  if (static_cast<size_t>(c) != stats.mean.size())
    throw ShapeError("channel stats do not match dataset channels");
  for (int64_t i = 0; i < n; ++i)
    for (int64_t ch = 0; ch < c; ++ch) {
      float* p = ds.images.data.data() + (i * c + ch) * plane;
      float m = stats.mean[static_cast<size_t>(ch)];
      float s = stats.stdev[static_cast<size_t>(ch)];
      for (int64_t j = 0; j < plane; ++j) p[j] = (p[j] - m) / s;
    }
}

}  // namespace mpt
