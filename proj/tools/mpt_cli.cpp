// Command-line entry point: train / finetune / analyze / infer / bench-select.
// Exit codes: 0 success, 2 invalid flags, 3 data errors, 4 training abort,
// 5 dense/sparse equivalence violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "mpt/bench_select.hpp"
#include "mpt/checkpoint.hpp"
#include "mpt/data.hpp"
#include "mpt/errors.hpp"
#include "mpt/sparse_infer.hpp"
#include "mpt/sparsity.hpp"
#include "mpt/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct EquivalenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ----- shared dataset options -----

struct DataOptions {
  std::string dataset;  // cifar10 | idx | synthetic
  std::string data_dir;
  int64_t subset = 0;
  int64_t test_subset = 0;
  int classes = 10;
  int64_t synth_n = 2000;
  int64_t synth_test_n = 500;
  std::vector<int64_t> synth_shape = {3, 16, 16};
  uint64_t seed = 1;
};

void add_data_options(CLI::App* cmd, DataOptions& opt) {
  cmd->add_option("--dataset", opt.dataset, "Dataset kind: cifar10|idx|synthetic")
      ->required()
      ->check(CLI::IsMember({"cifar10", "idx", "synthetic"}));
  cmd->add_option("--data", opt.data_dir, "Dataset directory (cifar10/idx)");
  cmd->add_option("--subset", opt.subset, "Use only the first N training records");
  cmd->add_option("--test-subset", opt.test_subset, "Use only the first N test records");
  cmd->add_option("--classes", opt.classes, "Class count for synthetic data");
  cmd->add_option("--synth-n", opt.synth_n, "Synthetic training set size");
  cmd->add_option("--synth-test-n", opt.synth_test_n, "Synthetic test set size");
  cmd->add_option("--synth-shape", opt.synth_shape, "Synthetic image shape C H W")
      ->expected(3);
}

mpt::Dataset take_first(mpt::Dataset ds, int64_t n) {
  if (n <= 0 || n >= ds.size()) return ds;
  int64_t sample = ds.images.numel() / ds.images.dim(0);
  std::vector<int64_t> shape = ds.images.shape;
  shape[0] = n;
  mpt::Dataset out;
  out.images = mpt::Tensor<float>(shape,
      std::vector<float>(ds.images.data.begin(), ds.images.data.begin() + n * sample));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + n);
  out.num_classes = ds.num_classes;
  out.split = ds.split;
  return out;
}

std::pair<mpt::Dataset, mpt::Dataset> load_datasets(const DataOptions& opt) {
  mpt::Dataset train, test;
  if (opt.dataset == "cifar10") {
    if (opt.data_dir.empty()) throw mpt::ConfigError("--data is required for cifar10");
    train = mpt::load_cifar10(opt.data_dir, "train", opt.subset);
    test = mpt::load_cifar10(opt.data_dir, "test", opt.test_subset);
  } else if (opt.dataset == "idx") {
    if (opt.data_dir.empty()) throw mpt::ConfigError("--data is required for idx");
    fs::path dir(opt.data_dir);
    train = mpt::load_idx((dir / "train-images-idx3-ubyte").string(),
                          (dir / "train-labels-idx1-ubyte").string());
    test = mpt::load_idx((dir / "t10k-images-idx3-ubyte").string(),
                         (dir / "t10k-labels-idx1-ubyte").string());
    train = take_first(std::move(train), opt.subset);
    test = take_first(std::move(test), opt.test_subset);
    train.num_classes = test.num_classes = std::max(train.num_classes, test.num_classes);
  } else {
    train = mpt::synth_dataset(opt.seed, opt.synth_n, opt.classes, opt.synth_shape, "train");
    test = mpt::synth_dataset(opt.seed, opt.synth_test_n, opt.classes, opt.synth_shape, "test");
  }
  mpt::ChannelStats stats = mpt::channel_stats(train);
  mpt::normalize_inplace(train, stats);
  mpt::normalize_inplace(test, stats);
  train.split = "train";
  test.split = "test";
  return {std::move(train), std::move(test)};
}

// Resolved-config echo next to an output file, so runs are self-describing.
void write_config_echo(CLI::App* cmd, const std::string& next_to) {
  std::ofstream out(next_to + ".config");
  out << cmd->config_to_str(true, false);
}

mpt::OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return mpt::OptimizerKind::sgd;
  if (s == "adam") return mpt::OptimizerKind::adam;
  throw mpt::ConfigError("unknown optimizer '" + s + "'");
}

mpt::LrSchedule parse_schedule(const std::string& s) {
  if (s == "multistep") return mpt::LrSchedule::multistep;
  if (s == "cosine") return mpt::LrSchedule::cosine;
  if (s == "constant") return mpt::LrSchedule::constant;
  throw mpt::ConfigError("unknown lr schedule '" + s + "'");
}

mpt::FinetuneScope parse_scope(const std::string& s) {
  if (s == "first") return mpt::FinetuneScope::first_layer;
  if (s == "last") return mpt::FinetuneScope::last_layer;
  if (s == "full") return mpt::FinetuneScope::full_model;
  throw mpt::ConfigError("unknown finetune scope '" + s + "'");
}

void print_epoch_lines(const std::vector<mpt::EpochMetrics>& metrics) {
  for (const mpt::EpochMetrics& m : metrics)
    std::fprintf(stderr,
                 "epoch %d [%s] loss %.4f acc %.4f prune %.4f (%.2fs)\n",
                 m.epoch, mpt::phase_name(m.phase), m.train_loss, m.test_accuracy,
                 m.actual_prune_ratio, m.epoch_time_s);
}

// ----- train -----

struct TrainArgs {
  DataOptions data;
  std::string arch = "conv4";
  double prune_ratio = 0.5;
  double alpha = 1.0;
  std::string select = "topk";
  double theta = 0.0;
  bool calibrate_theta = false;
  std::string scope = "global";
  int epochs = 10;
  int batch_size = 128;
  std::string optimizer = "sgd";
  double lr = 0.1;
  std::string schedule = "cosine";
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int threads = 0;
  bool bypass_powerprop = false;
  std::string out, metrics;
};

void setup_train(CLI::App& app, TrainArgs& a) {
  CLI::App* cmd = app.add_subcommand("train", "Train multi-prize ticket scores");
  cmd->set_config("--config");
  add_data_options(cmd, a.data);
  cmd->add_option("--arch", a.arch, "conv2|conv4|conv6|conv8")
      ->check(CLI::IsMember({"conv2", "conv4", "conv6", "conv8"}));
  cmd->add_option("--prune-ratio", a.prune_ratio, "Target prune ratio in [0,1)");
  cmd->add_option("--alpha", a.alpha, "Power-prop exponent (>= 1)");
  cmd->add_option("--select", a.select, "Mask selection: topk|threshold")
      ->check(CLI::IsMember({"topk", "threshold"}));
  cmd->add_option("--theta", a.theta, "Threshold for --select threshold");
  cmd->add_flag("--calibrate-theta", a.calibrate_theta,
                "Set theta once from the initial score p-quantile");
  cmd->add_option("--scope", a.scope, "Selection scope: global|layer")
      ->check(CLI::IsMember({"global", "layer"}));
  cmd->add_option("--epochs", a.epochs, "Training epochs");
  cmd->add_option("--batch-size", a.batch_size, "Batch size");
  cmd->add_option("--seed", a.data.seed, "Run seed");
  cmd->add_option("--optimizer", a.optimizer, "sgd|adam")
      ->check(CLI::IsMember({"sgd", "adam"}));
  cmd->add_option("--lr", a.lr, "Base learning rate");
  cmd->add_option("--lr-schedule", a.schedule, "multistep|cosine|constant")
      ->check(CLI::IsMember({"multistep", "cosine", "constant"}));
  cmd->add_option("--momentum", a.momentum, "SGD momentum");
  cmd->add_option("--weight-decay", a.weight_decay, "L2 on the scores");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware)");
  cmd->add_flag("--bypass-powerprop", a.bypass_powerprop,
                "Skip the power-prop layer entirely (reference path)");
  cmd->add_option("--out", a.out, "Output checkpoint path")->required();
  cmd->add_option("--metrics", a.metrics, "Output metrics CSV path")->required();

  cmd->callback([&a, cmd] {
    mpt::TrainConfig cfg;
    cfg.arch = a.arch;
    cfg.alpha = a.alpha;
    cfg.selection.method = a.select == "topk"
                               ? mpt::SelectionPolicy::Method::topk_sort
                               : mpt::SelectionPolicy::Method::threshold;
    cfg.selection.scope = a.scope == "global" ? mpt::SelectionPolicy::Scope::global
                                              : mpt::SelectionPolicy::Scope::layerwise;
    cfg.selection.prune_ratio = a.prune_ratio;
    cfg.selection.theta = a.theta;
    cfg.selection.calibrate_theta = a.calibrate_theta;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.optimizer = parse_optimizer(a.optimizer);
    cfg.lr = a.lr;
    cfg.lr_schedule = parse_schedule(a.schedule);
    cfg.momentum = a.momentum;
    cfg.weight_decay = a.weight_decay;
    cfg.seed = a.data.seed;
    cfg.bypass_powerprop = a.bypass_powerprop;
    cfg.threads = a.threads;

    auto [train, test] = load_datasets(a.data);
    mpt::TrainResult result = mpt::train_mpt(cfg, train, test);
    print_epoch_lines(result.metrics);
    mpt::save_checkpoint(result.checkpoint, a.out);
    mpt::write_metrics_csv(a.metrics, result.metrics);
    write_config_echo(cmd, a.out);
    std::printf("final accuracy: %.6f\n", result.metrics.back().test_accuracy);
  });
}

// ----- finetune -----

struct FinetuneArgs {
  DataOptions data;
  std::string ckpt;
  std::string scope = "last";
  std::string optimizer = "sgd";
  double lr = 0.001;
  std::string schedule = "cosine";
  int batch_size = 256;
  int epochs = 10;
  double momentum = 0.9;
  double weight_decay = 0.0;
  int threads = 0;
  bool grid = false;
  std::string grid_out = "grid_results.csv";
  std::string out, metrics;
};

void setup_finetune(CLI::App& app, FinetuneArgs& a) {
  CLI::App* cmd = app.add_subcommand("finetune", "Finetune weights under a frozen mask");
  cmd->set_config("--config");
  add_data_options(cmd, a.data);
  cmd->add_option("--ckpt", a.ckpt, "Input checkpoint")->required();
  cmd->add_option("--scope", a.scope, "first|last|full")
      ->check(CLI::IsMember({"first", "last", "full"}));
  cmd->add_option("--optimizer", a.optimizer, "sgd|adam")
      ->check(CLI::IsMember({"sgd", "adam"}));
  cmd->add_option("--lr", a.lr, "Base learning rate");
  cmd->add_option("--lr-schedule", a.schedule, "multistep|cosine|constant")
      ->check(CLI::IsMember({"multistep", "cosine", "constant"}));
  cmd->add_option("--batch-size", a.batch_size, "Batch size");
  cmd->add_option("--epochs", a.epochs, "Finetune epochs (<= 200)");
  cmd->add_option("--momentum", a.momentum, "SGD momentum");
  cmd->add_option("--weight-decay", a.weight_decay, "L2 on the weights");
  cmd->add_option("--seed", a.data.seed, "Run seed");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware)");
  cmd->add_flag("--grid", a.grid, "Run the full hyperparameter grid");
  cmd->add_option("--grid-out", a.grid_out, "Grid summary CSV path");
  cmd->add_option("--out", a.out, "Output checkpoint path");
  cmd->add_option("--metrics", a.metrics, "Output metrics CSV path");

  cmd->callback([&a, cmd] {
    if (!a.grid && (a.out.empty() || a.metrics.empty()))
      throw mpt::ConfigError("--out and --metrics are required without --grid");
    if (!fs::exists(a.ckpt))
      throw mpt::DataError("checkpoint '" + a.ckpt + "' does not exist");

    mpt::Checkpoint<float> base = mpt::load_checkpoint(a.ckpt);
    auto [train, test] = load_datasets(a.data);

    mpt::TrainConfig cfg;
    cfg.alpha = base.alpha;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.optimizer = parse_optimizer(a.optimizer);
    cfg.lr = a.lr;
    cfg.lr_schedule = parse_schedule(a.schedule);
    cfg.momentum = a.momentum;
    cfg.weight_decay = a.weight_decay;
    cfg.seed = a.data.seed;
    cfg.threads = a.threads;

    if (!a.grid) {
      mpt::TrainResult result =
          mpt::finetune(base, parse_scope(a.scope), cfg, train, test);
      print_epoch_lines(result.metrics);
      mpt::save_checkpoint(result.checkpoint, a.out);
      mpt::write_metrics_csv(a.metrics, result.metrics);
      write_config_echo(cmd, a.out);
      std::printf("final accuracy: %.6f\n", result.metrics.back().test_accuracy);
      return;
    }

    // Hyperparameter grid: optimizer x scheduler x lr x batch x scope.
    const std::vector<std::string> optimizers = {"sgd", "adam"};
    const std::vector<std::string> schedules = {"multistep", "cosine", "constant"};
    const std::vector<double> lrs = {0.1, 0.01, 0.001, 0.0001};
    const std::vector<int> batches = {64, 128, 256, 512};
    const std::vector<std::string> scopes = {"full", "last", "first"};

    std::string csv = "optimizer,schedule,lr,batch_size,scope,final_accuracy\n";
    double best_acc = -1.0;
    std::string best_desc;
    char buf[160];
    for (const auto& optim : optimizers)
      for (const auto& sched : schedules)
        for (double lr : lrs)
          for (int batch : batches)
            for (const auto& scope : scopes) {
              mpt::TrainConfig cell = cfg;
              cell.optimizer = parse_optimizer(optim);
              cell.lr_schedule = parse_schedule(sched);
              cell.lr = lr;
              cell.batch_size = batch;
              mpt::TrainResult r =
                  mpt::finetune(base, parse_scope(scope), cell, train, test);
              double acc = r.metrics.back().test_accuracy;
              std::snprintf(buf, sizeof(buf), "%s,%s,%g,%d,%s,%.9g\n", optim.c_str(),
                            sched.c_str(), lr, batch, scope.c_str(), acc);
              csv += buf;
              if (acc > best_acc) {
                best_acc = acc;
                std::snprintf(buf, sizeof(buf), "%s,%s,%g,%d,%s", optim.c_str(),
                              sched.c_str(), lr, batch, scope.c_str());
                best_desc = buf;
              }
            }
    std::ofstream out(a.grid_out);
    if (!out) throw mpt::DataError("cannot write '" + a.grid_out + "'");
    out << csv;
    write_config_echo(cmd, a.grid_out);
    std::printf("best grid cell: %s -> %.6f\n", best_desc.c_str(), best_acc);
  });
}

// ----- analyze -----

struct AnalyzeArgs {
  std::string ckpt, report, hist_dir;
  int bins = 50;
};

void setup_analyze(CLI::App& app, AnalyzeArgs& a) {
  CLI::App* cmd = app.add_subcommand("analyze", "Sparsity report and score histograms");
  cmd->set_config("--config");
  cmd->add_option("--ckpt", a.ckpt, "Input checkpoint")->required();
  cmd->add_option("--report", a.report, "Output report JSON path")->required();
  cmd->add_option("--hist-dir", a.hist_dir, "Directory for histogram CSVs")->required();
  cmd->add_option("--bins", a.bins, "Histogram bins")->check(CLI::PositiveNumber);

  cmd->callback([&a, cmd] {
    if (!fs::exists(a.ckpt))
      throw mpt::DataError("checkpoint '" + a.ckpt + "' does not exist");
    mpt::Checkpoint<float> ckpt = mpt::load_checkpoint(a.ckpt);

    std::vector<mpt::Tensor<uint8_t>> masks;
    for (const auto& p : ckpt.prunable) masks.push_back(p.mask);
    mpt::SparsityReport report = mpt::build_sparsity_report(ckpt.spec, masks);
    for (const std::string& n : report.notices) std::fprintf(stderr, "%s\n", n.c_str());

    std::ofstream out(a.report);
    if (!out) throw mpt::DataError("cannot write '" + a.report + "'");
    out << mpt::sparsity_report_json(report);
    out.close();

    fs::create_directories(a.hist_dir);
    for (const auto& p : ckpt.prunable) {
      mpt::Tensor<float> eff = mpt::powerprop_apply(p.scores, ckpt.alpha);
      char name[64];
      std::snprintf(name, sizeof(name), "layer%02d_scores_raw.csv", p.layer_index);
      std::ofstream raw(fs::path(a.hist_dir) / name);
      raw << mpt::histogram_csv(mpt::score_histogram(p.scores, a.bins));
      std::snprintf(name, sizeof(name), "layer%02d_scores_eff.csv", p.layer_index);
      std::ofstream effcsv(fs::path(a.hist_dir) / name);
      effcsv << mpt::histogram_csv(mpt::score_histogram(eff, a.bins));
    }
    write_config_echo(cmd, a.report);
    std::printf("acceleration rate: %.4f\n", report.acceleration_rate);
  });
}

// ----- infer -----

struct InferArgs {
  DataOptions data;
  std::string ckpt;
  std::string mode = "both";
  bool bench = false;
  int repeats = 20;
  int batch_size = 8;
  std::string bench_json;
};

std::vector<int32_t> predictions(const mpt::CompactModel<float>& model,
                                 const mpt::Dataset& ds, int batch_size) {
  std::vector<int32_t> preds;
  preds.reserve(static_cast<size_t>(ds.size()));
  int64_t sample = ds.images.numel() / ds.images.dim(0);
  for (int64_t lo = 0; lo < ds.size(); lo += batch_size) {
    int64_t hi = std::min<int64_t>(lo + batch_size, ds.size());
    std::vector<int64_t> shape = ds.images.shape;
    shape[0] = hi - lo;
    mpt::Tensor<float> batch(shape,
        std::vector<float>(ds.images.data.begin() + lo * sample,
                           ds.images.data.begin() + hi * sample));
    mpt::Tensor<float> logits = mpt::sparse_forward(model, std::move(batch));
    int64_t C = logits.dim(1);
    for (int64_t b = 0; b < hi - lo; ++b) {
      const float* row = logits.data.data() + b * C;
      int32_t best = 0;
      for (int64_t c = 1; c < C; ++c)
        if (row[c] > row[best]) best = static_cast<int32_t>(c);
      preds.push_back(best);
    }
  }
  return preds;
}

double accuracy_of(const std::vector<int32_t>& preds, const mpt::Dataset& ds) {
  int64_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == ds.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

void setup_infer(CLI::App& app, InferArgs& a) {
  CLI::App* cmd = app.add_subcommand("infer", "Run dense and/or kernel-skipping inference");
  cmd->set_config("--config");
  add_data_options(cmd, a.data);
  cmd->add_option("--ckpt", a.ckpt, "Input checkpoint")->required();
  cmd->add_option("--mode", a.mode, "dense|sparse|both")
      ->check(CLI::IsMember({"dense", "sparse", "both"}));
  cmd->add_flag("--bench", a.bench, "Benchmark dense vs sparse wall time");
  cmd->add_option("--repeats", a.repeats, "Benchmark repeats (>= 10)");
  cmd->add_option("--batch-size", a.batch_size, "Inference batch size");
  cmd->add_option("--bench-json", a.bench_json, "Benchmark JSON output path");

  cmd->callback([&a, cmd] {
    if (a.bench && a.mode != "both")
      throw mpt::ConfigError("--bench requires --mode both");
    if (a.bench && a.repeats < 10)
      throw mpt::ConfigError("--repeats must be >= 10 for --bench");
    if (!fs::exists(a.ckpt))
      throw mpt::DataError("checkpoint '" + a.ckpt + "' does not exist");
    mpt::Checkpoint<float> ckpt = mpt::load_checkpoint(a.ckpt);
    auto [train, test] = load_datasets(a.data);
    (void)train;

    std::vector<int32_t> dense_preds, sparse_preds;
    if (a.mode == "dense" || a.mode == "both") {
      mpt::CompactModel<float> dense = mpt::compact_model(ckpt, /*keep_zero_kernels=*/true);
      dense_preds = predictions(dense, test, a.batch_size);
      std::printf("dense accuracy: %.6f\n", accuracy_of(dense_preds, test));
    }
    if (a.mode == "sparse" || a.mode == "both") {
      mpt::CompactModel<float> sparse = mpt::compact_model(ckpt);
      sparse_preds = predictions(sparse, test, a.batch_size);
      std::printf("sparse accuracy: %.6f\n", accuracy_of(sparse_preds, test));
    }
    if (a.mode == "both" && dense_preds != sparse_preds)
      throw EquivalenceError("dense and sparse predictions disagree");

    if (a.bench) {
      mpt::CompactModel<float> dense = mpt::compact_model(ckpt, true);
      mpt::CompactModel<float> sparse = mpt::compact_model(ckpt);
      int64_t n = std::min<int64_t>(a.batch_size, test.size());
      int64_t sample = test.images.numel() / test.images.dim(0);
      std::vector<int64_t> shape = test.images.shape;
      shape[0] = n;
      mpt::Tensor<float> input(shape,
          std::vector<float>(test.images.data.begin(),
                             test.images.data.begin() + n * sample));
      mpt::BenchResult res = mpt::bench_inference(dense, sparse, input, a.repeats);
      nlohmann::json j;
      j["dense_ns"] = res.dense_ns;
      j["sparse_ns"] = res.sparse_ns;
      j["speedup"] = res.speedup;
      j["theoretical_ar"] = res.theoretical_ar;
      j["macs_dense"] = res.macs_dense;
      j["macs_sparse"] = res.macs_sparse;
      std::string text = j.dump(2) + "\n";
      if (a.bench_json.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(a.bench_json);
        if (!out) throw mpt::DataError("cannot write '" + a.bench_json + "'");
        out << text;
        write_config_echo(cmd, a.bench_json);
      }
    }
  });
}

// ----- bench-select -----

struct BenchSelectArgs {
  std::vector<int64_t> sizes;
  std::vector<double> alphas = {1.0, 2.0, 3.0};
  int iters = 20;
  double prune_ratio = 0.5;
  uint64_t seed = 1;
  std::string out;
};

void setup_bench_select(CLI::App& app, BenchSelectArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "bench-select", "Time sort-based vs threshold mask selection");
  cmd->set_config("--config");
  cmd->add_option("--sizes", a.sizes, "Score population sizes")->required();
  cmd->add_option("--alphas", a.alphas, "Power-prop exponents");
  cmd->add_option("--iters", a.iters, "Iterations per cell");
  cmd->add_option("--prune-ratio", a.prune_ratio, "Target prune ratio");
  cmd->add_option("--seed", a.seed, "Seed");
  cmd->add_option("--out", a.out, "Output CSV path")->required();

  cmd->callback([&a, cmd] {
    std::vector<mpt::SelectBenchRow> rows =
        mpt::bench_selection(a.sizes, a.alphas, a.iters, a.prune_ratio, a.seed);
    std::ofstream out(a.out);
    if (!out) throw mpt::DataError("cannot write '" + a.out + "'");
    out << mpt::select_bench_csv(rows);
    write_config_echo(cmd, a.out);
    for (const auto& r : rows)
      std::printf("size %lld alpha %g: sort %.0f ns, threshold %.0f ns (%.3fx)\n",
                  static_cast<long long>(r.size), r.alpha, r.sort_ns, r.threshold_ns,
                  r.ratio);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-prize ticket training, selection, and sparsity toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  FinetuneArgs finetune_args;
  AnalyzeArgs analyze_args;
  InferArgs infer_args;
  BenchSelectArgs bench_args;
  setup_train(app, train_args);
  setup_finetune(app, finetune_args);
  setup_analyze(app, analyze_args);
  setup_infer(app, infer_args);
  setup_bench_select(app, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints message and usage hint
    return 2;
  } catch (const mpt::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const mpt::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const mpt::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const mpt::TrainAbort& e) {
    std::fprintf(stderr, "training aborted: %s\n", e.what());
    return 4;
  } catch (const EquivalenceError& e) {
    std::fprintf(stderr, "equivalence violation: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
