#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mpt/powerprop.hpp"
#include "mpt/supermask.hpp"
#include "test_support.hpp"

using namespace mpt;
using namespace mpt_test;

TEST_CASE("powerprop apply: direct evaluations") {
  Tensor<double> s({3}, {2.0, -3.0, 0.5});
  Tensor<double> a2 = powerprop_apply(s, 2.0);
  CHECK(a2[0] == doctest::Approx(4.0));
  Tensor<double> a1 = powerprop_apply(s, 1.0);
  CHECK(a1[1] == -3.0);
  Tensor<double> a3 = powerprop_apply(s, 3.0);
  CHECK(a3[2] == doctest::Approx(0.125));
}

TEST_CASE("powerprop apply is exactly the identity at alpha=1") {
  CounterRng rng(3, 0);
  Tensor<float> s = random_tensor<float>({257}, rng);
  Tensor<float> out = powerprop_apply(s, 1.0);
  CHECK(out.data == s.data);
}

TEST_CASE("powerprop rejects alpha < 1") {
  Tensor<double> s({1}, {1.0});
  CHECK_THROWS_AS(powerprop_apply(s, 0.5), ConfigError);
  CHECK_THROWS_AS(powerprop_grad(s, s, 0.0), ConfigError);
}

TEST_CASE("powerprop is odd") {
  CounterRng rng(5, 0);
  for (double alpha : {1.0, 2.0, 2.5, 3.0, 4.0}) {
    Tensor<double> s = random_tensor<double>({64}, rng, -2.0, 2.0);
    Tensor<double> neg = s;
    for (auto& v : neg.data) v = -v;
    Tensor<double> a = powerprop_apply(s, alpha);
    Tensor<double> b = powerprop_apply(neg, alpha);
    for (int64_t i = 0; i < a.numel(); ++i) CHECK(a[i] == -b[i]);
  }
}

TEST_CASE("powerprop apply is monotone and sign-preserving") {
  CounterRng rng(6, 0);
  for (double alpha : {1.0, 1.7, 2.0, 3.0}) {
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(rng.uniform(-3.0, 3.0));
    std::sort(xs.begin(), xs.end());
    Tensor<double> s({100}, std::vector<double>(xs.begin(), xs.end()));
    Tensor<double> S = powerprop_apply(s, alpha);
    for (int64_t i = 0; i < 99; ++i) CHECK(S[i] <= S[i + 1]);
    for (int64_t i = 0; i < 100; ++i)
      CHECK(((s[i] > 0) == (S[i] > 0)));
  }
}

TEST_CASE("powerprop grad: closed-form cases and the zero plateau") {
  Tensor<double> s({1}, {2.0});
  Tensor<double> g({1}, {1.0});
  CHECK(powerprop_grad(s, g, 2.0)[0] == doctest::Approx(4.0));
  Tensor<double> zero({1}, {0.0});
  for (double alpha : {2.0, 3.0, 4.0})
    CHECK(powerprop_grad(zero, g, alpha)[0] == 0.0);
  // gradient magnitude vanishes continuously near 0
  double prev = 0.0;
  for (double x : {1e-4, 1e-3, 1e-2, 1e-1}) {
    Tensor<double> sx({1}, {x});
    double gx = powerprop_grad(sx, g, 2.0)[0];
    CHECK(gx >= prev);
    prev = gx;
  }
  CHECK(prev < 0.5);
}

TEST_CASE("powerprop grad matches finite differences through apply") {
  CounterRng rng(7, 0);
  for (double alpha : {2.0, 3.0, 4.5}) {
    Tensor<double> s({24});
    for (int64_t i = 0; i < s.numel(); ++i) {
      double v;
      do {
        v = rng.uniform(-1.5, 1.5);
      } while (std::abs(v) < 5e-2);
      s[i] = v;
    }
    Tensor<double> c = random_tensor<double>({24}, rng);
    Tensor<double> grad = powerprop_grad(s, c, alpha);
    auto scalar = [&] {
      Tensor<double> S = powerprop_apply(s, alpha);
      double sum = 0.0;
      for (int64_t i = 0; i < S.numel(); ++i) sum += c[i] * S[i];
      return sum;
    };
    CHECK(max_rel_err(finite_diff(s, scalar), grad) < 1e-6);
  }
}

TEST_CASE("init_scores is deterministic and records alpha") {
  NetworkSpec spec = make_conv_family("conv2", {3, 16, 16}, 4);
  ScoreState<float> a = init_scores<float>(spec, 2.0, 99);
  ScoreState<float> b = init_scores<float>(spec, 2.0, 99);
  CHECK(a.alpha == 2.0);
  REQUIRE(a.s.size() == b.s.size());
  for (size_t j = 0; j < a.s.size(); ++j) CHECK(a.s[j].data == b.s[j].data);
  ScoreState<float> c = init_scores<float>(spec, 2.0, 100);
  CHECK(a.s[0].data != c.s[0].data);
}

TEST_CASE("init_scores: bounds, signs, and near-zero mean") {
  NetworkSpec spec = make_conv_family("conv2", {3, 32, 32}, 10);
  ScoreState<double> st = init_scores<double>(spec, 1.0, 12345);
  std::vector<int> prunable = prunable_layer_indices(spec);
  for (size_t j = 0; j < st.s.size(); ++j) {
    const LayerSpec& l = spec.layers[static_cast<size_t>(prunable[j])];
    int64_t fan_in = l.kind == LayerKind::conv2d
                         ? static_cast<int64_t>(l.in_channels) * l.kernel_size * l.kernel_size
                         : l.in_features;
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    bool pos = false, neg = false;
    double sum = 0.0;
    for (int64_t i = 0; i < st.s[j].numel(); ++i) {
      CHECK(std::abs(st.s[j][i]) <= bound);
      pos |= st.s[j][i] > 0;
      neg |= st.s[j][i] < 0;
      sum += st.s[j][i];
    }
    CHECK(pos);
    CHECK(neg);
    double n = static_cast<double>(st.s[j].numel());
    double sigma = bound / std::sqrt(3.0);  // stdev of U(-b,b)
    if (n >= 1e4) CHECK(std::abs(sum / n) < 3.0 * sigma / std::sqrt(n));
  }
}

TEST_CASE("select_mask_topk: hand case and boundary ratios") {
  std::vector<Tensor<double>> S{Tensor<double>({4}, {0.1, 0.9, 0.5, 0.3})};
  Masks m = select_mask_topk(S, 0.5, SelectionPolicy::Scope::layerwise);
  CHECK(m[0].data == std::vector<uint8_t>{0, 1, 1, 0});
  Masks all = select_mask_topk(S, 0.0, SelectionPolicy::Scope::global);
  CHECK(all[0].data == std::vector<uint8_t>{1, 1, 1, 1});
  CHECK_THROWS_AS(select_mask_topk(S, 1.0, SelectionPolicy::Scope::global), ConfigError);
  CHECK_THROWS_AS(select_mask_topk(S, -0.1, SelectionPolicy::Scope::global), ConfigError);
}

TEST_CASE("select_mask_topk ties prune the lower flat index first") {
  std::vector<Tensor<double>> S{Tensor<double>({4}, {0.5, 0.5, 0.5, 0.5})};
  Masks m = select_mask_topk(S, 0.5, SelectionPolicy::Scope::global);
  CHECK(m[0].data == std::vector<uint8_t>{0, 0, 1, 1});
  // global scope: lower layer index pruned first among equal scores
  std::vector<Tensor<double>> two{Tensor<double>({2}, {0.5, 0.5}),
                                  Tensor<double>({2}, {0.5, 0.5})};
  Masks m2 = select_mask_topk(two, 0.5, SelectionPolicy::Scope::global);
  CHECK(m2[0].data == std::vector<uint8_t>{0, 0});
  CHECK(m2[1].data == std::vector<uint8_t>{1, 1});
}

namespace {

// Independent oracle: full argsort with the documented tie order.
Masks sort_oracle_global(const std::vector<Tensor<double>>& S, double p) {
  struct Entry {
    double value;
    size_t layer;
    int64_t flat;
  };
  std::vector<Entry> entries;
  int64_t total = 0;
  for (size_t l = 0; l < S.size(); ++l) {
    total += S[l].numel();
    for (int64_t i = 0; i < S[l].numel(); ++i)
      entries.push_back({S[l][i], l, i});
  }
  // keep priority: larger value first; ties keep higher layer, higher index
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.layer != b.layer) return a.layer > b.layer;
    return a.flat > b.flat;
  });
  int64_t keep = total - static_cast<int64_t>(std::floor(p * static_cast<double>(total)));
  Masks masks;
  for (const Tensor<double>& s : S) masks.emplace_back(Tensor<uint8_t>(s.shape));
  for (int64_t i = 0; i < keep; ++i)
    masks[entries[static_cast<size_t>(i)].layer][entries[static_cast<size_t>(i)].flat] = 1;
  return masks;
}

}  // namespace

TEST_CASE("global top-k equals the full-sort oracle") {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Tensor<double>> S;
    S.push_back(random_tensor<double>({37}, rng));
    S.push_back(random_tensor<double>({23}, rng));
    double p = rng.uniform(0.0, 0.99);
    Masks got = select_mask_topk(S, p, SelectionPolicy::Scope::global);
    Masks want = sort_oracle_global(S, p);
    CHECK(got[0].data == want[0].data);
    CHECK(got[1].data == want[1].data);
  }
  // with duplicated values too
  std::vector<Tensor<double>> S{Tensor<double>({6}, {1, 2, 2, 2, 3, 0}),
                                Tensor<double>({3}, {2, 5, 2})};
  for (double p : {0.2, 0.4, 0.5, 0.7}) {
    Masks got = select_mask_topk(S, p, SelectionPolicy::Scope::global);
    Masks want = sort_oracle_global(S, p);
    CHECK(got[0].data == want[0].data);
    CHECK(got[1].data == want[1].data);
  }
}

TEST_CASE("top-k selection is invariant under monotone transforms") {
  CounterRng rng(22, 0);
  std::vector<Tensor<double>> S{random_tensor<double>({50}, rng),
                                random_tensor<double>({30}, rng)};
  Masks base = select_mask_topk(S, 0.6, SelectionPolicy::Scope::global);
  std::vector<Tensor<double>> warped = S;
  for (auto& t : warped)
    for (auto& v : t.data) v = std::exp(2.0 * v) + 3.0;  // strictly increasing
  Masks after = select_mask_topk(warped, 0.6, SelectionPolicy::Scope::global);
  for (size_t l = 0; l < base.size(); ++l) CHECK(base[l].data == after[l].data);
}

TEST_CASE("select_mask_threshold: strict comparison and emergent ratio") {
  std::vector<Tensor<double>> S{Tensor<double>({3}, {0.1, 0.9, 0.5})};
  ThresholdSelection<double> sel = select_mask_threshold(S, 0.4);
  CHECK(sel.masks[0].data == std::vector<uint8_t>{0, 1, 1});
  CHECK(sel.pruned == 1);
  CHECK(sel.total == 3);
  // theta = -inf keeps everything
  ThresholdSelection<double> all =
      select_mask_threshold(S, -std::numeric_limits<double>::infinity());
  CHECK(all.pruned == 0);
  // theta = max(S) prunes everything (strict inequality)
  ThresholdSelection<double> none = select_mask_threshold(S, 0.9);
  CHECK(none.masks[0].data == std::vector<uint8_t>{0, 0, 0});
}

TEST_CASE("calibrated threshold reproduces top-k on distinct scores") {
  CounterRng rng(23, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tensor<double>> S{random_tensor<double>({64}, rng),
                                  random_tensor<double>({32}, rng)};
    double p = rng.uniform(0.0, 0.95);
    double theta = calibrate_theta_global(S, p);
    Masks topk = select_mask_topk(S, p, SelectionPolicy::Scope::global);
    Masks thr = select_mask_threshold(S, theta).masks;
    for (size_t l = 0; l < S.size(); ++l) CHECK(topk[l].data == thr[l].data);
  }
}

TEST_CASE("layerwise calibration reproduces layerwise top-k") {
  CounterRng rng(24, 0);
  std::vector<Tensor<double>> S{random_tensor<double>({40}, rng),
                                random_tensor<double>({25}, rng)};
  std::vector<double> thetas = calibrate_theta_layerwise(S, 0.5);
  Masks topk = select_mask_topk(S, 0.5, SelectionPolicy::Scope::layerwise);
  Masks thr = select_mask_threshold(S, thetas).masks;
  for (size_t l = 0; l < S.size(); ++l) CHECK(topk[l].data == thr[l].data);
}

TEST_CASE("binarize_layer: hand cases") {
  Tensor<double> w({3}, {1, -2, 3});
  Tensor<uint8_t> m({3}, {1, 0, 1});
  Binarized<double> b = binarize_layer(w, m);
  CHECK(b.scale == doctest::Approx(2.0));
  CHECK(b.values.data == std::vector<double>{2, -2, 2});

  Tensor<double> w2({4}, {1, 1, -1, -1});
  Tensor<uint8_t> ones({4}, {1, 1, 1, 1});
  Binarized<double> b2 = binarize_layer(w2, ones);
  CHECK(b2.scale == doctest::Approx(1.0));
  CHECK(b2.values.data == std::vector<double>{1, 1, -1, -1});
}

TEST_CASE("binarize_layer: sign(0) is +1 and magnitudes all equal the scale") {
  Tensor<double> w({3}, {0.0, -0.5, 2.5});
  Tensor<uint8_t> m({3}, {1, 1, 1});
  Binarized<double> b = binarize_layer(w, m);
  CHECK(b.values[0] == b.scale);
  for (int64_t i = 0; i < 3; ++i) CHECK(std::abs(b.values[i]) == b.scale);
}

TEST_CASE("binarize_layer scale equals the mean kept magnitude to 1e-12") {
  CounterRng rng(29, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<double> w = random_tensor<double>({200}, rng, -3.0, 3.0);
    Tensor<uint8_t> m({200});
    int64_t kept = 0;
    for (int64_t i = 0; i < 200; ++i) {
      m[i] = rng.next_double() < 0.6 ? 1 : 0;
      kept += m[i];
    }
    if (kept == 0) m[0] = 1;
    Binarized<double> b = binarize_layer(w, m);
    double sum = 0.0;
    int64_t n = 0;
    for (int64_t i = 0; i < 200; ++i)
      if (m[i]) {
        sum += std::abs(w[i]);
        ++n;
      }
    CHECK(std::abs(b.scale - sum / static_cast<double>(n)) <= 1e-12);
  }
}

TEST_CASE("binarize_layer rejects a fully pruned layer") {
  Tensor<double> w({4}, {1, 2, 3, 4});
  Tensor<uint8_t> m({4});
  CHECK_THROWS_AS(binarize_layer(w, m), ConfigError);
}

TEST_CASE("effective weights: masking and nonzero count") {
  Tensor<double> w({3}, {1, -2, 3});
  Tensor<uint8_t> m({3}, {1, 0, 1});
  MaskedBinaryLayer<double> layer = make_masked_binary_layer(w, m);
  Tensor<double> eff = effective_weights(layer);
  CHECK(eff.data == std::vector<double>{2, 0, 2});
  int64_t nonzero = 0;
  for (auto v : eff.data) nonzero += v != 0.0;
  CHECK(nonzero == 2);

  Tensor<uint8_t> ones({3}, {1, 1, 1});
  MaskedBinaryLayer<double> dense = make_masked_binary_layer(w, ones);
  CHECK(effective_weights(dense).data == dense.binarized.data);
}

TEST_CASE("score gradient is straight-through") {
  Tensor<double> ge({2}, {1, 2});
  Tensor<double> wb({2}, {2, -2});
  Tensor<double> gs = score_gradient(ge, wb);
  CHECK(gs.data == std::vector<double>{2, -4});
  Tensor<double> zero({2});
  CHECK(score_gradient(zero, wb).data == std::vector<double>{0, 0});
  // a pruned position still receives gradient: no mask enters the rule
  Tensor<double> ge2({1}, {3.0});
  Tensor<double> wb2({1}, {-1.5});
  CHECK(score_gradient(ge2, wb2)[0] == -4.5);
}
