#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpt/nn_ops.hpp"
#include "mpt/network.hpp"
#include "test_support.hpp"

using namespace mpt;
using namespace mpt_test;

TEST_CASE("conv2d forward: hand-computed dot product") {
  Tensor<double> input({1, 1, 2, 2}, {1, 2, 3, 4});
  Tensor<double> kernel({1, 1, 2, 2}, {1, 0, 0, 1});
  Tensor<double> out = conv2d_forward(input, kernel, 1, 0);
  CHECK(out.shape == std::vector<int64_t>{1, 1, 1, 1});
  CHECK(out[0] == doctest::Approx(5.0));
}

TEST_CASE("conv2d forward: all-zero weight gives all-zero output") {
  CounterRng rng(7, 0);
  Tensor<double> input = random_tensor<double>({2, 3, 6, 6}, rng);
  Tensor<double> weight({4, 3, 3, 3});
  Tensor<double> out = conv2d_forward(input, weight, 1, 1);
  for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("conv2d forward matches the naive 6-loop reference") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 8; ++trial) {
    int stride = 1 + trial % 2;
    int pad = trial % 3;
    Tensor<double> input = random_tensor<double>({2, 3, 5, 5}, rng);
    Tensor<double> weight = random_tensor<double>({4, 3, 3, 3}, rng);
    Tensor<double> got = conv2d_forward(input, weight, stride, pad);
    Tensor<double> want = naive_conv2d(input, weight, stride, pad);
    REQUIRE(got.shape == want.shape);
    for (int64_t i = 0; i < got.numel(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d forward is linear in input and weight") {
  CounterRng rng(13, 0);
  Tensor<double> input = random_tensor<double>({1, 2, 6, 6}, rng);
  Tensor<double> weight = random_tensor<double>({3, 2, 3, 3}, rng);
  const double a = 3.25;  // exactly representable
  Tensor<double> scaled_in = input;
  for (auto& v : scaled_in.data) v *= a;
  Tensor<double> base = conv2d_forward(input, weight, 1, 1);
  Tensor<double> scaled = conv2d_forward(scaled_in, weight, 1, 1);
  for (int64_t i = 0; i < base.numel(); ++i)
    CHECK(std::abs(scaled[i] - a * base[i]) <= 1e-12 * std::max(1.0, std::abs(base[i])));
}

TEST_CASE("conv2d forward is bit-deterministic across repeated calls") {
  CounterRng rng(17, 0);
  Tensor<float> input = random_tensor<float>({2, 3, 8, 8}, rng);
  Tensor<float> weight = random_tensor<float>({5, 3, 3, 3}, rng);
  Tensor<float> a = conv2d_forward(input, weight, 1, 1);
  Tensor<float> b = conv2d_forward(input, weight, 1, 1);
  CHECK(a.data == b.data);
}

TEST_CASE("conv2d shape errors name the offending dimensions") {
  Tensor<double> input({1, 2, 4, 4});
  Tensor<double> weight({1, 3, 3, 3});
  CHECK_THROWS_AS(conv2d_forward(input, weight, 1, 1), ShapeError);
  CHECK_THROWS_AS(conv2d_forward(input, Tensor<double>({1, 2, 3, 2}), 1, 0), ShapeError);
  CHECK_THROWS_AS(conv2d_forward(input, Tensor<double>({1, 2, 3, 3}), 0, 0), ConfigError);
  // kernel larger than padded extent
  CHECK_THROWS_AS(conv2d_forward(input, Tensor<double>({1, 2, 5, 5}), 1, 0), ShapeError);
}

TEST_CASE("conv2d backward: zero grad_out gives zero gradients") {
  CounterRng rng(19, 0);
  Tensor<double> input = random_tensor<double>({1, 2, 4, 4}, rng);
  Tensor<double> weight = random_tensor<double>({3, 2, 3, 3}, rng);
  Tensor<double> go({1, 3, 4, 4});
  ConvGrads<double> g = conv2d_backward(input, weight, go, 1, 1);
  for (int64_t i = 0; i < g.input.numel(); ++i) CHECK(g.input[i] == 0.0);
  for (int64_t i = 0; i < g.weight.numel(); ++i) CHECK(g.weight[i] == 0.0);
}

TEST_CASE("conv2d backward: 1x1 scalar chain rule") {
  Tensor<double> x({1, 1, 1, 1}, {2.5});
  Tensor<double> w({1, 1, 1, 1}, {-1.5});
  Tensor<double> go({1, 1, 1, 1}, {3.0});
  ConvGrads<double> g = conv2d_backward(x, w, go, 1, 0);
  CHECK(g.input[0] == doctest::Approx(-4.5));   // w * g
  CHECK(g.weight[0] == doctest::Approx(7.5));   // x * g
}

namespace {

// Scalar objective sum(c .* f(...)) for gradient checks.
template <typename MakeOut>
double objective(const Tensor<double>& c, MakeOut&& f) {
  Tensor<double> out = f();
  double sum = 0.0;
  for (int64_t i = 0; i < out.numel(); ++i) sum += c[i] * out[i];
  return sum;
}

}  // namespace

TEST_CASE("conv2d backward matches finite differences") {
  CounterRng rng(23, 0);
  for (int trial = 0; trial < 5; ++trial) {
    int stride = 1 + trial % 2;
    int pad = trial % 2;
    Tensor<double> input = random_tensor<double>({2, 2, 5, 5}, rng);
    Tensor<double> weight = random_tensor<double>({3, 2, 3, 3}, rng);
    Tensor<double> probe_shape = conv2d_forward(input, weight, stride, pad);
    Tensor<double> c = random_tensor<double>(probe_shape.shape, rng);

    ConvGrads<double> g = conv2d_backward(input, weight, c, stride, pad);
    auto scalar = [&] { return objective(c, [&] { return conv2d_forward(input, weight, stride, pad); }); };
    Tensor<double> fd_in = finite_diff(input, scalar);
    Tensor<double> fd_w = finite_diff(weight, scalar);
    CHECK(max_rel_err(fd_in, g.input) < 1e-6);
    CHECK(max_rel_err(fd_w, g.weight) < 1e-6);
  }
}

TEST_CASE("linear: identity weight reproduces the input") {
  Tensor<double> input({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor<double> eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor<double> out = linear_forward(input, eye);
  CHECK(out.data == input.data);
}

TEST_CASE("linear: zero input gives zero output and zero weight grad") {
  Tensor<double> input({2, 4});
  CounterRng rng(29, 0);
  Tensor<double> weight = random_tensor<double>({3, 4}, rng);
  Tensor<double> out = linear_forward(input, weight);
  for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
  Tensor<double> go = random_tensor<double>({2, 3}, rng);
  LinearGrads<double> g = linear_backward(input, weight, go);
  for (int64_t i = 0; i < g.weight.numel(); ++i) CHECK(g.weight[i] == 0.0);
}

TEST_CASE("linear backward matches finite differences") {
  CounterRng rng(31, 0);
  Tensor<double> input = random_tensor<double>({3, 4}, rng);
  Tensor<double> weight = random_tensor<double>({5, 4}, rng);
  Tensor<double> c = random_tensor<double>({3, 5}, rng);
  LinearGrads<double> g = linear_backward(input, weight, c);
  auto scalar = [&] { return objective(c, [&] { return linear_forward(input, weight); }); };
  CHECK(max_rel_err(finite_diff(input, scalar), g.input) < 1e-6);
  CHECK(max_rel_err(finite_diff(weight, scalar), g.weight) < 1e-6);
}

TEST_CASE("relu forward/backward definition and tie rule") {
  Tensor<double> x({3}, {-1, 0, 2});
  Tensor<double> out = relu_forward(x);
  CHECK(out.data == std::vector<double>{0, 0, 2});
  Tensor<double> go({3}, {1, 1, 1});
  Tensor<double> gx = relu_backward(x, go);
  CHECK(gx.data == std::vector<double>{0, 0, 1});  // subgradient 0 at 0
}

TEST_CASE("relu backward matches finite differences away from the kink") {
  CounterRng rng(37, 0);
  Tensor<double> x({4, 6});
  for (int64_t i = 0; i < x.numel(); ++i) {
    double v;
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (std::abs(v) < 1e-2);
    x[i] = v;
  }
  Tensor<double> c = random_tensor<double>({4, 6}, rng);
  Tensor<double> gx = relu_backward(x, c);
  auto scalar = [&] { return objective(c, [&] { return relu_forward(x); }); };
  CHECK(max_rel_err(finite_diff(x, scalar), gx) < 1e-6);
}

TEST_CASE("maxpool2x2: basic pooling and gradient routing") {
  Tensor<double> x({1, 1, 2, 2}, {1, 2, 3, 4});
  PoolResult<double> r = maxpool2x2_forward(x);
  CHECK(r.output.numel() == 1);
  CHECK(r.output[0] == 4.0);
  Tensor<double> go({1, 1, 1, 1}, {5.0});
  Tensor<double> gx = maxpool2x2_backward(r.argmax, x.shape, go);
  CHECK(gx.data == std::vector<double>{0, 0, 0, 5});
}

TEST_CASE("maxpool2x2 ties break to the lowest flat index") {
  Tensor<double> x({1, 1, 2, 2}, {7, 7, 7, 7});
  PoolResult<double> r = maxpool2x2_forward(x);
  CHECK(r.argmax[0] == 0);
}

TEST_CASE("maxpool2x2 rejects odd spatial extents") {
  CHECK_THROWS_AS(maxpool2x2_forward(Tensor<double>({1, 1, 3, 4})), ShapeError);
  CHECK_THROWS_AS(maxpool2x2_forward(Tensor<double>({1, 1, 4, 5})), ShapeError);
}

TEST_CASE("maxpool2x2 backward matches finite differences away from ties") {
  CounterRng rng(41, 0);
  Tensor<double> x({2, 2, 4, 4});
  bool ok = false;
  while (!ok) {
    x = random_tensor<double>({2, 2, 4, 4}, rng);
    ok = true;
    // regenerate until every window has a clear unique max
    for (int64_t b = 0; b < 2 && ok; ++b)
      for (int64_t c = 0; c < 2 && ok; ++c)
        for (int64_t oh = 0; oh < 2 && ok; ++oh)
          for (int64_t ow = 0; ow < 2 && ok; ++ow) {
            double vals[4];
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx)
                vals[dy * 2 + dx] =
                    x[((b * 2 + c) * 4 + 2 * oh + dy) * 4 + 2 * ow + dx];
            std::sort(vals, vals + 4);
            if (vals[3] - vals[2] < 1e-2) ok = false;
          }
  }
  PoolResult<double> r = maxpool2x2_forward(x);
  Tensor<double> c = random_tensor<double>(r.output.shape, rng);
  Tensor<double> gx = maxpool2x2_backward(r.argmax, x.shape, c);
  auto scalar = [&] { return objective(c, [&] { return maxpool2x2_forward(x).output; }); };
  CHECK(max_rel_err(finite_diff(x, scalar), gx) < 1e-6);
}

TEST_CASE("softmax cross entropy: uniform logits give ln(C)") {
  Tensor<double> logits({2, 10});
  LossResult<double> r = softmax_cross_entropy(logits, {3, 7});
  CHECK(r.loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("softmax cross entropy: concentrated logits drive loss to zero") {
  Tensor<double> logits({1, 4});
  logits[2] = 50.0;
  LossResult<double> r = softmax_cross_entropy(logits, {2});
  CHECK(r.loss < 1e-12);
}

TEST_CASE("softmax cross entropy rejects out-of-range labels") {
  Tensor<double> logits({2, 3});
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {0, 3}), DataError);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {-1, 0}), DataError);
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  CounterRng rng(43, 0);
  Tensor<double> logits = random_tensor<double>({4, 3}, rng);
  std::vector<int32_t> labels = {0, 2, 1, 2};
  LossResult<double> r = softmax_cross_entropy(logits, labels);
  auto scalar = [&] { return softmax_cross_entropy(logits, labels).loss; };
  CHECK(max_rel_err(finite_diff(logits, scalar), r.grad_logits) < 1e-6);
}

TEST_CASE("conv family specs compose and end in the class head") {
  for (const char* tag : {"conv2", "conv4", "conv6", "conv8"}) {
    NetworkSpec spec = make_conv_family(tag, {3, 32, 32}, 10);
    CHECK(spec.layers.back().out_features == 10);
    CHECK_NOTHROW(validate_spec(spec));
  }
  // conv8 needs four poolings; 16x16 input leaves a 1x1 map, still valid
  CHECK_NOTHROW(make_conv_family("conv8", {3, 16, 16}, 10));
  // but an 8x8 input cannot take the fourth pool (odd 1x1 -> error earlier)
  CHECK_THROWS(make_conv_family("conv8", {3, 8, 8}, 10));
  CHECK_THROWS_AS(make_conv_family("conv5", {3, 32, 32}, 10), ConfigError);
}

TEST_CASE("spec text round-trips") {
  NetworkSpec spec = make_conv_family("conv4", {3, 32, 32}, 10);
  NetworkSpec back = parse_spec(serialize_spec(spec));
  CHECK(back.name == spec.name);
  CHECK(back.layers.size() == spec.layers.size());
  CHECK(back.input_shape == spec.input_shape);
  CHECK(serialize_spec(back) == serialize_spec(spec));
}
