#include "mpt/bench_select.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "mpt/powerprop.hpp"
#include "mpt/rng.hpp"
#include "mpt/supermask.hpp"

namespace mpt {

namespace {

double median(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<SelectBenchRow> bench_selection(const std::vector<int64_t>& sizes,
                                            const std::vector<double>& alphas,
                                            int iters, double prune_ratio,
                                            uint64_t seed) {
  if (iters < 1) throw ConfigError("bench-select needs iters >= 1");
  std::vector<SelectBenchRow> rows;
  using clock = std::chrono::steady_clock;

  for (int64_t size : sizes) {
    for (double alpha : alphas) {
      check_powerprop_alpha(alpha);
      Tensor<float> s0({size});
      Tensor<float> delta({size});
      CounterRng rng(seed, rng_stream::kBench + static_cast<uint64_t>(size));
      for (int64_t i = 0; i < size; ++i) s0[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
      for (int64_t i = 0; i < size; ++i)
        delta[i] = static_cast<float>(rng.uniform(-1e-3, 1e-3));

      // Threshold calibrated once on the state seen by the first selection.
      std::vector<Tensor<float>> first(1, s0);
      for (int64_t i = 0; i < size; ++i) first[0][i] += delta[i];
      first[0] = powerprop_apply(first[0], alpha);
      float theta = calibrate_theta_global(first, prune_ratio);

      auto run_arm = [&](bool use_threshold, Masks* first_masks) {
        std::vector<Tensor<float>> scores(1, s0);
        Tensor<float>& s = scores[0];
        std::vector<double> times;
        times.reserve(static_cast<size_t>(iters));
        for (int it = 0; it < iters; ++it) {
          auto t0 = clock::now();
          for (int64_t i = 0; i < size; ++i) s[i] += delta[i];
          std::vector<Tensor<float>> S(1, powerprop_apply(s, alpha));
          Masks masks = use_threshold
                            ? select_mask_threshold(S, theta).masks
                            : select_mask_topk(S, prune_ratio,
                                               SelectionPolicy::Scope::global);
          auto t1 = clock::now();
          times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
          if (it == 0 && first_masks) *first_masks = std::move(masks);
        }
        return median(times);
      };

      SelectBenchRow row;
      row.size = size;
      row.alpha = alpha;
      Masks sort_masks, thr_masks;
      row.sort_ns = run_arm(false, &sort_masks);
      row.threshold_ns = run_arm(true, &thr_masks);
      row.ratio = row.sort_ns / row.threshold_ns;
      row.masks_equal = sort_masks.size() == thr_masks.size() &&
                        sort_masks[0].data == thr_masks[0].data;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string select_bench_csv(const std::vector<SelectBenchRow>& rows) {
  std::string out = "size,alpha,sort_ns,threshold_ns,ratio,masks_equal\n";
  char buf[160];
  for (const SelectBenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%g,%.0f,%.0f,%.3f,%d\n",
                  static_cast<long long>(r.size), r.alpha, r.sort_ns,
                  r.threshold_ns, r.ratio, r.masks_equal ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace mpt
