#ifndef MPT_BENCH_SELECT_HPP
#define MPT_BENCH_SELECT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace mpt {

struct SelectBenchRow {
  int64_t size = 0;
  double alpha = 1.0;
  double sort_ns = 0;
  double threshold_ns = 0;
  double ratio = 0;  // sort_ns / threshold_ns
  bool masks_equal = false;
};

// Times one full select+update step (score update, power-prop transform,
// mask selection) under sort-based top-k vs calibrated thresholding, median
// over `iters` iterations per (size, alpha) cell. masks_equal records whether
// both selectors produced the same mask on the calibration state.
std::vector<SelectBenchRow> bench_selection(const std::vector<int64_t>& sizes,
                                            const std::vector<double>& alphas,
                                            int iters, double prune_ratio,
                                            uint64_t seed);

// CSV: size,alpha,sort_ns,threshold_ns,ratio,masks_equal (ratio to 3 decimals).
std::string select_bench_csv(const std::vector<SelectBenchRow>& rows);

}  // namespace mpt

#endif  // MPT_BENCH_SELECT_HPP
