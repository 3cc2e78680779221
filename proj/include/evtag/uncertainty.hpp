#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evtag/dataset_io.hpp"

namespace evtag {

inline constexpr double kDefaultQuantileLow = 0.1;
inline constexpr double kDefaultQuantileHigh = 0.9;

struct PredictiveSummary {
  std::vector<double> mean;
  double entropy = 0.0;
  std::size_t predicted_class = 0;
};

// Per-class [lower, upper] probability bounds from MC-pass quantiles.
struct CredalIntervalVector {
  std::vector<double> lower;
  std::vector<double> upper;
  // Set when the lower bounds summed above one and were rescaled onto the
  // simplex boundary (ignorance mass then becomes exactly zero).
  bool clamped = false;
};

double log_base_value(LogBase base);

// Shannon entropy in the requested base with 0 log 0 := 0.
double entropy(std::span<const double> probs, LogBase base);

// Index of the maximum; the smallest index wins ties.
std::size_t argmax(std::span<const double> values);

// Linear interpolation between order statistics (type 7): position
// h = (n - 1) q, value x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
// `sorted` must be ascending and nonempty; q in [0, 1].
double empirical_quantile(std::span<const double> sorted, double q);

// Mean over passes (renormalised to sum to one), entropy of the mean and its
// argmax.
PredictiveSummary predictive_summary(const PredictiveSampleSet& samples,
                                     LogBase base = LogBase::Two);

CredalIntervalVector credal_intervals(const PredictiveSampleSet& samples,
                                      double q_lo = kDefaultQuantileLow,
                                      double q_hi = kDefaultQuantileHigh);

}  // namespace evtag
