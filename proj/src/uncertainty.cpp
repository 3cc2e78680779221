#include "evtag/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evtag/error.hpp"

namespace evtag {

double log_base_value(LogBase base) {
  switch (base) {
    case LogBase::E: return 1.0;
    case LogBase::Two: return std::numbers::ln2;
    case LogBase::Ten: return std::numbers::ln10;
  }
  return std::numbers::ln2;
}

double entropy(std::span<const double> probs, LogBase base) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(0.0, h / log_base_value(base));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  }
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PredictiveSummary predictive_summary(const PredictiveSampleSet& samples,
                                     LogBase base) {
  const std::size_t passes = samples.num_passes();
  const std::size_t classes = samples.num_classes();
  PredictiveSummary out;
  out.mean.assign(classes, 0.0);
  for (std::size_t m = 0; m < passes; ++m) {
    const auto row = samples.row(m);
    for (std::size_t c = 0; c < classes; ++c) out.mean[c] += row[c];
  }
  double total = 0.0;
  for (double& v : out.mean) {
    v /= static_cast<double>(passes);
    total += v;
  }
  if (total > 0.0 && total != 1.0) {
    for (double& v : out.mean) v /= total;
  }
  out.entropy = entropy(out.mean, base);
  out.predicted_class = argmax(out.mean);
  return out;
}

CredalIntervalVector credal_intervals(const PredictiveSampleSet& samples,
                                      double q_lo, double q_hi) {
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "require 0 <= q_lo < q_hi <= 1");
  }
  const std::size_t passes = samples.num_passes();
  const std::size_t classes = samples.num_classes();
  CredalIntervalVector out;
  out.lower.resize(classes);
  out.upper.resize(classes);
  std::vector<double> column(passes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t m = 0; m < passes; ++m) column[m] = samples.at(m, c);
    std::sort(column.begin(), column.end());
    out.lower[c] = empirical_quantile(column, q_lo);
    out.upper[c] = empirical_quantile(column, q_hi);
  }

  double lower_sum = 0.0;
  for (double v : out.lower) lower_sum += v;
  if (lower_sum > 1.0) {
    for (double& v : out.lower) v /= lower_sum;
    out.clamped = true;
  }
  return out;
}

}  // namespace evtag
