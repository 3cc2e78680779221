#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evtag/decision.hpp"

namespace evtag {

// Joint typology of correctness x certainty tag.
struct UncertaintyConfusion {
  std::uint64_t tc = 0;  // correct, certain
  std::uint64_t fc = 0;  // incorrect, certain
  std::uint64_t tu = 0;  // incorrect, uncertain
  std::uint64_t fu = 0;  // correct, uncertain

  std::uint64_t total() const { return tc + fc + tu + fu; }
  std::uint64_t correct() const { return tc + fu; }
  std::uint64_t incorrect() const { return fc + tu; }

  UncertaintyConfusion& operator+=(const UncertaintyConfusion& o) {
    tc += o.tc; fc += o.fc; tu += o.tu; fu += o.fu;
    return *this;
  }
  friend bool operator==(const UncertaintyConfusion&, const UncertaintyConfusion&) = default;
};

// Ratios with a zero denominator are std::nullopt ("undefined"), never 0.
struct UncertaintyRates {
  double uacc = 0.0;
  std::optional<double> utpr;
  std::optional<double> ufpr;
  std::optional<double> ugmean;
};

struct MetricReport {
  UncertaintyRates rates;
  double accuracy = 0.0;
  double ece = 0.0;
  double brier = 0.0;
  UncertaintyConfusion counts;
};

inline constexpr std::size_t kDefaultEceBins = 15;

UncertaintyConfusion confusion(std::span<const DecisionRecord> decisions,
                               std::span<const std::uint32_t> truths);

// Throws EmptyConfusion when there are no instances.
UncertaintyRates uncertainty_metrics(const UncertaintyConfusion& c);

// Equal-width bins over [0, 1] with right-inclusive edges; empty bins are
// skipped. ECE = sum_b (|b| / N) |acc(b) - conf(b)|.
double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t num_bins = kDefaultEceBins);

// Mean over instances of the squared distance to the one-hot label.
double brier(std::span<const std::vector<double>> probs,
             std::span<const std::uint32_t> labels);

struct ConservationResult {
  bool ok = true;
  std::optional<double> offending_tau;
  std::string detail;
};

// Checks that T = TC + FU and F = FC + TU stay constant across a sweep in
// which only the threshold varies.
ConservationResult conservation_check(
    std::span<const std::pair<double, UncertaintyConfusion>> sweep);

// Full report for one decision batch against the test split it was made on;
// decisions are matched to records by instance id. ECE uses the predictive
// mean's maximum as confidence, Brier the predictive mean itself.
MetricReport evaluate(std::span<const DecisionRecord> decisions,
                      std::span<const InstanceRecord> test,
                      std::size_t num_bins = kDefaultEceBins);

nlohmann::ordered_json report_to_json(const MetricReport& report);
// Column layout: UAcc,UTPR,UFPR,UGMean,TC,FC,TU,FU,Accuracy,ECE,Brier.
std::string report_csv_header();
std::string report_csv_row(const MetricReport& report);

}  // namespace evtag
