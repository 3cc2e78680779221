#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtag/decision.hpp"
#include "evtag/metrics.hpp"

namespace evtag {

// Evenly spaced grid [lo, hi] with the given step, values rounded to 1e-9 so
// that 0.05-steps print as 0.15 rather than 0.15000000000000002.
std::vector<double> threshold_grid(double lo, double hi, double step);

struct SweepSpec {
  std::vector<std::size_t> k_values{3, 10, 30, 50};
  std::vector<double> tau_values = threshold_grid(0.05, 0.95, 0.05);
  std::vector<double> pe_thresholds{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75};
  double q_lo = kDefaultQuantileLow;
  double q_hi = kDefaultQuantileHigh;
  LogBase log_base = LogBase::Two;
  std::size_t workers = 0;

  // Nonempty grids, k >= 1, tau in (0, 1), thresholds >= 0.
  void validate() const;
};

struct SweepRow {
  TaggerMethod method = TaggerMethod::Evidential;
  std::size_t k = 0;  // 0 for the entropy baseline
  double threshold = 0.0;  // tau or the entropy cutoff
  UncertaintyRates rates;
  UncertaintyConfusion counts;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepRow best_evidential;
  SweepRow best_entropy;
};

// Index of the row with the highest UG-Mean (undefined ranks lowest), ties
// going to the smaller FC and then to the earlier row. Rows are filtered by
// method and, when given, by k. Returns nullopt if nothing matches.
std::optional<std::size_t> select_best(std::span<const SweepRow> rows, TaggerMethod method,
                                       std::optional<std::size_t> k = std::nullopt);

// Evidential rows per (k, tau) from one tagging pass per k, then entropy rows
// per cutoff. Throws ConservationViolation if T or F drift within a k row
// or within the baseline sweep.
SweepResult run_sweep(std::span<const InstanceRecord> evidence,
                      std::span<const InstanceRecord> test, const SweepSpec& spec);

// Long format: method,k,tau,UAcc,UTPR,UFPR,UGMean,TC,FC,TU,FU.
std::string sweep_to_csv(std::span<const SweepRow> rows);
nlohmann::ordered_json sweep_row_to_json(const SweepRow& row);

}  // namespace evtag
