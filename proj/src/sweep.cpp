#include "evtag/sweep.hpp"

#include <cmath>
#include <sstream>

#include "evtag/error.hpp"
#include "evtag/text_format.hpp"

namespace evtag {
namespace {

std::string optional_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("undefined");
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

SweepRow make_row(TaggerMethod method, std::size_t k, double threshold,
                  const UncertaintyConfusion& counts) {
  return {method, k, threshold, uncertainty_metrics(counts), counts};
}

void enforce_conservation(std::span<const std::pair<double, UncertaintyConfusion>> sweep,
                          const std::string& where) {
  const ConservationResult check = conservation_check(sweep);
  if (!check.ok) throw Error(ErrorCode::ConservationViolation, where + ": " + check.detail);
}

}  // namespace

std::vector<double> threshold_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs step > 0 and hi >= lo");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return out;
}

void SweepSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (k_values.empty() || tau_values.empty() || pe_thresholds.empty()) {
    fail("sweep grids must be nonempty");
  }
  for (std::size_t k : k_values) {
    if (k < 1) fail("k values must be at least 1");
  }
  for (double t : tau_values) {
    if (!(t > 0.0 && t < 1.0)) fail("tau values must lie in (0, 1)");
  }
  for (double t : pe_thresholds) {
    if (!(t >= 0.0)) fail("entropy thresholds must be non-negative");
  }
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 1.0)) fail("require 0 <= q_lo < q_hi <= 1");
}

std::optional<std::size_t> select_best(std::span<const SweepRow> rows, TaggerMethod method,
                                       std::optional<std::size_t> k) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (r.method != method || (k && r.k != *k)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const SweepRow& b = rows[*best];
    const double g = r.rates.ugmean.value_or(-1.0);
    const double gb = b.rates.ugmean.value_or(-1.0);
    if (g > gb || (g == gb && r.counts.fc < b.counts.fc)) best = i;
  }
  return best;
}

SweepResult run_sweep(std::span<const InstanceRecord> evidence,
                      std::span<const InstanceRecord> test, const SweepSpec& spec) {
  spec.validate();
  if (test.empty()) throw Error(ErrorCode::EmptyConfusion, "sweep needs a nonempty test split");

  // Labels are read here for scoring only; tagging below never sees them.
  std::vector<std::uint32_t> truths;
  truths.reserve(test.size());
  for (const InstanceRecord& r : test) truths.push_back(r.true_label);

  TaggerConfig cfg;
  cfg.q_lo = spec.q_lo;
  cfg.q_hi = spec.q_hi;
  cfg.log_base = spec.log_base;
  cfg.workers = spec.workers;
  const EvidenceIndex index = build_evidence_index(evidence, cfg);

  SweepResult result;
  for (std::size_t k : spec.k_values) {
    cfg.k = k;
    std::vector<DecisionRecord> decisions = tag_batch(test, index, cfg);
    std::vector<std::pair<double, UncertaintyConfusion>> series;
    for (double tau : spec.tau_values) {
      for (DecisionRecord& d : decisions) d.tag = evidential_tag(d, tau);
      const UncertaintyConfusion counts = confusion(decisions, truths);
      series.emplace_back(tau, counts);
      result.rows.push_back(make_row(TaggerMethod::Evidential, k, tau, counts));
    }
    enforce_conservation(series, "evidential sweep at k=" + std::to_string(k));
  }

  std::vector<DecisionRecord> baseline = tag_batch_entropy(test, 0.0, spec.log_base);
  std::vector<std::pair<double, UncertaintyConfusion>> series;
  for (double threshold : spec.pe_thresholds) {
    for (DecisionRecord& d : baseline) {
      d.tag = d.entropy <= threshold ? Tag::Certain : Tag::Uncertain;
    }
    const UncertaintyConfusion counts = confusion(baseline, truths);
    series.emplace_back(threshold, counts);
    result.rows.push_back(make_row(TaggerMethod::Entropy, 0, threshold, counts));
  }
  enforce_conservation(series, "entropy sweep");

  result.best_evidential = result.rows[*select_best(result.rows, TaggerMethod::Evidential)];
  result.best_entropy = result.rows[*select_best(result.rows, TaggerMethod::Entropy)];
  return result;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "method,k,tau,UAcc,UTPR,UFPR,UGMean,TC,FC,TU,FU\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.method) << ',' << r.k << ',' << format_double(r.threshold) << ','
        << format_double(r.rates.uacc) << ',' << optional_csv(r.rates.utpr) << ','
        << optional_csv(r.rates.ufpr) << ',' << optional_csv(r.rates.ugmean) << ','
        << r.counts.tc << ',' << r.counts.fc << ',' << r.counts.tu << ',' << r.counts.fu
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json sweep_row_to_json(const SweepRow& r) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["k"] = r.k;
  j["threshold"] = r.threshold;
  j["uacc"] = r.rates.uacc;
  j["utpr"] = optional_json(r.rates.utpr);
  j["ufpr"] = optional_json(r.rates.ufpr);
  j["ugmean"] = optional_json(r.rates.ugmean);
  j["tc"] = r.counts.tc;
  j["fc"] = r.counts.fc;
  j["tu"] = r.counts.tu;
  j["fu"] = r.counts.fu;
  return j;
}

}  // namespace evtag
