#include "evtag/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include "evtag/error.hpp"
#include "evtag/text_format.hpp"
#include "evtag/uncertainty.hpp"

namespace evtag {
namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::string optional_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("undefined");
}

}  // namespace

UncertaintyConfusion confusion(std::span<const DecisionRecord> decisions,
                               std::span<const std::uint32_t> truths) {
  if (decisions.size() != truths.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(decisions.size()) + " decisions for " +
                    std::to_string(truths.size()) + " labels");
  }
  UncertaintyConfusion c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const bool correct = decisions[i].predicted_class == truths[i];
    const bool certain = decisions[i].tag == Tag::Certain;
    if (correct && certain) ++c.tc;
    else if (!correct && certain) ++c.fc;
    else if (!correct) ++c.tu;
    else ++c.fu;
  }
  return c;
}

UncertaintyRates uncertainty_metrics(const UncertaintyConfusion& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyConfusion, "no evaluated instances");
  UncertaintyRates r;
  r.uacc = static_cast<double>(c.tu + c.tc) / static_cast<double>(c.total());
  r.utpr = ratio(c.tc, c.tc + c.fu);
  r.ufpr = ratio(c.fc, c.fc + c.tu);
  if (r.utpr && r.ufpr) r.ugmean = std::sqrt(*r.utpr * (1.0 - *r.ufpr));
  return r;
}

double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t num_bins) {
  if (confidences.size() != correct.size()) {
    throw Error(ErrorCode::LengthMismatch, "confidences and outcomes differ in length");
  }
  if (num_bins == 0) throw Error(ErrorCode::InvalidArgument, "ECE needs at least one bin");
  if (confidences.empty()) throw Error(ErrorCode::InvalidArgument, "ECE of an empty sample");

  std::vector<std::size_t> count(num_bins, 0);
  std::vector<CompensatedSum> conf_sum(num_bins);
  std::vector<std::size_t> hits(num_bins, 0);
  const double bins = static_cast<double>(num_bins);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorCode::OutOfRangeConfidence,
                  "confidence " + format_double(c) + " outside [0, 1]");
    }
    // Bin b covers (b / B, (b + 1) / B]; zero joins the first bin.
    std::size_t b = c <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(c * bins)) - 1;
    if (b >= num_bins) b = num_bins - 1;
    ++count[b];
    conf_sum[b].add(c);
    if (correct[i]) ++hits[b];
  }
  const double n = static_cast<double>(confidences.size());
  CompensatedSum total;
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (count[b] == 0) continue;
    const double size = static_cast<double>(count[b]);
    const double acc = static_cast<double>(hits[b]) / size;
    const double conf = conf_sum[b].value() / size;
    total.add(size / n * std::abs(acc - conf));
  }
  return total.value();
}

double brier(std::span<const std::vector<double>> probs,
             std::span<const std::uint32_t> labels) {
  if (probs.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "probabilities and labels differ in length");
  }
  if (probs.empty()) throw Error(ErrorCode::InvalidArgument, "Brier score of an empty sample");
  CompensatedSum total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] >= probs[i].size()) {
      throw Error(ErrorCode::InvalidArgument, "label outside the probability vector");
    }
    for (std::size_t c = 0; c < probs[i].size(); ++c) {
      const double target = c == labels[i] ? 1.0 : 0.0;
      const double diff = probs[i][c] - target;
      total.add(diff * diff);
    }
  }
  return total.value() / static_cast<double>(probs.size());
}

ConservationResult conservation_check(
    std::span<const std::pair<double, UncertaintyConfusion>> sweep) {
  ConservationResult result;
  if (sweep.empty()) return result;
  const std::uint64_t t = sweep.front().second.correct();
  const std::uint64_t f = sweep.front().second.incorrect();
  for (const auto& [tau, c] : sweep) {
    if (c.correct() != t || c.incorrect() != f) {
      result.ok = false;
      result.offending_tau = tau;
      result.detail = "at threshold " + format_double(tau) + ": TC+FU=" +
                      std::to_string(c.correct()) + " (expected " + std::to_string(t) +
                      "), FC+TU=" + std::to_string(c.incorrect()) + " (expected " +
                      std::to_string(f) + ")";
      return result;
    }
  }
  return result;
}

MetricReport evaluate(std::span<const DecisionRecord> decisions,
                      std::span<const InstanceRecord> test, std::size_t num_bins) {
  if (decisions.empty()) throw Error(ErrorCode::EmptyConfusion, "no decisions to evaluate");
  std::unordered_map<std::uint64_t, const InstanceRecord*> by_id;
  by_id.reserve(test.size());
  for (const InstanceRecord& r : test) by_id.emplace(r.instance_id, &r);

  std::vector<std::uint32_t> truths;
  std::vector<double> confidences;
  std::vector<bool> correct;
  std::vector<std::vector<double>> means;
  truths.reserve(decisions.size());
  for (const DecisionRecord& d : decisions) {
    auto it = by_id.find(d.instance_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::LengthMismatch,
                  "decision for unknown instance " + std::to_string(d.instance_id));
    }
    const InstanceRecord& r = *it->second;
    PredictiveSummary summary = predictive_summary(r.samples);
    truths.push_back(r.true_label);
    confidences.push_back(std::min(1.0, summary.mean[summary.predicted_class]));
    correct.push_back(summary.predicted_class == r.true_label);
    means.push_back(std::move(summary.mean));
  }

  MetricReport report;
  report.counts = confusion(decisions, truths);
  report.rates = uncertainty_metrics(report.counts);
  report.accuracy = static_cast<double>(report.counts.correct()) /
                    static_cast<double>(report.counts.total());
  report.ece = ece(confidences, correct, num_bins);
  report.brier = brier(means, truths);
  return report;
}

nlohmann::ordered_json report_to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["uacc"] = r.rates.uacc;
  j["utpr"] = optional_json(r.rates.utpr);
  j["ufpr"] = optional_json(r.rates.ufpr);
  j["ugmean"] = optional_json(r.rates.ugmean);
  j["tc"] = r.counts.tc;
  j["fc"] = r.counts.fc;
  j["tu"] = r.counts.tu;
  j["fu"] = r.counts.fu;
  j["accuracy"] = r.accuracy;
  j["ece"] = r.ece;
  j["brier"] = r.brier;
  return j;
}

std::string report_csv_header() { return "UAcc,UTPR,UFPR,UGMean,TC,FC,TU,FU,Accuracy,ECE,Brier"; }

std::string report_csv_row(const MetricReport& r) {
  return format_double(r.rates.uacc) + ',' + optional_csv(r.rates.utpr) + ',' +
         optional_csv(r.rates.ufpr) + ',' + optional_csv(r.rates.ugmean) + ',' +
         std::to_string(r.counts.tc) + ',' + std::to_string(r.counts.fc) + ',' +
         std::to_string(r.counts.tu) + ',' + std::to_string(r.counts.fu) + ',' +
         format_double(r.accuracy) + ',' + format_double(r.ece) + ',' +
         format_double(r.brier);
}

}  // namespace evtag
