#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evtag/dataset_io.hpp"
#include "evtag/ds_fusion.hpp"
#include "evtag/retrieval.hpp"

namespace evtag {

enum class Tag { Certain, Uncertain };
enum class TaggerMethod { Evidential, Entropy };

std::string_view to_string(Tag tag);
std::string_view to_string(TaggerMethod method);

struct TaggerConfig {
  std::size_t k = 3;
  double tau = 0.3;
  double q_lo = kDefaultQuantileLow;
  double q_hi = kDefaultQuantileHigh;
  LogBase log_base = LogBase::Two;
  // Batch workers; 0 picks the hardware concurrency. Output never depends on it.
  std::size_t workers = 0;

  // Throws InvalidArgument unless k >= 1, 0 < tau < 1 and 0 <= q_lo < q_hi <= 1.
  void validate() const;
};

struct AuditNeighbor {
  std::uint64_t evidence_id = 0;
  double distance = 0.0;
  std::uint32_t evidence_label = 0;

  friend bool operator==(const AuditNeighbor&, const AuditNeighbor&) = default;
};

struct DecisionRecord {
  TaggerMethod method = TaggerMethod::Evidential;
  std::uint64_t instance_id = 0;
  // The classifier's label: argmax of the predictive mean. Tagging never
  // changes it.
  std::size_t predicted_class = 0;
  double entropy = 0.0;
  Tag tag = Tag::Uncertain;

  // Evidential fields (left at defaults by the entropy baseline).
  std::size_t individual_class = 0;  // singleton argmax of the individual mass
  FocalElement individual_focal;
  std::size_t fused_class = 0;  // singleton argmax of the fused mass
  FocalElement fused_focal;
  double bel_individual = 0.0;
  double bel_fused = 0.0;
  MassFunction individual_mass;
  MassFunction fused_mass;
  std::vector<double> plausibility_individual;  // report only
  std::vector<AuditNeighbor> neighbors;         // ascending distance
  bool fusion_fallback = false;
  bool intervals_clamped = false;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

// Masses for the evidence split, one per record, from its credal intervals.
std::vector<MassFunction> evidence_masses(std::span<const InstanceRecord> evidence,
                                          double q_lo = kDefaultQuantileLow,
                                          double q_hi = kDefaultQuantileHigh);

EvidenceIndex build_evidence_index(std::span<const InstanceRecord> evidence,
                                   const TaggerConfig& cfg);

// Certain iff the individual and fused focal argmaxes are the same class (not
// Omega) and both singleton beliefs reach tau. Reads only stored beliefs, so a
// tau sweep can re-threshold one set of records.
Tag evidential_tag(const DecisionRecord& record, double tau);

// The true label of `x` is never read.
DecisionRecord tag_instance(const InstanceRecord& x, const EvidenceIndex& index,
                            const TaggerConfig& cfg);

DecisionRecord tag_instance_entropy(const InstanceRecord& x, double pe_threshold,
                                    LogBase log_base = LogBase::Two);

// Element-wise tag_instance, output in input order. Per-instance failures are
// collected and rethrown together, labelled with their instance ids.
std::vector<DecisionRecord> tag_batch(std::span<const InstanceRecord> test,
                                      const EvidenceIndex& index,
                                      const TaggerConfig& cfg);

std::vector<DecisionRecord> tag_batch_entropy(std::span<const InstanceRecord> test,
                                              double pe_threshold,
                                              LogBase log_base = LogBase::Two);

// JSON-lines with a fixed field order; one record per line.
std::string decision_to_json_line(const DecisionRecord& record);
DecisionRecord decision_from_json_line(const std::string& line);
void write_decisions_jsonl(const std::filesystem::path& path,
                           std::span<const DecisionRecord> records);
std::vector<DecisionRecord> read_decisions_jsonl(const std::filesystem::path& path);

// Audit CSV: id, tag, predicted class, beliefs and the neighbour lists.
std::string decisions_to_csv(std::span<const DecisionRecord> records);

}  // namespace evtag
