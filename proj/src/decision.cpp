#include "evtag/decision.hpp"

#include <fstream>
#include <sstream>

#include "evtag/binary_io.hpp"
#include "evtag/error.hpp"
#include "evtag/parallel.hpp"
#include "evtag/text_format.hpp"

namespace evtag {
namespace {

nlohmann::ordered_json focal_to_json(const FocalElement& f) {
  if (f.is_omega) return "omega";
  return f.class_index;
}

FocalElement focal_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "omega") return FocalElement::omega();
  if (j.is_number_unsigned()) return FocalElement::singleton(j.get<std::size_t>());
  throw Error(ErrorCode::ManifestMalformed, "focal element must be a class index or \"omega\"");
}

nlohmann::ordered_json mass_to_json(const MassFunction& m) {
  nlohmann::ordered_json j;
  j["singleton"] = m.singleton;
  j["omega"] = m.ignorance;
  return j;
}

MassFunction mass_from_json(const nlohmann::json& j) {
  MassFunction m;
  m.singleton = j.at("singleton").get<std::vector<double>>();
  m.ignorance = j.at("omega").get<double>();
  return m;
}

Tag parse_tag(const std::string& text) {
  if (text == "certain") return Tag::Certain;
  if (text == "uncertain") return Tag::Uncertain;
  throw Error(ErrorCode::ManifestMalformed, "unknown tag '" + text + "'");
}

TaggerMethod parse_method(const std::string& text) {
  if (text == "evidential") return TaggerMethod::Evidential;
  if (text == "entropy") return TaggerMethod::Entropy;
  throw Error(ErrorCode::ManifestMalformed, "unknown method '" + text + "'");
}

template <typename TagOne>
std::vector<DecisionRecord> tag_all(std::span<const InstanceRecord> test, std::size_t workers,
                                    TagOne&& tag_one) {
  std::vector<DecisionRecord> out(test.size());
  std::vector<std::string> failures(test.size());
  std::vector<int> failure_codes(test.size(), -1);
  parallel_for(test.size(), workers, [&](std::size_t i) {
    try {
      out[i] = tag_one(test[i]);
    } catch (const Error& e) {
      failures[i] = e.what();
      failure_codes[i] = static_cast<int>(e.code());
    }
  });
  std::string message;
  int first_code = -1;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (failure_codes[i] < 0) continue;
    if (first_code < 0) first_code = failure_codes[i];
    if (!message.empty()) message += "; ";
    message += "instance " + std::to_string(test[i].instance_id) + ": " + failures[i];
  }
  if (first_code >= 0) throw Error(static_cast<ErrorCode>(first_code), message);
  return out;
}

}  // namespace

std::string_view to_string(Tag tag) { return tag == Tag::Certain ? "certain" : "uncertain"; }

std::string_view to_string(TaggerMethod method) {
  return method == TaggerMethod::Evidential ? "evidential" : "entropy";
}

void TaggerConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
  }
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "require 0 <= q_lo < q_hi <= 1");
  }
}

std::vector<MassFunction> evidence_masses(std::span<const InstanceRecord> evidence,
                                          double q_lo, double q_hi) {
  std::vector<MassFunction> out;
  out.reserve(evidence.size());
  for (const InstanceRecord& r : evidence) {
    out.push_back(mass_from_credal(credal_intervals(r.samples, q_lo, q_hi)));
  }
  return out;
}

EvidenceIndex build_evidence_index(std::span<const InstanceRecord> evidence,
                                   const TaggerConfig& cfg) {
  return EvidenceIndex::build(evidence, evidence_masses(evidence, cfg.q_lo, cfg.q_hi));
}

Tag evidential_tag(const DecisionRecord& record, double tau) {
  const bool agree = record.individual_class == record.fused_class;
  const bool no_ignorance = !record.individual_focal.is_omega && !record.fused_focal.is_omega;
  const bool strong = record.bel_individual >= tau && record.bel_fused >= tau;
  return agree && no_ignorance && strong ? Tag::Certain : Tag::Uncertain;
}

DecisionRecord tag_instance(const InstanceRecord& x, const EvidenceIndex& index,
                            const TaggerConfig& cfg) {
  cfg.validate();
  const std::span<const float> embedding = x.embedding;
  const PredictiveSampleSet& samples = x.samples;

  DecisionRecord rec;
  rec.method = TaggerMethod::Evidential;
  rec.instance_id = x.instance_id;
  const PredictiveSummary summary = predictive_summary(samples, cfg.log_base);
  rec.predicted_class = summary.predicted_class;
  rec.entropy = summary.entropy;

  const CredalIntervalVector intervals = credal_intervals(samples, cfg.q_lo, cfg.q_hi);
  rec.intervals_clamped = intervals.clamped;
  rec.individual_mass = mass_from_credal(intervals);
  if (rec.individual_mass.num_classes() != index.num_classes()) {
    throw Error(ErrorCode::HeterogeneousShapes, "test and evidence class counts differ");
  }
  rec.individual_class = argmax_singleton(rec.individual_mass);
  rec.individual_focal = argmax_focal(rec.individual_mass);
  rec.bel_individual = rec.individual_mass.singleton[rec.individual_class];
  rec.plausibility_individual = plausibility(rec.individual_mass);

  const std::vector<Neighbor> neighbors = index.query(embedding, cfg.k);
  std::vector<MassFunction> masses;
  masses.reserve(neighbors.size());
  rec.neighbors.reserve(neighbors.size());
  for (const Neighbor& n : neighbors) {
    masses.push_back(index.mass(n.row));
    rec.neighbors.push_back({n.evidence_id, n.distance, index.label(n.row)});
  }
  FusionOutcome fusion = fuse_all(masses);
  rec.fusion_fallback = fusion.fallback_triggered;
  rec.fused_mass = std::move(fusion.fused);
  rec.fused_class = argmax_singleton(rec.fused_mass);
  rec.fused_focal = argmax_focal(rec.fused_mass);
  rec.bel_fused = rec.fused_mass.singleton[rec.fused_class];

  rec.tag = evidential_tag(rec, cfg.tau);
  return rec;
}

DecisionRecord tag_instance_entropy(const InstanceRecord& x, double pe_threshold,
                                    LogBase log_base) {
  if (!(pe_threshold >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "entropy threshold must be non-negative");
  }
  DecisionRecord rec;
  rec.method = TaggerMethod::Entropy;
  rec.instance_id = x.instance_id;
  const PredictiveSummary summary = predictive_summary(x.samples, log_base);
  rec.predicted_class = summary.predicted_class;
  rec.entropy = summary.entropy;
  rec.tag = summary.entropy <= pe_threshold ? Tag::Certain : Tag::Uncertain;
  return rec;
}

std::vector<DecisionRecord> tag_batch(std::span<const InstanceRecord> test,
                                      const EvidenceIndex& index, const TaggerConfig& cfg) {
  cfg.validate();
  return tag_all(test, cfg.workers,
                 [&](const InstanceRecord& x) { return tag_instance(x, index, cfg); });
}

std::vector<DecisionRecord> tag_batch_entropy(std::span<const InstanceRecord> test,
                                              double pe_threshold, LogBase log_base) {
  return tag_all(test, 1, [&](const InstanceRecord& x) {
    return tag_instance_entropy(x, pe_threshold, log_base);
  });
}

std::string decision_to_json_line(const DecisionRecord& r) {
  nlohmann::ordered_json j;
  j["instance_id"] = r.instance_id;
  j["method"] = std::string(to_string(r.method));
  j["tag"] = std::string(to_string(r.tag));
  j["predicted_class"] = r.predicted_class;
  j["entropy"] = r.entropy;
  if (r.method == TaggerMethod::Evidential) {
    j["individual_class"] = r.individual_class;
    j["individual_focal"] = focal_to_json(r.individual_focal);
    j["fused_class"] = r.fused_class;
    j["fused_focal"] = focal_to_json(r.fused_focal);
    j["bel_individual"] = r.bel_individual;
    j["bel_fused"] = r.bel_fused;
    j["individual_mass"] = mass_to_json(r.individual_mass);
    j["fused_mass"] = mass_to_json(r.fused_mass);
    j["plausibility_individual"] = r.plausibility_individual;
    nlohmann::ordered_json neighbors = nlohmann::ordered_json::array();
    for (const AuditNeighbor& n : r.neighbors) {
      nlohmann::ordered_json e;
      e["evidence_id"] = n.evidence_id;
      e["distance"] = n.distance;
      e["evidence_label"] = n.evidence_label;
      neighbors.push_back(std::move(e));
    }
    j["neighbors"] = std::move(neighbors);
    j["fusion_fallback"] = r.fusion_fallback;
    j["intervals_clamped"] = r.intervals_clamped;
  }
  return j.dump();
}

DecisionRecord decision_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ManifestMalformed, std::string("decision line: ") + e.what());
  }
  try {
    DecisionRecord r;
    r.instance_id = j.at("instance_id").get<std::uint64_t>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.tag = parse_tag(j.at("tag").get<std::string>());
    r.predicted_class = j.at("predicted_class").get<std::size_t>();
    r.entropy = j.at("entropy").get<double>();
    if (r.method == TaggerMethod::Evidential) {
      r.individual_class = j.at("individual_class").get<std::size_t>();
      r.individual_focal = focal_from_json(j.at("individual_focal"));
      r.fused_class = j.at("fused_class").get<std::size_t>();
      r.fused_focal = focal_from_json(j.at("fused_focal"));
      r.bel_individual = j.at("bel_individual").get<double>();
      r.bel_fused = j.at("bel_fused").get<double>();
      r.individual_mass = mass_from_json(j.at("individual_mass"));
      r.fused_mass = mass_from_json(j.at("fused_mass"));
      r.plausibility_individual = j.at("plausibility_individual").get<std::vector<double>>();
      for (const auto& e : j.at("neighbors")) {
        r.neighbors.push_back({e.at("evidence_id").get<std::uint64_t>(),
                               e.at("distance").get<double>(),
                               e.at("evidence_label").get<std::uint32_t>()});
      }
      r.fusion_fallback = j.at("fusion_fallback").get<bool>();
      r.intervals_clamped = j.at("intervals_clamped").get<bool>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ManifestMalformed, std::string("decision line: ") + e.what());
  }
}

void write_decisions_jsonl(const std::filesystem::path& path,
                           std::span<const DecisionRecord> records) {
  std::string text;
  for (const DecisionRecord& r : records) {
    text += decision_to_json_line(r);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<DecisionRecord> read_decisions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<DecisionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(decision_from_json_line(line));
  }
  return out;
}

std::string decisions_to_csv(std::span<const DecisionRecord> records) {
  std::ostringstream out;
  out << "instance_id,method,tag,predicted_class,bel_individual,bel_fused,"
         "neighbor_ids,neighbor_distances,neighbor_labels\n";
  for (const DecisionRecord& r : records) {
    std::string ids, distances, labels;
    for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
      const char* sep = i == 0 ? "" : ";";
      ids += sep + std::to_string(r.neighbors[i].evidence_id);
      distances += sep + format_double(r.neighbors[i].distance);
      labels += sep + std::to_string(r.neighbors[i].evidence_label);
    }
    out << r.instance_id << ',' << to_string(r.method) << ',' << to_string(r.tag) << ','
        << r.predicted_class << ',' << format_double(r.bel_individual) << ','
        << format_double(r.bel_fused) << ',' << ids << ',' << distances << ',' << labels
        << '\n';
  }
  return out.str();
}

}  // namespace evtag
