#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "evtag/dataset_io.hpp"
#include "evtag/ds_fusion.hpp"

namespace evtag {

struct Neighbor {
  std::uint64_t evidence_id = 0;
  double similarity = 0.0;
  // Cosine distance, 1 - similarity.
  double distance = 0.0;
  // Row in the index, for looking up the attached mass and label.
  std::size_t row = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Strict ordering used for every result list: higher similarity first,
// then smaller evidence id.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.evidence_id < b.evidence_id;
}

// Unit-length copy of `x`, normalised in double precision.
// Throws ZeroEmbedding for an all-zero (or non-finite norm) vector.
std::vector<double> l2_normalize(std::span<const float> x);

// Immutable exact inner-product index over L2-normalised evidence embeddings.
// Queries scan every row (O(n d)); nothing is approximated.
class EvidenceIndex {
 public:
  EvidenceIndex() = default;

  static EvidenceIndex build(std::span<const InstanceRecord> evidence,
                             std::vector<MassFunction> masses);

  std::vector<Neighbor> query(std::span<const float> x, std::size_t k) const;
  std::vector<std::vector<Neighbor>> query_batch(
      std::span<const std::vector<float>> queries, std::size_t k,
      std::size_t workers = 0) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return masses_.empty() ? 0 : masses_[0].num_classes(); }

  std::span<const float> row(std::size_t i) const {
    return {normalized_.data() + i * dim_, dim_};
  }
  std::uint64_t id(std::size_t i) const { return ids_[i]; }
  const MassFunction& mass(std::size_t i) const { return masses_[i]; }
  std::uint32_t label(std::size_t i) const { return labels_[i]; }

  // Snapshot: index.json + normalized.f32 + masses.f64 + ids.u64 + labels.u32.
  // `extra` keys are stored verbatim in index.json.
  void save(const std::filesystem::path& dir,
            const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) const;
  static EvidenceIndex load(const std::filesystem::path& dir,
                            nlohmann::ordered_json* extra = nullptr);

 private:
  void assemble(std::vector<float> normalized, std::vector<std::uint64_t> ids,
                std::vector<MassFunction> masses, std::vector<std::uint32_t> labels,
                std::size_t dim);
  void similarities(std::span<const double> unit_query, std::span<double> out) const;

  static constexpr std::size_t kLanes = 8;

  std::size_t dim_ = 0;
  std::vector<float> normalized_;  // n x d, row-major
  std::vector<float> blocked_;     // [block][component][lane], zero-padded
  std::vector<std::uint64_t> ids_;
  std::vector<MassFunction> masses_;
  std::vector<std::uint32_t> labels_;
};

}  // namespace evtag
