#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtag/kv_file.hpp"

namespace evtag {

enum class SplitRole { Evidence, Test };
enum class LogBase { E, Two, Ten };

std::string_view to_string(SplitRole role);
std::string_view to_string(LogBase base);
SplitRole parse_split_role(std::string_view text);
LogBase parse_log_base(std::string_view text);

// Softmax rows are stored as f32; valid rows must survive that rounding.
inline constexpr double kRowSumTolerance = 1e-4;

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kEmbeddingsFile = "embeddings.f32";
inline constexpr std::string_view kSamplesFile = "mc_samples.f32";
inline constexpr std::string_view kLabelsFile = "labels.u32";

// M stochastic softmax outputs over C classes, row-major [pass][class].
class PredictiveSampleSet {
 public:
  PredictiveSampleSet() = default;
  PredictiveSampleSet(std::size_t num_passes, std::size_t num_classes,
                      std::vector<float> values);

  std::size_t num_passes() const { return num_passes_; }
  std::size_t num_classes() const { return num_classes_; }
  std::span<const float> row(std::size_t pass) const {
    return {values_.data() + pass * num_classes_, num_classes_};
  }
  float at(std::size_t pass, std::size_t cls) const {
    return values_[pass * num_classes_ + cls];
  }
  std::span<const float> values() const { return values_; }

  friend bool operator==(const PredictiveSampleSet&,
                         const PredictiveSampleSet&) = default;

 private:
  std::size_t num_passes_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> values_;
};

struct InstanceRecord {
  std::uint64_t instance_id = 0;
  std::vector<float> embedding;
  PredictiveSampleSet samples;
  std::uint32_t true_label = 0;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct DatasetManifest {
  std::size_t num_instances = 0;
  std::size_t num_classes = 0;
  std::size_t num_passes = 0;
  std::size_t embedding_dim = 0;
  SplitRole split_role = SplitRole::Test;
  LogBase log_base = LogBase::Two;
  // Instance ids are id_base + row index.
  std::uint64_t id_base = 0;
  std::uint64_t embeddings_bytes = 0;
  std::uint64_t samples_bytes = 0;
  std::uint64_t labels_bytes = 0;
  std::string embeddings_sha256;
  std::string samples_sha256;
  std::string labels_sha256;

  KvFile to_kv() const;
  // Parses and checks the shape invariants (C >= 2, M >= 2, d >= 1, n >= 1,
  // declared byte sizes consistent with the shape).
  static DatasetManifest from_kv(const KvFile& kv);
};

struct Split {
  DatasetManifest manifest;
  std::vector<InstanceRecord> records;
};

// Checks one record against the row-sum, range and embedding invariants.
// Throws NonStochasticRow / ZeroEmbedding / InvalidArgument.
void validate_record(const InstanceRecord& record, std::size_t num_classes,
                     std::size_t num_passes, std::size_t embedding_dim);

// `path` is either a manifest file or the dataset directory holding one.
std::vector<InstanceRecord> load_split(const std::filesystem::path& path);
Split load_split_with_manifest(const std::filesystem::path& path);

// Writes the four dataset files into `dir` (created if missing). Records must
// be nonempty, share C/M/d, and carry consecutive instance ids.
DatasetManifest write_split(std::span<const InstanceRecord> records,
                            const std::filesystem::path& dir,
                            SplitRole role = SplitRole::Test,
                            LogBase log_base = LogBase::Two);

}  // namespace evtag
