#include "evtag/dataset_io.hpp"

#include <cmath>
#include <system_error>

#include "evtag/binary_io.hpp"
#include "evtag/error.hpp"

namespace evtag {
namespace fs = std::filesystem;

std::string_view to_string(SplitRole role) {
  return role == SplitRole::Evidence ? "evidence" : "test";
}

std::string_view to_string(LogBase base) {
  switch (base) {
    case LogBase::E: return "e";
    case LogBase::Two: return "2";
    case LogBase::Ten: return "10";
  }
  return "2";
}

SplitRole parse_split_role(std::string_view text) {
  if (text == "evidence") return SplitRole::Evidence;
  if (text == "test") return SplitRole::Test;
  throw Error(ErrorCode::ManifestMalformed,
              "split_role must be 'evidence' or 'test', got '" + std::string(text) + "'");
}

LogBase parse_log_base(std::string_view text) {
  if (text == "e") return LogBase::E;
  if (text == "2") return LogBase::Two;
  if (text == "10") return LogBase::Ten;
  throw Error(ErrorCode::ManifestMalformed,
              "log_base must be one of e, 2, 10, got '" + std::string(text) + "'");
}

PredictiveSampleSet::PredictiveSampleSet(std::size_t num_passes,
                                         std::size_t num_classes,
                                         std::vector<float> values)
    : num_passes_(num_passes), num_classes_(num_classes), values_(std::move(values)) {
  if (values_.size() != num_passes_ * num_classes_) {
    throw Error(ErrorCode::SizeMismatch,
                "sample set holds " + std::to_string(values_.size()) +
                    " values, expected " + std::to_string(num_passes_) + "x" +
                    std::to_string(num_classes_));
  }
}

KvFile DatasetManifest::to_kv() const {
  nlohmann::ordered_json j;
  j["format"] = "evtag-dataset";
  j["version"] = 1;
  j["split_role"] = std::string(to_string(split_role));
  j["num_instances"] = num_instances;
  j["num_classes"] = num_classes;
  j["num_passes"] = num_passes;
  j["embedding_dim"] = embedding_dim;
  j["log_base"] = std::string(to_string(log_base));
  j["id_base"] = id_base;
  j["embeddings_file"] = std::string(kEmbeddingsFile);
  j["embeddings_bytes"] = embeddings_bytes;
  j["embeddings_sha256"] = embeddings_sha256;
  j["samples_file"] = std::string(kSamplesFile);
  j["samples_bytes"] = samples_bytes;
  j["samples_sha256"] = samples_sha256;
  j["labels_file"] = std::string(kLabelsFile);
  j["labels_bytes"] = labels_bytes;
  j["labels_sha256"] = labels_sha256;
  return KvFile(std::move(j), std::string(kManifestFile));
}

DatasetManifest DatasetManifest::from_kv(const KvFile& kv) {
  auto count = [&](const char* key) -> std::size_t {
    const auto v = kv.get_int(key);
    if (v < 0) {
      throw Error(ErrorCode::ManifestMalformed, std::string(key) + " is negative");
    }
    return static_cast<std::size_t>(v);
  };
  if (kv.get_string("format") != "evtag-dataset") {
    throw Error(ErrorCode::ManifestMalformed, "format must be 'evtag-dataset'");
  }
  if (kv.get_int("version") != 1) {
    throw Error(ErrorCode::ManifestMalformed, "unsupported manifest version");
  }
  DatasetManifest m;
  m.split_role = parse_split_role(kv.get_string("split_role"));
  m.num_instances = count("num_instances");
  m.num_classes = count("num_classes");
  m.num_passes = count("num_passes");
  m.embedding_dim = count("embedding_dim");
  m.log_base = parse_log_base(kv.get_string("log_base"));
  m.id_base = count("id_base");
  m.embeddings_bytes = count("embeddings_bytes");
  m.samples_bytes = count("samples_bytes");
  m.labels_bytes = count("labels_bytes");
  m.embeddings_sha256 = kv.get_string("embeddings_sha256");
  m.samples_sha256 = kv.get_string("samples_sha256");
  m.labels_sha256 = kv.get_string("labels_sha256");
  if (kv.get_string("embeddings_file") != kEmbeddingsFile ||
      kv.get_string("samples_file") != kSamplesFile ||
      kv.get_string("labels_file") != kLabelsFile) {
    throw Error(ErrorCode::ManifestMalformed, "tensor file names deviate from the layout");
  }

  if (m.num_classes < 2 || m.num_passes < 2 || m.embedding_dim < 1 ||
      m.num_instances < 1) {
    throw Error(ErrorCode::ManifestMalformed,
                "shape requires C >= 2, M >= 2, d >= 1 and at least one instance");
  }
  const std::uint64_t n = m.num_instances;
  if (m.embeddings_bytes != n * m.embedding_dim * 4 ||
      m.samples_bytes != n * m.num_passes * m.num_classes * 4 ||
      m.labels_bytes != n * 4) {
    throw Error(ErrorCode::SizeMismatch,
                "declared tensor byte sizes disagree with the manifest shape");
  }
  return m;
}

void validate_record(const InstanceRecord& record, std::size_t num_classes,
                     std::size_t num_passes, std::size_t embedding_dim) {
  const std::string who = "instance " + std::to_string(record.instance_id);
  if (record.embedding.size() != embedding_dim ||
      record.samples.num_classes() != num_classes ||
      record.samples.num_passes() != num_passes) {
    throw Error(ErrorCode::HeterogeneousShapes, who + " has a mismatched shape");
  }
  if (record.true_label >= num_classes) {
    throw Error(ErrorCode::InvalidArgument,
                who + " has label " + std::to_string(record.true_label) +
                    " outside [0, " + std::to_string(num_classes) + ")");
  }
  bool all_zero = true;
  for (float x : record.embedding) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::InvalidArgument, who + " has a non-finite embedding");
    }
    if (x != 0.0f) all_zero = false;
  }
  if (all_zero) throw Error(ErrorCode::ZeroEmbedding, who + " has a zero embedding");

  for (std::size_t m = 0; m < num_passes; ++m) {
    double sum = 0.0;
    bool in_range = true;
    for (float p : record.samples.row(m)) {
      if (!(p >= 0.0f && p <= 1.0f)) in_range = false;
      sum += p;
    }
    if (!in_range || std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::NonStochasticRow,
                  who + " row " + std::to_string(m) + " (sum " +
                      std::to_string(sum) + ") is not a probability vector");
    }
  }
}

namespace {

fs::path manifest_path_of(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return path / kManifestFile;
  return path;
}

Bytes load_tensor(const fs::path& dir, std::string_view name, std::uint64_t bytes,
                  const std::string& sha256) {
  Bytes data = read_file_bytes(dir / name);
  if (data.size() != bytes) {
    throw Error(ErrorCode::SizeMismatch,
                std::string(name) + " holds " + std::to_string(data.size()) +
                    " bytes, manifest declares " + std::to_string(bytes));
  }
  if (sha256_hex(data) != sha256) {
    throw Error(ErrorCode::ChecksumMismatch, std::string(name) + " digest mismatch");
  }
  return data;
}

}  // namespace

Split load_split_with_manifest(const fs::path& path) {
  const fs::path manifest_path = manifest_path_of(path);
  const fs::path dir = manifest_path.parent_path();
  Split split;
  split.manifest = DatasetManifest::from_kv(KvFile::load(manifest_path));
  const DatasetManifest& m = split.manifest;

  const auto embeddings = decode_f32_le(
      load_tensor(dir, kEmbeddingsFile, m.embeddings_bytes, m.embeddings_sha256));
  const auto samples = decode_f32_le(
      load_tensor(dir, kSamplesFile, m.samples_bytes, m.samples_sha256));
  const auto labels =
      decode_u32_le(load_tensor(dir, kLabelsFile, m.labels_bytes, m.labels_sha256));

  const std::size_t d = m.embedding_dim;
  const std::size_t block = m.num_passes * m.num_classes;
  split.records.reserve(m.num_instances);
  for (std::size_t i = 0; i < m.num_instances; ++i) {
    InstanceRecord r;
    r.instance_id = m.id_base + i;
    r.embedding.assign(embeddings.begin() + i * d, embeddings.begin() + (i + 1) * d);
    r.samples = PredictiveSampleSet(
        m.num_passes, m.num_classes,
        std::vector<float>(samples.begin() + i * block, samples.begin() + (i + 1) * block));
    r.true_label = labels[i];
    validate_record(r, m.num_classes, m.num_passes, d);
    split.records.push_back(std::move(r));
  }
  return split;
}

std::vector<InstanceRecord> load_split(const fs::path& path) {
  return load_split_with_manifest(path).records;
}

DatasetManifest write_split(std::span<const InstanceRecord> records,
                            const fs::path& dir, SplitRole role, LogBase log_base) {
  if (records.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot write an empty split");
  }
  const InstanceRecord& first = records.front();
  DatasetManifest m;
  m.num_instances = records.size();
  m.num_classes = first.samples.num_classes();
  m.num_passes = first.samples.num_passes();
  m.embedding_dim = first.embedding.size();
  m.split_role = role;
  m.log_base = log_base;
  m.id_base = first.instance_id;

  std::vector<float> embeddings;
  std::vector<float> samples;
  std::vector<std::uint32_t> labels;
  embeddings.reserve(m.num_instances * m.embedding_dim);
  samples.reserve(m.num_instances * m.num_passes * m.num_classes);
  labels.reserve(m.num_instances);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const InstanceRecord& r = records[i];
    if (r.embedding.size() != m.embedding_dim ||
        r.samples.num_classes() != m.num_classes ||
        r.samples.num_passes() != m.num_passes) {
      throw Error(ErrorCode::HeterogeneousShapes,
                  "record " + std::to_string(i) + " differs in C, M or d");
    }
    if (r.instance_id != m.id_base + i) {
      throw Error(ErrorCode::InvalidArgument,
                  "instance ids must be consecutive from " + std::to_string(m.id_base));
    }
    embeddings.insert(embeddings.end(), r.embedding.begin(), r.embedding.end());
    samples.insert(samples.end(), r.samples.values().begin(), r.samples.values().end());
    labels.push_back(r.true_label);
  }

  const Bytes emb_bytes = encode_f32_le(embeddings);
  const Bytes sample_bytes = encode_f32_le(samples);
  const Bytes label_bytes = encode_u32_le(labels);
  m.embeddings_bytes = emb_bytes.size();
  m.samples_bytes = sample_bytes.size();
  m.labels_bytes = label_bytes.size();
  m.embeddings_sha256 = sha256_hex(emb_bytes);
  m.samples_sha256 = sha256_hex(sample_bytes);
  m.labels_sha256 = sha256_hex(label_bytes);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  write_file_bytes(dir / kEmbeddingsFile, emb_bytes);
  write_file_bytes(dir / kSamplesFile, sample_bytes);
  write_file_bytes(dir / kLabelsFile, label_bytes);
  write_text_file(dir / kManifestFile, m.to_kv().dump());
  return m;
}

}  // namespace evtag
