#include "evtag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <system_error>

#include "evtag/binary_io.hpp"
#include "evtag/error.hpp"
#include "evtag/parallel.hpp"

namespace evtag {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kIndexManifest = "index.json";
constexpr std::string_view kNormalizedFile = "normalized.f32";
constexpr std::string_view kMassesFile = "masses.f64";
constexpr std::string_view kIdsFile = "ids.u64";
constexpr std::string_view kIndexLabelsFile = "labels.u32";

struct WorstOnTop {
  bool operator()(const Neighbor& a, const Neighbor& b) const { return ranks_before(a, b); }
};

}  // namespace

std::vector<double> l2_normalize(std::span<const float> x) {
  double sq = 0.0;
  for (float v : x) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::ZeroEmbedding, "cannot L2-normalise a zero vector");
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = static_cast<double>(x[j]) / norm;
  return out;
}

EvidenceIndex EvidenceIndex::build(std::span<const InstanceRecord> evidence,
                                   std::vector<MassFunction> masses) {
  if (evidence.empty()) {
    throw Error(ErrorCode::EmptyEvidenceList, "evidence index needs at least one record");
  }
  if (masses.size() != evidence.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(masses.size()) + " masses for " +
                    std::to_string(evidence.size()) + " evidence records");
  }
  const std::size_t dim = evidence.front().embedding.size();
  std::vector<float> normalized;
  normalized.reserve(evidence.size() * dim);
  std::vector<std::uint64_t> ids;
  std::vector<std::uint32_t> labels;
  for (const InstanceRecord& r : evidence) {
    if (r.embedding.size() != dim) {
      throw Error(ErrorCode::HeterogeneousShapes, "evidence embeddings differ in dimension");
    }
    for (double v : l2_normalize(r.embedding)) normalized.push_back(static_cast<float>(v));
    ids.push_back(r.instance_id);
    labels.push_back(r.true_label);
  }
  EvidenceIndex index;
  index.assemble(std::move(normalized), std::move(ids), std::move(masses),
                 std::move(labels), dim);
  return index;
}

void EvidenceIndex::assemble(std::vector<float> normalized, std::vector<std::uint64_t> ids,
                             std::vector<MassFunction> masses,
                             std::vector<std::uint32_t> labels, std::size_t dim) {
  const std::size_t n = ids.size();
  if (dim == 0 || normalized.size() != n * dim || masses.size() != n || labels.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "index components disagree in length");
  }
  const std::size_t classes = masses.front().num_classes();
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = normalized[i * dim + j];
      sq += v * v;
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      throw Error(ErrorCode::InvalidArgument, "index row " + std::to_string(i) + " is not unit length");
    }
    if (masses[i].num_classes() != classes) {
      throw Error(ErrorCode::HeterogeneousShapes, "evidence masses differ in class count");
    }
  }

  const std::size_t blocks = (n + kLanes - 1) / kLanes;
  blocked_.assign(blocks * dim * kLanes, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i / kLanes;
    const std::size_t lane = i % kLanes;
    for (std::size_t j = 0; j < dim; ++j) {
      blocked_[(b * dim + j) * kLanes + lane] = normalized[i * dim + j];
    }
  }
  dim_ = dim;
  normalized_ = std::move(normalized);
  ids_ = std::move(ids);
  masses_ = std::move(masses);
  labels_ = std::move(labels);
}

void EvidenceIndex::similarities(std::span<const double> unit_query,
                                 std::span<double> out) const {
  const std::size_t n = size();
  const std::size_t blocks = (n + kLanes - 1) / kLanes;
  for (std::size_t b = 0; b < blocks; ++b) {
    // Each lane accumulates its own row in component order, so the result is
    // identical to a plain sequential dot product.
    double acc[kLanes] = {};
    const float* block = blocked_.data() + b * dim_ * kLanes;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double q = unit_query[j];
      const float* lanes = block + j * kLanes;
      for (std::size_t lane = 0; lane < kLanes; ++lane) {
        acc[lane] += static_cast<double>(lanes[lane]) * q;
      }
    }
    const std::size_t base = b * kLanes;
    const std::size_t valid = std::min(kLanes, n - base);
    for (std::size_t lane = 0; lane < valid; ++lane) {
      out[base + lane] = std::clamp(acc[lane], -1.0, 1.0);
    }
  }
}

std::vector<Neighbor> EvidenceIndex::query(std::span<const float> x, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > size()) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds evidence size " + std::to_string(size()));
  }
  if (x.size() != dim_) {
    throw Error(ErrorCode::HeterogeneousShapes,
                "query has dimension " + std::to_string(x.size()) + ", index " +
                    std::to_string(dim_));
  }
  const std::vector<double> unit = l2_normalize(x);
  std::vector<double> sims(size());
  similarities(unit, sims);

  std::priority_queue<Neighbor, std::vector<Neighbor>, WorstOnTop> heap;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    Neighbor cand{ids_[i], sims[i], 1.0 - sims[i], i};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (ranks_before(cand, heap.top())) {
      heap.pop();
      heap.push(cand);
    }
  }
  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

std::vector<std::vector<Neighbor>> EvidenceIndex::query_batch(
    std::span<const std::vector<float>> queries, std::size_t k, std::size_t workers) const {
  std::vector<std::vector<Neighbor>> out(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t i) { out[i] = query(queries[i], k); });
  return out;
}

void EvidenceIndex::save(const fs::path& dir, const nlohmann::ordered_json& extra) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

  const std::size_t classes = num_classes();
  std::vector<double> flat_masses;
  flat_masses.reserve(size() * (classes + 1));
  for (const MassFunction& m : masses_) {
    flat_masses.insert(flat_masses.end(), m.singleton.begin(), m.singleton.end());
    flat_masses.push_back(m.ignorance);
  }
  const Bytes normalized = encode_f32_le(normalized_);
  const Bytes masses = encode_f64_le(flat_masses);
  const Bytes ids = encode_u64_le(ids_);
  const Bytes labels = encode_u32_le(labels_);

  nlohmann::ordered_json j;
  j["format"] = "evtag-index";
  j["version"] = 1;
  j["num_evidence"] = size();
  j["embedding_dim"] = dim_;
  j["num_classes"] = classes;
  j["normalized_sha256"] = sha256_hex(normalized);
  j["masses_sha256"] = sha256_hex(masses);
  j["ids_sha256"] = sha256_hex(ids);
  j["labels_sha256"] = sha256_hex(labels);
  for (const auto& [key, value] : extra.items()) j[key] = value;

  write_file_bytes(dir / kNormalizedFile, normalized);
  write_file_bytes(dir / kMassesFile, masses);
  write_file_bytes(dir / kIdsFile, ids);
  write_file_bytes(dir / kIndexLabelsFile, labels);
  write_text_file(dir / kIndexManifest, KvFile(std::move(j)).dump());
}

EvidenceIndex EvidenceIndex::load(const fs::path& dir, nlohmann::ordered_json* extra) {
  const KvFile kv = KvFile::load(dir / kIndexManifest);
  if (kv.get_string("format") != "evtag-index" || kv.get_int("version") != 1) {
    throw Error(ErrorCode::ManifestMalformed, "not an evtag index snapshot");
  }
  const auto n = static_cast<std::size_t>(kv.get_int("num_evidence"));
  const auto dim = static_cast<std::size_t>(kv.get_int("embedding_dim"));
  const auto classes = static_cast<std::size_t>(kv.get_int("num_classes"));
  if (n == 0 || dim == 0 || classes < 2) {
    throw Error(ErrorCode::ManifestMalformed, "index snapshot has an empty shape");
  }

  auto read_checked = [&](std::string_view name, const char* digest_key,
                          std::size_t expected_bytes) {
    Bytes data = read_file_bytes(dir / name);
    if (data.size() != expected_bytes) {
      throw Error(ErrorCode::SizeMismatch, std::string(name) + " has the wrong size");
    }
    if (sha256_hex(data) != kv.get_string(digest_key)) {
      throw Error(ErrorCode::ChecksumMismatch, std::string(name) + " digest mismatch");
    }
    return data;
  };
  auto normalized = decode_f32_le(read_checked(kNormalizedFile, "normalized_sha256", n * dim * 4));
  const auto flat = decode_f64_le(read_checked(kMassesFile, "masses_sha256", n * (classes + 1) * 8));
  auto ids = decode_u64_le(read_checked(kIdsFile, "ids_sha256", n * 8));
  auto labels = decode_u32_le(read_checked(kIndexLabelsFile, "labels_sha256", n * 4));

  std::vector<MassFunction> masses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = flat.data() + i * (classes + 1);
    masses[i].singleton.assign(row, row + classes);
    masses[i].ignorance = row[classes];
  }
  if (extra != nullptr) *extra = kv.json();

  EvidenceIndex index;
  index.assemble(std::move(normalized), std::move(ids), std::move(masses), std::move(labels), dim);
  return index;
}

}  // namespace evtag
