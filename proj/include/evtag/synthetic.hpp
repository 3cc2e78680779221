#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "evtag/dataset_io.hpp"
#include "evtag/kv_file.hpp"

namespace evtag {

// Portable random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the C++ standard; the transforms below are written out because
// the standard library distributions are implementation-defined.
//   uniform(): (next >> 11) * 2^-53, in [0, 1)
//   normal():  Box-Muller on (1 - uniform(), uniform()), cosine branch first,
//              sine branch cached for the following call
//   below(n):  debiased modulo, rejecting draws under (2^64 - n) mod n
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_classes = 10;
  std::size_t embedding_dim = 16;
  std::size_t num_passes = 30;
  std::size_t instances_per_class = 400;
  // Distance between cluster centres, in within-cluster standard deviations.
  double cluster_separation = 4.0;
  // Per-pass logit jitter (stands in for dropout variability).
  double dropout_noise = 1.0;
  // Per-instance logit error shared by all passes: the classifier's own
  // mistakes, invisible to the pass-to-pass spread.
  double head_noise = 3.0;
  // Logits are -logit_scale * |x - centre|^2 / 2.
  double logit_scale = 2.0;
  double mislabel_rate = 0.0;
  double evidence_fraction = 0.5;

  // Throws InvalidArgument on out-of-range fields.
  void validate() const;

  // Reads the flat key-value config; `seed` is required, other keys default.
  static SynthConfig from_kv(const KvFile& kv);
  KvFile to_kv() const;
};

struct SynthSplits {
  std::vector<InstanceRecord> evidence;
  std::vector<InstanceRecord> test;
};

// Clustered embeddings with MC-style predictive samples. Evidence ids are
// 0..n_e-1, test ids continue from n_e. Same config, same bytes.
SynthSplits generate(const SynthConfig& cfg);

}  // namespace evtag
