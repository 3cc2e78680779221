#include "evtag/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "evtag/error.hpp"

namespace evtag {

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "below(0)");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % n;
  }
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (embedding_dim < 1) fail("embedding_dim must be at least 1");
  if (num_passes < 2) fail("num_passes must be at least 2");
  if (instances_per_class < 1) fail("instances_per_class must be at least 1");
  if (!(cluster_separation >= 0.0)) fail("cluster_separation must be non-negative");
  if (!(dropout_noise >= 0.0)) fail("dropout_noise must be non-negative");
  if (!(head_noise >= 0.0)) fail("head_noise must be non-negative");
  if (!(logit_scale > 0.0)) fail("logit_scale must be positive");
  if (!(mislabel_rate >= 0.0 && mislabel_rate < 1.0)) fail("mislabel_rate must lie in [0, 1)");
  if (!(evidence_fraction > 0.0 && evidence_fraction < 1.0)) {
    fail("evidence_fraction must lie in (0, 1)");
  }
  if (num_classes * instances_per_class < 2) fail("need at least two instances in total");
}

SynthConfig SynthConfig::from_kv(const KvFile& kv) {
  SynthConfig cfg;
  const std::int64_t seed = kv.get_int("seed");
  if (seed < 0) throw Error(ErrorCode::InvalidArgument, "seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  auto count = [&](const char* key, std::size_t& field) {
    if (auto v = kv.find_int(key)) {
      if (*v < 0) throw Error(ErrorCode::InvalidArgument, std::string(key) + " is negative");
      field = static_cast<std::size_t>(*v);
    }
  };
  auto real = [&](const char* key, double& field) {
    if (auto v = kv.find_double(key)) field = *v;
  };
  count("num_classes", cfg.num_classes);
  count("embedding_dim", cfg.embedding_dim);
  count("num_passes", cfg.num_passes);
  count("instances_per_class", cfg.instances_per_class);
  real("cluster_separation", cfg.cluster_separation);
  real("dropout_noise", cfg.dropout_noise);
  real("head_noise", cfg.head_noise);
  real("logit_scale", cfg.logit_scale);
  real("mislabel_rate", cfg.mislabel_rate);
  real("evidence_fraction", cfg.evidence_fraction);
  cfg.validate();
  return cfg;
}

KvFile SynthConfig::to_kv() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["num_classes"] = num_classes;
  j["embedding_dim"] = embedding_dim;
  j["num_passes"] = num_passes;
  j["instances_per_class"] = instances_per_class;
  j["cluster_separation"] = cluster_separation;
  j["dropout_noise"] = dropout_noise;
  j["head_noise"] = head_noise;
  j["logit_scale"] = logit_scale;
  j["mislabel_rate"] = mislabel_rate;
  j["evidence_fraction"] = evidence_fraction;
  return KvFile(std::move(j));
}

SynthSplits generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t classes = cfg.num_classes;
  const std::size_t dim = cfg.embedding_dim;
  const std::size_t passes = cfg.num_passes;

  // Centres: random directions at radius separation / sqrt(2), so that
  // orthogonal centres sit exactly `separation` apart.
  const double radius = cfg.cluster_separation / std::numbers::sqrt2;
  std::vector<std::vector<double>> centres(classes, std::vector<double>(dim));
  for (auto& centre : centres) {
    double sq = 0.0;
    for (double& v : centre) {
      v = rng.normal();
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    for (double& v : centre) v = norm > 0.0 ? v / norm * radius : 0.0;
  }

  std::vector<InstanceRecord> pool;
  pool.reserve(classes * cfg.instances_per_class);
  std::vector<double> embedding(dim);
  std::vector<double> logits(classes);
  std::vector<double> pass_logits(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < cfg.instances_per_class; ++i) {
      InstanceRecord r;
      for (std::size_t j = 0; j < dim; ++j) embedding[j] = centres[c][j] + rng.normal();
      for (std::size_t l = 0; l < classes; ++l) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          const double diff = embedding[j] - centres[l][j];
          sq += diff * diff;
        }
        logits[l] = -cfg.logit_scale * sq / 2.0 + cfg.head_noise * rng.normal();
      }
      std::vector<float> samples;
      samples.reserve(passes * classes);
      for (std::size_t m = 0; m < passes; ++m) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < classes; ++l) {
          pass_logits[l] = logits[l] + cfg.dropout_noise * rng.normal();
          peak = std::max(peak, pass_logits[l]);
        }
        double z = 0.0;
        for (double& v : pass_logits) {
          v = std::exp(v - peak);
          z += v;
        }
        for (double v : pass_logits) samples.push_back(static_cast<float>(v / z));
      }
      std::uint32_t label = static_cast<std::uint32_t>(c);
      if (rng.uniform() < cfg.mislabel_rate) {
        label = static_cast<std::uint32_t>((c + 1 + rng.below(classes - 1)) % classes);
      }
      r.embedding.assign(embedding.begin(), embedding.end());
      r.samples = PredictiveSampleSet(passes, classes, std::move(samples));
      r.true_label = label;
      pool.push_back(std::move(r));
    }
  }

  for (std::size_t i = pool.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(pool[i - 1], pool[j]);
  }

  const std::size_t total = pool.size();
  auto evidence_count = static_cast<std::size_t>(
      std::llround(cfg.evidence_fraction * static_cast<double>(total)));
  evidence_count = std::clamp<std::size_t>(evidence_count, 1, total - 1);

  SynthSplits out;
  out.evidence.reserve(evidence_count);
  out.test.reserve(total - evidence_count);
  for (std::size_t i = 0; i < total; ++i) {
    pool[i].instance_id = i;
    (i < evidence_count ? out.evidence : out.test).push_back(std::move(pool[i]));
  }
  return out;
}

}  // namespace evtag
