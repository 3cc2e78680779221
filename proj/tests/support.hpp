// Shared generators and independent oracles for the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "evtag/dataset_io.hpp"
#include "evtag/ds_fusion.hpp"
#include "evtag/retrieval.hpp"
#include "evtag/synthetic.hpp"

namespace evtag::testing {

inline InstanceRecord make_record(std::uint64_t id, std::vector<float> embedding,
                                  std::size_t num_passes, std::size_t num_classes,
                                  std::vector<float> samples, std::uint32_t label) {
  return InstanceRecord{id, std::move(embedding),
                        PredictiveSampleSet(num_passes, num_classes, std::move(samples)),
                        label};
}

// Random point on the probability simplex; `sparsity` zeroes entries at random.
inline std::vector<double> random_simplex(Rng& rng, std::size_t n, double sparsity = 0.0) {
  std::vector<double> w(n);
  for (;;) {
    double sum = 0.0;
    for (double& v : w) {
      v = rng.uniform() < sparsity ? 0.0 : -std::log(1.0 - rng.uniform());
      sum += v;
    }
    if (sum > 0.0) {
      for (double& v : w) v /= sum;
      return w;
    }
  }
}

inline MassFunction random_mass(Rng& rng, std::size_t num_classes, double sparsity = 0.0) {
  const std::vector<double> w = random_simplex(rng, num_classes + 1, sparsity);
  MassFunction m;
  m.singleton.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(num_classes));
  m.ignorance = w.back();
  return m;
}

// Rows are float simplex points renormalised in double so they pass the row-sum check.
inline PredictiveSampleSet random_samples(Rng& rng, std::size_t passes, std::size_t classes,
                                          double sparsity = 0.0) {
  std::vector<float> values;
  values.reserve(passes * classes);
  for (std::size_t m = 0; m < passes; ++m) {
    for (double p : random_simplex(rng, classes, sparsity)) values.push_back(static_cast<float>(p));
  }
  return PredictiveSampleSet(passes, classes, std::move(values));
}

inline std::vector<float> random_embedding(Rng& rng, std::size_t dim) {
  std::vector<float> x(dim);
  for (;;) {
    bool nonzero = false;
    for (float& v : x) {
      v = static_cast<float>(rng.normal());
      nonzero = nonzero || v != 0.0f;
    }
    if (nonzero) return x;
  }
}

inline std::vector<InstanceRecord> random_records(Rng& rng, std::size_t n, std::size_t dim,
                                                  std::size_t passes, std::size_t classes,
                                                  std::uint64_t id_base = 0) {
  std::vector<InstanceRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(InstanceRecord{id_base + i, random_embedding(rng, dim),
                                 random_samples(rng, passes, classes),
                                 static_cast<std::uint32_t>(rng.below(classes))});
  }
  return out;
}

// Dempster's rule over the full power set of a frame with `classes` elements.
// Subsets are bitmasks; only singletons and the full set carry input mass.
struct PowerSetResult {
  std::vector<double> mass;  // indexed by subset bitmask
  double conflict = 0.0;
};

inline std::vector<double> to_power_set(const MassFunction& m) {
  const std::size_t classes = m.num_classes();
  std::vector<double> out(std::size_t{1} << classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) out[std::size_t{1} << c] += m.singleton[c];
  out[out.size() - 1] += m.ignorance;
  return out;
}

inline PowerSetResult power_set_combine(const MassFunction& a, const MassFunction& b) {
  const std::vector<double> pa = to_power_set(a);
  const std::vector<double> pb = to_power_set(b);
  PowerSetResult r;
  r.mass.assign(pa.size(), 0.0);
  for (std::size_t x = 0; x < pa.size(); ++x) {
    for (std::size_t y = 0; y < pb.size(); ++y) {
      const double prod = pa[x] * pb[y];
      if ((x & y) == 0) {
        r.conflict += prod;
      } else {
        r.mass[x & y] += prod;
      }
    }
  }
  const double norm = 1.0 - r.conflict;
  for (double& v : r.mass) v /= norm;
  r.mass[0] = 0.0;
  return r;
}

// Type-7 order-statistic interpolation written from the textbook definition:
// the q-quantile sits at 1-based position 1 + (n-1)q.
inline double oracle_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = 1.0 + (static_cast<double>(values.size()) - 1.0) * q;
  const auto j = static_cast<std::size_t>(std::floor(pos));
  const double g = pos - static_cast<double>(j);
  if (j >= values.size()) return values.back();
  return (1.0 - g) * values[j - 1] + g * values[j];
}

// Sorts every evidence row by similarity to `query`, reading the stored unit rows.
inline std::vector<std::uint64_t> oracle_knn(const EvidenceIndex& index,
                                             std::span<const float> query, std::size_t k) {
  const std::vector<double> q = l2_normalize(query);
  std::vector<std::pair<double, std::uint64_t>> scored;
  for (std::size_t i = 0; i < index.size(); ++i) {
    double dot = 0.0;
    const auto row = index.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) dot += static_cast<double>(row[j]) * q[j];
    scored.emplace_back(std::clamp(dot, -1.0, 1.0), index.id(i));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::uint64_t> ids;
  for (std::size_t i = 0; i < k; ++i) ids.push_back(scored[i].second);
  return ids;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("evtag_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace evtag::testing
