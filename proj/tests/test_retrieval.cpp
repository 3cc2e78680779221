#include <gtest/gtest.h>

#include "evtag/binary_io.hpp"
#include "evtag/error.hpp"
#include "evtag/retrieval.hpp"
#include "support.hpp"

namespace evtag {
namespace {

using testing::make_record;

std::vector<InstanceRecord> with_embeddings(const std::vector<std::vector<float>>& embeddings,
                                            std::uint64_t id_base = 0) {
  std::vector<InstanceRecord> out;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    out.push_back(make_record(id_base + i, embeddings[i], 2, 2, {0.5f, 0.5f, 0.5f, 0.5f},
                              static_cast<std::uint32_t>(i % 2)));
  }
  return out;
}

std::vector<MassFunction> vacuous_masses(std::size_t n, std::size_t classes = 2) {
  return std::vector<MassFunction>(n, MassFunction::vacuous(classes));
}

std::vector<std::uint64_t> ids_of(const std::vector<Neighbor>& neighbors) {
  std::vector<std::uint64_t> ids;
  for (const auto& n : neighbors) ids.push_back(n.evidence_id);
  return ids;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected evtag::Error";
  return ErrorCode::InvalidArgument;
}

TEST(Normalize, ThreeFourFive) {
  const std::vector<float> x{3.0f, 4.0f};
  const auto u = l2_normalize(x);
  EXPECT_EQ(u[0], 0.6);
  EXPECT_EQ(u[1], 0.8);
  EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{0.0f, 0.0f}); }),
            ErrorCode::ZeroEmbedding);
}

TEST(EvidenceIndex, BuildNormalisesRows) {
  const auto records = with_embeddings({{3.0f, 4.0f}, {0.0f, 2.0f}, {-1.0f, 1.0f}});
  const auto index = EvidenceIndex::build(records, vacuous_masses(3));
  ASSERT_EQ(index.size(), 3u);
  EXPECT_EQ(index.dim(), 2u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto r = index.row(i);
    EXPECT_NEAR(double(r[0]) * r[0] + double(r[1]) * r[1], 1.0, 1e-7);
  }
  EXPECT_EQ(index.row(0)[0], 0.6f);
  EXPECT_EQ(index.row(0)[1], 0.8f);
}

TEST(EvidenceIndex, BuildErrors) {
  const auto records = with_embeddings({{1.0f, 0.0f}, {0.0f, 1.0f}});
  EXPECT_EQ(code_of([&] { EvidenceIndex::build(records, vacuous_masses(1)); }),
            ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { EvidenceIndex::build({}, {}); }), ErrorCode::EmptyEvidenceList);
  auto ragged = records;
  ragged[1].embedding.push_back(1.0f);
  EXPECT_EQ(code_of([&] { EvidenceIndex::build(ragged, vacuous_masses(2)); }),
            ErrorCode::HeterogeneousShapes);
  auto zero = records;
  zero[0].embedding = {0.0f, 0.0f};
  EXPECT_EQ(code_of([&] { EvidenceIndex::build(zero, vacuous_masses(2)); }),
            ErrorCode::ZeroEmbedding);
}

TEST(EvidenceIndex, QueryErrors) {
  const auto index =
      EvidenceIndex::build(with_embeddings({{1.0f, 0.0f}, {0.0f, 1.0f}}), vacuous_masses(2));
  const std::vector<float> q{1.0f, 1.0f};
  EXPECT_EQ(code_of([&] { index.query(q, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { index.query(q, 3); }), ErrorCode::KTooLarge);
  EXPECT_EQ(code_of([&] { index.query(std::vector<float>{1.0f}, 1); }),
            ErrorCode::HeterogeneousShapes);
  EXPECT_EQ(code_of([&] { index.query(std::vector<float>{0.0f, 0.0f}, 1); }),
            ErrorCode::ZeroEmbedding);
}

TEST(EvidenceIndex, SelfQueryRanksFirst) {
  const auto records = with_embeddings({{1.0f, 2.0f, 3.0f}, {-1.0f, 0.5f, 2.0f}, {0.0f, 0.0f, 1.0f}});
  const auto index = EvidenceIndex::build(records, vacuous_masses(3));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto top = index.query(records[i].embedding, 1);
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top[0].evidence_id, records[i].instance_id);
    EXPECT_NEAR(top[0].similarity, 1.0, 1e-7);
    EXPECT_NEAR(top[0].distance, 0.0, 1e-7);
  }
}

TEST(EvidenceIndex, OrthogonalNeighbourHasZeroSimilarity) {
  const auto index =
      EvidenceIndex::build(with_embeddings({{1.0f, 0.0f}, {0.0f, 1.0f}}), vacuous_masses(2));
  const auto all = index.query(std::vector<float>{2.0f, 0.0f}, 2);
  EXPECT_EQ(all[0].evidence_id, 0u);
  EXPECT_EQ(all[1].evidence_id, 1u);
  EXPECT_EQ(all[1].similarity, 0.0);
  EXPECT_EQ(all[1].distance, 1.0);
}

TEST(EvidenceIndex, TiesBreakByAscendingId) {
  // Rows 0, 2 and 4 are identical; ids are assigned out of row order.
  std::vector<InstanceRecord> records = with_embeddings(
      {{1.0f, 1.0f}, {1.0f, 0.0f}, {1.0f, 1.0f}, {0.0f, 1.0f}, {2.0f, 2.0f}});
  records[0].instance_id = 40;
  records[2].instance_id = 10;
  records[4].instance_id = 25;
  const auto index = EvidenceIndex::build(records, vacuous_masses(5));
  const auto top = index.query(std::vector<float>{1.0f, 1.0f}, 3);
  EXPECT_EQ(ids_of(top), (std::vector<std::uint64_t>{10, 25, 40}));
  const auto top2 = index.query(std::vector<float>{1.0f, 1.0f}, 2);
  EXPECT_EQ(ids_of(top2), (std::vector<std::uint64_t>{10, 25}));
}

TEST(EvidenceIndex, MatchesNaiveOracle) {
  Rng rng(2024);
  const auto records = testing::random_records(rng, 200, 16, 2, 3);
  const auto index = EvidenceIndex::build(records, vacuous_masses(200, 3));
  for (int q = 0; q < 50; ++q) {
    const auto x = testing::random_embedding(rng, 16);
    EXPECT_EQ(ids_of(index.query(x, 10)), testing::oracle_knn(index, x, 10));
  }
}

TEST(EvidenceIndex, MatchesOracleOnRandomInstancesWithDuplicates) {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(400);
    const std::size_t d = 1 + rng.below(40);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(n, 32));
    auto records = testing::random_records(rng, n, d, 2, 2, rng.below(1000));
    // Copy some rows, sometimes scaled by a power of two, to force exact ties.
    for (std::size_t i = 0; i < n / 4; ++i) {
      const std::size_t src = rng.below(n);
      const std::size_t dst = rng.below(n);
      const float scale = rng.uniform() < 0.5 ? 1.0f : 4.0f;
      for (std::size_t j = 0; j < d; ++j) records[dst].embedding[j] = records[src].embedding[j] * scale;
    }
    const auto index = EvidenceIndex::build(records, vacuous_masses(n));
    for (int q = 0; q < 5; ++q) {
      const auto x = q % 2 == 0 ? records[rng.below(n)].embedding : testing::random_embedding(rng, d);
      const auto got = index.query(x, k);
      ASSERT_EQ(ids_of(got), testing::oracle_knn(index, x, k)) << "trial " << trial;
      for (std::size_t i = 1; i < got.size(); ++i) {
        EXPECT_TRUE(ranks_before(got[i - 1], got[i]));
        EXPECT_LE(got[i - 1].distance, got[i].distance);
      }
    }
  }
}

TEST(EvidenceIndex, ScaleInvariance) {
  Rng rng(8);
  const auto records = testing::random_records(rng, 300, 12, 2, 2);
  const auto index = EvidenceIndex::build(records, vacuous_masses(300));
  for (int q = 0; q < 30; ++q) {
    const auto x = testing::random_embedding(rng, 12);
    const auto base = index.query(x, 15);
    for (float alpha : {0.25f, 2.0f, 1024.0f}) {
      std::vector<float> y(x);
      for (float& v : y) v *= alpha;
      EXPECT_EQ(index.query(y, 15), base);
    }
    std::vector<float> y(x);
    for (float& v : y) v *= 3.7f;
    EXPECT_EQ(ids_of(index.query(y, 15)), ids_of(base));
  }
}

TEST(EvidenceIndex, TopKIsPrefixOfTopKPlusOne) {
  Rng rng(9);
  auto records = testing::random_records(rng, 120, 6, 2, 2);
  for (std::size_t i = 0; i < 30; ++i) records[i + 60].embedding = records[i].embedding;
  const auto index = EvidenceIndex::build(records, vacuous_masses(120));
  for (int q = 0; q < 20; ++q) {
    const auto x = q % 2 ? records[rng.below(120)].embedding : testing::random_embedding(rng, 6);
    auto prev = index.query(x, 1);
    for (std::size_t k = 2; k <= 40; ++k) {
      const auto next = index.query(x, k);
      ASSERT_EQ(next.size(), k);
      EXPECT_TRUE(std::equal(prev.begin(), prev.end(), next.begin()));
      prev = next;
    }
  }
}

TEST(EvidenceIndex, BatchMatchesSequentialForAnyWorkerCount) {
  Rng rng(10);
  const auto records = testing::random_records(rng, 500, 8, 2, 2);
  const auto index = EvidenceIndex::build(records, vacuous_masses(500));
  std::vector<std::vector<float>> queries;
  for (int q = 0; q < 64; ++q) queries.push_back(testing::random_embedding(rng, 8));
  std::vector<std::vector<Neighbor>> sequential;
  for (const auto& q : queries) sequential.push_back(index.query(q, 7));
  for (std::size_t workers : {1u, 2u, 3u, 8u}) {
    EXPECT_EQ(index.query_batch(queries, 7, workers), sequential);
  }
}

TEST(EvidenceIndex, SaveLoadRoundTrip) {
  Rng rng(12);
  const auto records = testing::random_records(rng, 37, 5, 2, 3, 100);
  std::vector<MassFunction> masses;
  for (int i = 0; i < 37; ++i) masses.push_back(testing::random_mass(rng, 3));
  const auto index = EvidenceIndex::build(records, masses);
  testing::TempDir dir("index");
  nlohmann::ordered_json extra;
  extra["q_lo"] = 0.1;
  index.save(dir.path(), extra);
  nlohmann::ordered_json meta;
  const auto loaded = EvidenceIndex::load(dir.path(), &meta);
  EXPECT_EQ(meta["q_lo"], 0.1);
  ASSERT_EQ(loaded.size(), index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_EQ(loaded.id(i), index.id(i));
    EXPECT_EQ(loaded.label(i), index.label(i));
    EXPECT_EQ(loaded.mass(i), index.mass(i));
    EXPECT_TRUE(std::equal(loaded.row(i).begin(), loaded.row(i).end(), index.row(i).begin()));
  }
  const auto x = testing::random_embedding(rng, 5);
  EXPECT_EQ(loaded.query(x, 9), index.query(x, 9));

  Bytes bytes = read_file_bytes(dir.path() / "ids.u64");
  bytes[3] ^= std::byte{0xff};
  write_file_bytes(dir.path() / "ids.u64", bytes);
  EXPECT_EQ(code_of([&] { EvidenceIndex::load(dir.path()); }), ErrorCode::ChecksumMismatch);
}

}  // namespace
}  // namespace evtag
