#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "evtag/binary_io.hpp"
#include "evtag/kv_file.hpp"
#include "evtag/synthetic.hpp"
#include "support.hpp"

namespace evtag {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + EVTAG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_text_file(const fs::path& p) {
  const Bytes bytes = read_file_bytes(p);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.num_classes = 3;
    cfg.instances_per_class = 10;
    cfg.num_passes = 6;
    cfg.embedding_dim = 4;
    write_text_file(dir_.path() / "config.json", cfg.to_kv().dump());
    ASSERT_EQ(run("synth " + q(dir_.path() / "config.json") + " --out " + q(data())), 0);
  }
  fs::path data() const { return dir_.path() / "data"; }
  fs::path evidence() const { return data() / "evidence"; }
  fs::path test() const { return data() / "test"; }
  testing::TempDir dir_{"cli"};
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("tag --test " + q(test()) + " --out x.jsonl"), 2);
  EXPECT_EQ(run("tag --evidence a --index b --test c --out d"), 2);
  EXPECT_EQ(run("tag --evidence " + q(evidence()) + " --test " + q(test()) +
                " --out x --format xml"),
            2);
  EXPECT_EQ(run("tag --evidence " + q(evidence()) + " --test " + q(test()) +
                " --tau 1.5 --out " + q(dir_.path() / "t.jsonl")),
            2);
  EXPECT_EQ(run("sweep --evidence " + q(evidence()) + " --test " + q(test()) +
                " --tau-min 0.5 --tau-max 0.1 --out " + q(dir_.path() / "s.csv")),
            2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, DataErrorsExitThree) {
  EXPECT_EQ(run("tag --evidence " + q(evidence()) + " --test " + q(test()) +
                " --k 1000 --out " + q(dir_.path() / "t.jsonl")),
            3);
  EXPECT_EQ(run("tag --evidence " + q(dir_.path() / "missing") + " --test " + q(test()) +
                " --out " + q(dir_.path() / "t.jsonl")),
            3);
  write_text_file(dir_.path() / "noseed.json", "{\"num_classes\": 3}\n");
  EXPECT_EQ(run("synth " + q(dir_.path() / "noseed.json") + " --out " + q(dir_.path() / "s")), 3);
  write_text_file(dir_.path() / "zero.json", "{\"seed\": 1, \"num_classes\": 0}\n");
  EXPECT_EQ(run("synth " + q(dir_.path() / "zero.json") + " --out " + q(dir_.path() / "s")), 3);
}

TEST_F(Cli, SingleNeighbourRunWritesBothFormats) {
  const fs::path out = dir_.path() / "k1.jsonl";
  ASSERT_EQ(run("tag --evidence " + q(evidence()) + " --test " + q(test()) + " --k 1 --out " +
                q(out)),
            0);
  const std::string csv = read_text_file(dir_.path() / "k1.csv");
  ASSERT_FALSE(csv.empty());
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 16u);  // header plus 15 test records
  EXPECT_EQ(csv.find(';'), std::string::npos);  // one neighbour each
  EXPECT_TRUE(fs::exists(dir_.path() / "k1.jsonl.meta.json"));
}

TEST_F(Cli, RerunsAreByteIdentical) {
  auto pipeline = [&](const std::string& tag) {
    const fs::path root = dir_.path() / tag;
    fs::create_directories(root);
    EXPECT_EQ(run("index --evidence " + q(evidence()) + " --out " + q(root / "index")), 0);
    EXPECT_EQ(run("tag --index " + q(root / "index") + " --test " + q(test()) +
                  " --k 3 --format csv --out " + q(root / "tags.csv")),
              0);
    EXPECT_EQ(run("baseline-tag --test " + q(test()) + " --pe-threshold 0.5 --out " +
                  q(root / "pe.jsonl")),
              0);
    EXPECT_EQ(run("eval --decisions " + q(root / "tags.jsonl") + " --test " + q(test()) +
                  " --out " + q(root / "report.json")),
              0);
    EXPECT_EQ(run("sweep --evidence " + q(evidence()) + " --test " + q(test()) +
                  " --k-values 1,3 --tau-min 0.1 --tau-max 0.6 --tau-step 0.1 --out " +
                  q(root / "sweep.csv")),
              0);
    return root;
  };
  const fs::path a = pipeline("a");
  const fs::path b = pipeline("b");
  for (const char* f : {"index/index.json", "index/normalized.f32", "index/masses.f64",
                        "tags.csv", "tags.jsonl", "pe.jsonl", "pe.csv", "report.json",
                        "report.csv", "sweep.csv", "sweep.best.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(read_file_bytes(a / f), read_file_bytes(b / f)) << f;
  }
  const std::string sweep = read_text_file(a / "sweep.csv");
  EXPECT_NE(sweep.find("evidential,1,0.6,"), std::string::npos);
  EXPECT_EQ(sweep.find("evidential,1,0.7,"), std::string::npos);
}

TEST_F(Cli, IndexAndEvidencePathsAgree) {
  ASSERT_EQ(run("index --evidence " + q(evidence()) + " --out " + q(dir_.path() / "ix")), 0);
  ASSERT_EQ(run("tag --index " + q(dir_.path() / "ix") + " --test " + q(test()) + " --out " +
                q(dir_.path() / "via_index.jsonl")),
            0);
  ASSERT_EQ(run("tag --evidence " + q(evidence()) + " --test " + q(test()) + " --out " +
                q(dir_.path() / "via_evidence.jsonl")),
            0);
  EXPECT_EQ(read_file_bytes(dir_.path() / "via_index.jsonl"),
            read_file_bytes(dir_.path() / "via_evidence.jsonl"));
}

}  // namespace
}  // namespace evtag
