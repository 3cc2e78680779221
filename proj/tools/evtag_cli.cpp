// evtag: evidence-retrieval certainty tagging from the command line.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 internal invariant violation.
// Data goes to files; diagnostics go to stderr. Run metadata (argv, time) is
// written to a `<out>.meta.json` sidecar so data files stay byte-identical
// across reruns.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evtag/binary_io.hpp"
#include "evtag/dataset_io.hpp"
#include "evtag/decision.hpp"
#include "evtag/error.hpp"
#include "evtag/metrics.hpp"
#include "evtag/retrieval.hpp"
#include "evtag/sweep.hpp"
#include "evtag/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInvariant = 4;

std::vector<std::string> g_argv;

// Raised when flag values are rejected before any data is read.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
void check_flags(Fn&& fn) {
  try {
    fn();
  } catch (const evtag::Error& e) {
    throw UsageError(e.what());
  }
}

fs::path with_extension(fs::path p, const std::string& ext) {
  p.replace_extension(ext);
  return p;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_sidecar(const fs::path& out) {
  nlohmann::ordered_json j;
  j["argv"] = g_argv;
  j["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  fs::path sidecar = out;
  sidecar += ".meta.json";
  evtag::write_text_file(sidecar, j.dump(2) + "\n");
}

std::string file_digest(const fs::path& path) {
  return evtag::sha256_hex(evtag::read_file_bytes(path));
}

evtag::LogBase log_base_flag(const std::string& text) { return evtag::parse_log_base(text); }

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  evtag::KvFile kv = evtag::KvFile::load(a.config);
  nlohmann::ordered_json j = kv.json();
  if (a.seed) j["seed"] = *a.seed;
  const evtag::SynthConfig cfg = evtag::SynthConfig::from_kv(evtag::KvFile(j, a.config));
  const evtag::SynthSplits splits = evtag::generate(cfg);
  const fs::path out = a.out;
  evtag::write_split(splits.evidence, out / "evidence", evtag::SplitRole::Evidence);
  evtag::write_split(splits.test, out / "test", evtag::SplitRole::Test);
  for (const char* split : {"evidence", "test"}) {
    for (std::string_view file : {evtag::kManifestFile, evtag::kEmbeddingsFile,
                                  evtag::kSamplesFile, evtag::kLabelsFile}) {
      const fs::path p = out / split / file;
      std::cout << file_digest(p) << "  " << p.string() << "\n";
    }
  }
  return kExitOk;
}

struct IndexArgs {
  std::string evidence;
  std::string out;
  double q_lo = evtag::kDefaultQuantileLow;
  double q_hi = evtag::kDefaultQuantileHigh;
};

int cmd_index(const IndexArgs& a) {
  evtag::TaggerConfig cfg;
  cfg.q_lo = a.q_lo;
  cfg.q_hi = a.q_hi;
  check_flags([&] { cfg.validate(); });
  const auto evidence = evtag::load_split(a.evidence);
  const evtag::EvidenceIndex index = evtag::build_evidence_index(evidence, cfg);
  nlohmann::ordered_json extra;
  extra["q_lo"] = cfg.q_lo;
  extra["q_hi"] = cfg.q_hi;
  index.save(a.out, extra);
  std::cout << file_digest(fs::path(a.out) / "index.json") << "  "
            << (fs::path(a.out) / "index.json").string() << "\n";
  return kExitOk;
}

struct TagArgs {
  std::string evidence;
  std::string index;
  std::string test;
  std::size_t k = 3;
  double tau = 0.3;
  double q_lo = evtag::kDefaultQuantileLow;
  double q_hi = evtag::kDefaultQuantileHigh;
  std::string log_base = "2";
  std::string out;
  std::string format = "jsonl";
  std::size_t workers = 0;
};

void write_decisions(const std::vector<evtag::DecisionRecord>& decisions, const fs::path& out,
                     const std::string& format) {
  ensure_parent(out);
  const fs::path jsonl = format == "jsonl" ? out : with_extension(out, ".jsonl");
  const fs::path csv = format == "csv" ? out : with_extension(out, ".csv");
  evtag::write_decisions_jsonl(jsonl, decisions);
  evtag::write_text_file(csv, evtag::decisions_to_csv(decisions));
  write_sidecar(out);
}

int cmd_tag(const TagArgs& a) {
  evtag::TaggerConfig cfg;
  cfg.k = a.k;
  cfg.tau = a.tau;
  cfg.q_lo = a.q_lo;
  cfg.q_hi = a.q_hi;
  cfg.log_base = log_base_flag(a.log_base);
  cfg.workers = a.workers;
  check_flags([&] { cfg.validate(); });

  evtag::EvidenceIndex index;
  if (!a.index.empty()) {
    nlohmann::ordered_json meta;
    index = evtag::EvidenceIndex::load(a.index, &meta);
    // Evidence masses were fixed at index time; the test side must match.
    cfg.q_lo = meta.value("q_lo", cfg.q_lo);
    cfg.q_hi = meta.value("q_hi", cfg.q_hi);
  } else {
    index = evtag::build_evidence_index(evtag::load_split(a.evidence), cfg);
  }
  cfg.validate();
  const auto test = evtag::load_split(a.test);
  const auto decisions = evtag::tag_batch(test, index, cfg);
  write_decisions(decisions, a.out, a.format);
  return kExitOk;
}

struct BaselineArgs {
  std::string test;
  double pe_threshold = 0.4;
  std::string log_base = "2";
  std::string out;
  std::string format = "jsonl";
};

int cmd_baseline(const BaselineArgs& a) {
  const auto test = evtag::load_split(a.test);
  const auto decisions =
      evtag::tag_batch_entropy(test, a.pe_threshold, log_base_flag(a.log_base));
  write_decisions(decisions, a.out, a.format);
  return kExitOk;
}

struct EvalArgs {
  std::string decisions;
  std::string test;
  std::string out;
  std::string format = "jsonl";
  std::size_t bins = evtag::kDefaultEceBins;
};

int cmd_eval(const EvalArgs& a) {
  const auto decisions = evtag::read_decisions_jsonl(a.decisions);
  const auto test = evtag::load_split(a.test);
  const evtag::MetricReport report = evtag::evaluate(decisions, test, a.bins);
  const fs::path out = a.out;
  ensure_parent(out);
  const fs::path json = a.format == "jsonl" ? out : with_extension(out, ".json");
  const fs::path csv = a.format == "csv" ? out : with_extension(out, ".csv");
  evtag::write_text_file(json, evtag::report_to_json(report).dump() + "\n");
  evtag::write_text_file(csv, evtag::report_csv_header() + "\n" +
                                  evtag::report_csv_row(report) + "\n");
  write_sidecar(out);
  return kExitOk;
}

struct SweepArgs {
  std::string evidence;
  std::string test;
  std::vector<std::size_t> k_values{3, 10, 30, 50};
  std::vector<double> tau_values;
  double tau_min = 0.05;
  double tau_max = 0.95;
  double tau_step = 0.05;
  std::vector<double> pe_thresholds{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75};
  double q_lo = evtag::kDefaultQuantileLow;
  double q_hi = evtag::kDefaultQuantileHigh;
  std::string log_base = "2";
  std::string out;
  std::size_t workers = 0;
};

int cmd_sweep(const SweepArgs& a) {
  evtag::SweepSpec spec;
  check_flags([&] {
    spec.k_values = a.k_values;
    spec.tau_values = a.tau_values.empty()
                          ? evtag::threshold_grid(a.tau_min, a.tau_max, a.tau_step)
                          : a.tau_values;
    spec.pe_thresholds = a.pe_thresholds;
    spec.q_lo = a.q_lo;
    spec.q_hi = a.q_hi;
    spec.log_base = log_base_flag(a.log_base);
    spec.workers = a.workers;
    spec.validate();
  });

  const auto evidence = evtag::load_split(a.evidence);
  const auto test = evtag::load_split(a.test);
  const evtag::SweepResult result = evtag::run_sweep(evidence, test, spec);

  const fs::path out = a.out;
  ensure_parent(out);
  evtag::write_text_file(out, evtag::sweep_to_csv(result.rows));

  nlohmann::ordered_json best;
  best["best_evidential"] = evtag::sweep_row_to_json(result.best_evidential);
  best["best_entropy"] = evtag::sweep_row_to_json(result.best_entropy);
  nlohmann::ordered_json per_k = nlohmann::ordered_json::array();
  for (std::size_t k : spec.k_values) {
    if (auto i = evtag::select_best(result.rows, evtag::TaggerMethod::Evidential, k)) {
      per_k.push_back(evtag::sweep_row_to_json(result.rows[*i]));
    }
  }
  best["best_evidential_per_k"] = std::move(per_k);
  evtag::write_text_file(with_extension(out, ".best.json"), best.dump(2) + "\n");
  write_sidecar(out);

  auto line = [](const char* name, const evtag::SweepRow& r) {
    std::cout << name << ": k=" << r.k << " threshold=" << r.threshold
              << " UG-Mean=" << r.rates.ugmean.value_or(-1.0) << " TC=" << r.counts.tc
              << " FC=" << r.counts.fc << " TU=" << r.counts.tu << " FU=" << r.counts.fu
              << "\n";
  };
  line("best evidential", result.best_evidential);
  line("best entropy   ", result.best_entropy);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Evidence-retrieval certainty tagging for classifier predictions"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"csv", "jsonl"};
  const std::vector<std::string> bases{"e", "2", "10"};

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic evidence/test dataset pair");
  s->add_option("config", synth.config, "Key-value config file (JSON object)")->required();
  s->add_option("--seed", synth.seed, "Override the config seed");
  s->add_option("--out", synth.out, "Output directory")->required();

  IndexArgs index;
  auto* ix = app.add_subcommand("index", "Build an evidence index snapshot");
  ix->add_option("--evidence", index.evidence, "Evidence dataset directory")->required();
  ix->add_option("--out", index.out, "Snapshot directory")->required();
  ix->add_option("--q-lo", index.q_lo, "Lower credal quantile");
  ix->add_option("--q-hi", index.q_hi, "Upper credal quantile");

  TagArgs tag;
  auto* t = app.add_subcommand("tag", "Tag test predictions with the evidential rule");
  auto* ev_opt = t->add_option("--evidence", tag.evidence, "Evidence dataset directory");
  auto* ix_opt = t->add_option("--index", tag.index, "Index snapshot directory");
  ev_opt->excludes(ix_opt);
  t->add_option("--test", tag.test, "Test dataset directory")->required();
  t->add_option("--k", tag.k, "Evidence count")->check(CLI::PositiveNumber);
  t->add_option("--tau", tag.tau, "Belief threshold in (0, 1)");
  t->add_option("--q-lo", tag.q_lo, "Lower credal quantile");
  t->add_option("--q-hi", tag.q_hi, "Upper credal quantile");
  t->add_option("--log-base", tag.log_base, "Entropy log base")->check(CLI::IsMember(bases));
  t->add_option("--out", tag.out, "Decision output path")->required();
  t->add_option("--format", tag.format, "Format written to --out")->check(CLI::IsMember(formats));
  t->add_option("--workers", tag.workers, "Worker threads (0 = all cores)");

  BaselineArgs base;
  auto* b = app.add_subcommand("baseline-tag", "Tag test predictions by an entropy cutoff");
  b->add_option("--test", base.test, "Test dataset directory")->required();
  b->add_option("--pe-threshold", base.pe_threshold, "Entropy cutoff (certain if <=)")
      ->check(CLI::NonNegativeNumber);
  b->add_option("--log-base", base.log_base, "Entropy log base")->check(CLI::IsMember(bases));
  b->add_option("--out", base.out, "Decision output path")->required();
  b->add_option("--format", base.format, "Format written to --out")->check(CLI::IsMember(formats));

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score a decision file against its test split");
  e->add_option("--decisions", eval.decisions, "Decision JSONL file")->required();
  e->add_option("--test", eval.test, "Test dataset directory")->required();
  e->add_option("--out", eval.out, "Report output path")->required();
  e->add_option("--format", eval.format, "Format written to --out")->check(CLI::IsMember(formats));
  e->add_option("--bins", eval.bins, "ECE bins")->check(CLI::PositiveNumber);

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Sweep (k, tau) and entropy cutoffs");
  w->add_option("--evidence", sweep.evidence, "Evidence dataset directory")->required();
  w->add_option("--test", sweep.test, "Test dataset directory")->required();
  w->add_option("--k-values", sweep.k_values, "Evidence counts")->delimiter(',');
  w->add_option("--tau-values", sweep.tau_values, "Explicit tau grid")->delimiter(',');
  w->add_option("--tau-min", sweep.tau_min, "Tau grid start");
  w->add_option("--tau-max", sweep.tau_max, "Tau grid end");
  w->add_option("--tau-step", sweep.tau_step, "Tau grid step");
  w->add_option("--pe-thresholds", sweep.pe_thresholds, "Entropy cutoffs")->delimiter(',');
  w->add_option("--q-lo", sweep.q_lo, "Lower credal quantile");
  w->add_option("--q-hi", sweep.q_hi, "Upper credal quantile");
  w->add_option("--log-base", sweep.log_base, "Entropy log base")->check(CLI::IsMember(bases));
  w->add_option("--out", sweep.out, "Long-format CSV path")->required();
  w->add_option("--workers", sweep.workers, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*ix) return cmd_index(index);
    if (*t) {
      if (tag.evidence.empty() && tag.index.empty()) {
        std::cerr << "tag: one of --evidence or --index is required\n";
        return kExitUsage;
      }
      return cmd_tag(tag);
    }
    if (*b) return cmd_baseline(base);
    if (*e) return cmd_eval(eval);
    if (*w) return cmd_sweep(sweep);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const evtag::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return evtag::is_invariant_violation(err.code()) ? kExitInvariant : kExitData;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}
