#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evtag/dataset_io.hpp"
#include "evtag/decision.hpp"
#include "evtag/ds_fusion.hpp"
#include "evtag/error.hpp"
#include "evtag/metrics.hpp"
#include "evtag/retrieval.hpp"
#include "evtag/sweep.hpp"
#include "evtag/synthetic.hpp"
#include "evtag/uncertainty.hpp"

namespace py = pybind11;
using namespace evtag;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

PredictiveSampleSet samples_from_array(const FloatArray& a) {
  if (a.ndim() != 2) throw py::value_error("samples must be a 2-D array (passes x classes)");
  const auto passes = static_cast<std::size_t>(a.shape(0));
  const auto classes = static_cast<std::size_t>(a.shape(1));
  return PredictiveSampleSet(passes, classes, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray samples_to_array(const PredictiveSampleSet& s) {
  FloatArray out({s.num_passes(), s.num_classes()});
  std::copy(s.values().begin(), s.values().end(), out.mutable_data());
  return out;
}

std::vector<float> vector_from_array(const FloatArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::dict rates_to_dict(const UncertaintyRates& r) {
  py::dict d;
  d["uacc"] = r.uacc;
  d["utpr"] = r.utpr;
  d["ufpr"] = r.ufpr;
  d["ugmean"] = r.ugmean;
  return d;
}

py::dict sweep_row_to_dict(const SweepRow& r) {
  py::dict d = rates_to_dict(r.rates);
  d["method"] = std::string(to_string(r.method));
  d["k"] = r.k;
  d["threshold"] = r.threshold;
  d["counts"] = r.counts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_evtag, m) {
  m.doc() = "Evidence-retrieval certainty tagging for classifier predictions";

  static py::exception<Error> error_type(m, "EvtagError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type.ptr())(e.what());
      err.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  py::enum_<LogBase>(m, "LogBase")
      .value("E", LogBase::E)
      .value("TWO", LogBase::Two)
      .value("TEN", LogBase::Ten);
  py::enum_<SplitRole>(m, "SplitRole")
      .value("EVIDENCE", SplitRole::Evidence)
      .value("TEST", SplitRole::Test);
  py::enum_<Tag>(m, "Tag").value("CERTAIN", Tag::Certain).value("UNCERTAIN", Tag::Uncertain);
  py::enum_<TaggerMethod>(m, "TaggerMethod")
      .value("EVIDENTIAL", TaggerMethod::Evidential)
      .value("ENTROPY", TaggerMethod::Entropy);

  // Uncertainty summaries.
  m.def("entropy",
        [](const std::vector<double>& p, LogBase base) { return entropy(p, base); },
        py::arg("probs"), py::arg("base") = LogBase::Two);
  m.def(
      "predictive_summary",
      [](const FloatArray& samples, LogBase base) {
        const PredictiveSummary s = predictive_summary(samples_from_array(samples), base);
        return py::make_tuple(s.mean, s.entropy, s.predicted_class);
      },
      py::arg("samples"), py::arg("base") = LogBase::Two,
      "Returns (mean, entropy, predicted_class) for a passes x classes array.");
  m.def(
      "credal_intervals",
      [](const FloatArray& samples, double q_lo, double q_hi) {
        const CredalIntervalVector ci = credal_intervals(samples_from_array(samples), q_lo, q_hi);
        return py::make_tuple(ci.lower, ci.upper, ci.clamped);
      },
      py::arg("samples"), py::arg("q_lo") = kDefaultQuantileLow,
      py::arg("q_hi") = kDefaultQuantileHigh,
      "Returns (lower, upper, clamped) per-class quantile bounds.");

  // Mass functions and Dempster combination.
  py::class_<MassFunction>(m, "MassFunction")
      .def(py::init([](std::vector<double> singleton, double ignorance) {
             return MassFunction{std::move(singleton), ignorance};
           }),
           py::arg("singleton"), py::arg("ignorance"))
      .def_readwrite("singleton", &MassFunction::singleton)
      .def_readwrite("ignorance", &MassFunction::ignorance)
      .def("total", &MassFunction::total)
      .def_static("vacuous", &MassFunction::vacuous)
      .def_static("uniform_fallback", &MassFunction::uniform_fallback)
      .def(py::self == py::self)
      .def("__repr__", [](const MassFunction& mf) {
        return "MassFunction(singleton=" + py::repr(py::cast(mf.singleton)).cast<std::string>() +
               ", ignorance=" + std::to_string(mf.ignorance) + ")";
      });
  m.def(
      "mass_from_lower",
      [](std::vector<double> lower) {
        return mass_from_credal(CredalIntervalVector{std::move(lower), {}, false});
      },
      py::arg("lower"));
  m.def(
      "combine",
      [](const MassFunction& a, const MassFunction& b) {
        const Combination c = combine(a, b);
        return py::make_tuple(c.mass, c.denominator, c.fallback);
      },
      py::arg("a"), py::arg("b"), "Returns (mass, denominator, fallback).");
  m.def(
      "fuse_all",
      [](const std::vector<MassFunction>& masses) {
        const FusionOutcome f = fuse_all(masses);
        return py::make_tuple(f.fused, f.conflict_trace, f.fallback_triggered);
      },
      py::arg("masses"), "Left fold of combine; returns (fused, denominators, fallback).");
  m.def(
      "argmax_focal",
      [](const MassFunction& mf) -> py::object {
        const FocalElement f = argmax_focal(mf);
        if (f.is_omega) return py::str("omega");
        return py::int_(f.class_index);
      },
      py::arg("mass"), "Class index of the largest focal mass, or 'omega'.");

  // Datasets.
  py::class_<InstanceRecord>(m, "InstanceRecord")
      .def(py::init([](std::uint64_t id, const FloatArray& embedding, const FloatArray& samples,
                       std::uint32_t label) {
             return InstanceRecord{id, vector_from_array(embedding), samples_from_array(samples),
                                   label};
           }),
           py::arg("instance_id"), py::arg("embedding"), py::arg("samples"), py::arg("true_label"))
      .def_readwrite("instance_id", &InstanceRecord::instance_id)
      .def_readwrite("true_label", &InstanceRecord::true_label)
      .def_property_readonly("embedding",
                             [](const InstanceRecord& r) {
                               return FloatArray(static_cast<py::ssize_t>(r.embedding.size()),
                                                 r.embedding.data());
                             })
      .def_property_readonly("samples",
                             [](const InstanceRecord& r) { return samples_to_array(r.samples); })
      .def(py::self == py::self);
  m.def("load_split", &load_split, py::arg("path"));
  m.def(
      "write_split",
      [](const std::vector<InstanceRecord>& records, const std::filesystem::path& dir,
         SplitRole role, LogBase base) { write_split(records, dir, role, base); },
      py::arg("records"), py::arg("dir"), py::arg("role") = SplitRole::Test,
      py::arg("log_base") = LogBase::Two);

  // Retrieval.
  py::class_<Neighbor>(m, "Neighbor")
      .def_readonly("evidence_id", &Neighbor::evidence_id)
      .def_readonly("similarity", &Neighbor::similarity)
      .def_readonly("distance", &Neighbor::distance);
  py::class_<EvidenceIndex>(m, "EvidenceIndex")
      .def_static(
          "build",
          [](const std::vector<InstanceRecord>& evidence, double q_lo, double q_hi) {
            return EvidenceIndex::build(evidence, evidence_masses(evidence, q_lo, q_hi));
          },
          py::arg("evidence"), py::arg("q_lo") = kDefaultQuantileLow,
          py::arg("q_hi") = kDefaultQuantileHigh)
      .def(
          "query",
          [](const EvidenceIndex& ix, const FloatArray& x, std::size_t k) {
            return ix.query(vector_from_array(x), k);
          },
          py::arg("x"), py::arg("k"))
      .def("__len__", &EvidenceIndex::size)
      .def_property_readonly("dim", &EvidenceIndex::dim)
      .def("mass", &EvidenceIndex::mass, py::arg("row"))
      .def("save", [](const EvidenceIndex& ix, const std::filesystem::path& dir) { ix.save(dir); })
      .def_static("load", [](const std::filesystem::path& dir) { return EvidenceIndex::load(dir); });

  // Tagging.
  py::class_<TaggerConfig>(m, "TaggerConfig")
      .def(py::init([](std::size_t k, double tau, double q_lo, double q_hi, LogBase base,
                       std::size_t workers) {
             TaggerConfig cfg{k, tau, q_lo, q_hi, base, workers};
             cfg.validate();
             return cfg;
           }),
           py::arg("k") = 3, py::arg("tau") = 0.3, py::arg("q_lo") = kDefaultQuantileLow,
           py::arg("q_hi") = kDefaultQuantileHigh, py::arg("log_base") = LogBase::Two,
           py::arg("workers") = 0)
      .def_readwrite("k", &TaggerConfig::k)
      .def_readwrite("tau", &TaggerConfig::tau)
      .def_readwrite("workers", &TaggerConfig::workers);
  py::class_<DecisionRecord>(m, "DecisionRecord")
      .def_readonly("instance_id", &DecisionRecord::instance_id)
      .def_readonly("method", &DecisionRecord::method)
      .def_readonly("tag", &DecisionRecord::tag)
      .def_readonly("predicted_class", &DecisionRecord::predicted_class)
      .def_readonly("entropy", &DecisionRecord::entropy)
      .def_readonly("bel_individual", &DecisionRecord::bel_individual)
      .def_readonly("bel_fused", &DecisionRecord::bel_fused)
      .def_readonly("individual_mass", &DecisionRecord::individual_mass)
      .def_readonly("fused_mass", &DecisionRecord::fused_mass)
      .def_readonly("fusion_fallback", &DecisionRecord::fusion_fallback)
      .def_property_readonly("neighbor_ids",
                             [](const DecisionRecord& r) {
                               std::vector<std::uint64_t> ids;
                               for (const auto& n : r.neighbors) ids.push_back(n.evidence_id);
                               return ids;
                             })
      .def("to_json", &decision_to_json_line)
      .def(py::self == py::self);
  m.def(
      "tag_batch",
      [](const std::vector<InstanceRecord>& test, const EvidenceIndex& index,
         const TaggerConfig& cfg) { return tag_batch(test, index, cfg); },
      py::arg("test"), py::arg("index"), py::arg("config"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "tag_batch_entropy",
      [](const std::vector<InstanceRecord>& test, double threshold, LogBase base) {
        return tag_batch_entropy(test, threshold, base);
      },
      py::arg("test"), py::arg("pe_threshold"), py::arg("log_base") = LogBase::Two);

  // Metrics.
  py::class_<UncertaintyConfusion>(m, "UncertaintyConfusion")
      .def(py::init([](std::uint64_t tc, std::uint64_t fc, std::uint64_t tu, std::uint64_t fu) {
             return UncertaintyConfusion{tc, fc, tu, fu};
           }),
           py::arg("tc"), py::arg("fc"), py::arg("tu"), py::arg("fu"))
      .def_readwrite("tc", &UncertaintyConfusion::tc)
      .def_readwrite("fc", &UncertaintyConfusion::fc)
      .def_readwrite("tu", &UncertaintyConfusion::tu)
      .def_readwrite("fu", &UncertaintyConfusion::fu)
      .def(py::self == py::self)
      .def("__repr__", [](const UncertaintyConfusion& c) {
        return "UncertaintyConfusion(tc=" + std::to_string(c.tc) + ", fc=" + std::to_string(c.fc) +
               ", tu=" + std::to_string(c.tu) + ", fu=" + std::to_string(c.fu) + ")";
      });
  m.def(
      "confusion",
      [](const std::vector<DecisionRecord>& decisions, const std::vector<std::uint32_t>& truths) {
        return confusion(decisions, truths);
      },
      py::arg("decisions"), py::arg("truths"));
  m.def(
      "uncertainty_metrics",
      [](const UncertaintyConfusion& c) { return rates_to_dict(uncertainty_metrics(c)); },
      py::arg("counts"), "UAcc/UTPR/UFPR/UG-Mean; undefined ratios are None.");
  m.def(
      "ece",
      [](const std::vector<double>& confidences, const std::vector<bool>& correct,
         std::size_t bins) { return ece(confidences, correct, bins); },
      py::arg("confidences"), py::arg("correct"), py::arg("num_bins") = kDefaultEceBins);
  m.def(
      "brier",
      [](const std::vector<std::vector<double>>& probs, const std::vector<std::uint32_t>& labels) {
        return brier(probs, labels);
      },
      py::arg("probs"), py::arg("labels"));

  // Synthetic data and sweeps.
  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("num_classes", &SynthConfig::num_classes)
      .def_readwrite("embedding_dim", &SynthConfig::embedding_dim)
      .def_readwrite("num_passes", &SynthConfig::num_passes)
      .def_readwrite("instances_per_class", &SynthConfig::instances_per_class)
      .def_readwrite("cluster_separation", &SynthConfig::cluster_separation)
      .def_readwrite("dropout_noise", &SynthConfig::dropout_noise)
      .def_readwrite("head_noise", &SynthConfig::head_noise)
      .def_readwrite("logit_scale", &SynthConfig::logit_scale)
      .def_readwrite("mislabel_rate", &SynthConfig::mislabel_rate)
      .def_readwrite("evidence_fraction", &SynthConfig::evidence_fraction);
  m.def(
      "generate",
      [](const SynthConfig& cfg) {
        SynthSplits s = generate(cfg);
        return py::make_tuple(std::move(s.evidence), std::move(s.test));
      },
      py::arg("config"), "Returns (evidence, test) record lists.");
  m.def(
      "run_sweep",
      [](const std::vector<InstanceRecord>& evidence, const std::vector<InstanceRecord>& test,
         std::vector<std::size_t> k_values, std::optional<std::vector<double>> tau_values,
         std::optional<std::vector<double>> pe_thresholds) {
        SweepSpec spec;
        spec.k_values = std::move(k_values);
        if (tau_values) spec.tau_values = *tau_values;
        if (pe_thresholds) spec.pe_thresholds = *pe_thresholds;
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(evidence, test, spec);
        }
        py::list rows;
        for (const SweepRow& r : result.rows) rows.append(sweep_row_to_dict(r));
        return rows;
      },
      py::arg("evidence"), py::arg("test"), py::arg("k_values") = std::vector<std::size_t>{3},
      py::arg("tau_values") = py::none(), py::arg("pe_thresholds") = py::none(),
      "Long-format sweep rows as dicts.");
}
