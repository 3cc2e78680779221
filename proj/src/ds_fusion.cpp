#include "evtag/ds_fusion.hpp"

#include <cmath>

#include "evtag/error.hpp"

namespace evtag {

double MassFunction::total() const {
  double sum = ignorance;
  for (double v : singleton) sum += v;
  return sum;
}

MassFunction MassFunction::vacuous(std::size_t num_classes) {
  return {std::vector<double>(num_classes, 0.0), 1.0};
}

MassFunction MassFunction::uniform_fallback(std::size_t num_classes) {
  const double share = 1.0 / static_cast<double>(num_classes + 1);
  return {std::vector<double>(num_classes, share), share};
}

bool is_valid_mass(const MassFunction& m, double tolerance) {
  if (m.ignorance < 0.0) return false;
  for (double v : m.singleton) {
    if (v < 0.0) return false;
  }
  return std::abs(m.total() - 1.0) <= tolerance;
}

MassFunction mass_from_credal(const CredalIntervalVector& intervals) {
  MassFunction m;
  m.singleton = intervals.lower;
  double committed = 0.0;
  for (double v : m.singleton) committed += v;
  m.ignorance = 1.0 - committed;
  if (m.ignorance < 0.0) {
    if (m.ignorance < -1e-9) {
      throw Error(ErrorCode::NegativeIgnorance,
                  "lower bounds sum to " + std::to_string(committed));
    }
    m.ignorance = 0.0;
  }
  return m;
}

Combination combine(const MassFunction& a, const MassFunction& b) {
  const std::size_t classes = a.num_classes();
  if (b.num_classes() != classes) {
    throw Error(ErrorCode::HeterogeneousShapes, "combining masses over different frames");
  }
  double b_committed = 0.0;
  for (double v : b.singleton) b_committed += v;

  // sum_{i != l} a_i b_l, accumulated row by row as a_i (sum_l b_l - b_i).
  double conflict = 0.0;
  for (std::size_t i = 0; i < classes; ++i) {
    conflict += a.singleton[i] * (b_committed - b.singleton[i]);
  }
  Combination out;
  out.denominator = 1.0 - conflict;
  if (out.denominator <= kConflictThreshold) {
    out.mass = MassFunction::uniform_fallback(classes);
    out.fallback = true;
    return out;
  }
  const double d = out.denominator;
  out.mass.singleton.resize(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    const double aj = a.singleton[j];
    const double bj = b.singleton[j];
    out.mass.singleton[j] = (aj * bj + aj * b.ignorance + a.ignorance * bj) / d;
  }
  out.mass.ignorance = a.ignorance * b.ignorance / d;
  return out;
}

FusionOutcome fuse_all(std::span<const MassFunction> masses) {
  if (masses.empty()) {
    throw Error(ErrorCode::EmptyEvidenceList, "no evidence masses to fuse");
  }
  FusionOutcome out;
  out.fused = masses.front();
  out.conflict_trace.reserve(masses.size() - 1);
  for (std::size_t i = 1; i < masses.size(); ++i) {
    Combination step = combine(out.fused, masses[i]);
    out.conflict_trace.push_back(step.denominator);
    out.fallback_triggered = out.fallback_triggered || step.fallback;
    out.fused = std::move(step.mass);
  }
  return out;
}

std::size_t argmax_singleton(const MassFunction& m) {
  return argmax(m.singleton);
}

FocalElement argmax_focal(const MassFunction& m) {
  const std::size_t best = argmax_singleton(m);
  if (m.singleton.empty() || m.ignorance > m.singleton[best]) {
    return FocalElement::omega();
  }
  return FocalElement::singleton(best);
}

std::vector<double> plausibility(const MassFunction& m) {
  std::vector<double> out(m.singleton);
  for (double& v : out) v += m.ignorance;
  return out;
}

}  // namespace evtag
