#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evtag/uncertainty.hpp"

namespace evtag {

// Denominators at or below this trigger the uniform 1/(C+1) fallback.
inline constexpr double kConflictThreshold = 1e-10;

// Basic belief assignment whose focal sets are the C singletons and the
// whole frame (ignorance). Masses are non-negative and sum to one.
struct MassFunction {
  std::vector<double> singleton;
  double ignorance = 1.0;

  std::size_t num_classes() const { return singleton.size(); }
  double total() const;

  static MassFunction vacuous(std::size_t num_classes);
  static MassFunction uniform_fallback(std::size_t num_classes);

  friend bool operator==(const MassFunction&, const MassFunction&) = default;
};

bool is_valid_mass(const MassFunction& m, double tolerance = 1e-9);

// A focal element: either a singleton class or the frame (ignorance).
struct FocalElement {
  bool is_omega = false;
  std::size_t class_index = 0;

  static FocalElement omega() { return {true, 0}; }
  static FocalElement singleton(std::size_t c) { return {false, c}; }

  friend bool operator==(const FocalElement&, const FocalElement&) = default;
};

struct Combination {
  MassFunction mass;
  double denominator = 1.0;
  bool fallback = false;
};

struct FusionOutcome {
  MassFunction fused;
  // One denominator per combination step (size = inputs - 1).
  std::vector<double> conflict_trace;
  bool fallback_triggered = false;
};

// m({c}) = lower_c, m(Omega) = 1 - sum lower_c. Throws NegativeIgnorance if
// the lower bounds were not clamped onto the simplex.
MassFunction mass_from_credal(const CredalIntervalVector& intervals);

// Dempster's rule for singleton+Omega structures:
//   out_j = (a_j b_j + a_j b_Omega + a_Omega b_j) / D,  out_Omega = a_Omega b_Omega / D,
//   D = 1 - sum_{i != l} a_i b_l.
// When D <= kConflictThreshold the uniform fallback is returned instead.
Combination combine(const MassFunction& a, const MassFunction& b);

// Left fold of combine in the given order.
FusionOutcome fuse_all(std::span<const MassFunction> masses);

// Largest mass among singletons and Omega. A singleton beats Omega at equal
// mass; among singletons the smallest index wins.
FocalElement argmax_focal(const MassFunction& m);

// Index of the largest singleton mass (smallest index on ties).
std::size_t argmax_singleton(const MassFunction& m);

// Pl({c}) = m({c}) + m(Omega) for each class.
std::vector<double> plausibility(const MassFunction& m);

}  // namespace evtag
