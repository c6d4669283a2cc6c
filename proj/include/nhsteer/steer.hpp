#pragma once

#include <cstdint>
#include <vector>

#include "nhsteer/canonical.hpp"
#include "nhsteer/control_law.hpp"
#include "nhsteer/rational.hpp"
#include "nhsteer/sim.hpp"
#include "nhsteer/trig.hpp"

namespace nhsteer {

struct SteerConfig {
  int max_spacing_doublings = 10;
  int random_candidates = 64;  // random frequency sets tried after the chain
  double det_threshold = 1e-6;
  bool plan_smoothing = false;  // also pick junction-correction frequencies
  std::uint64_t seed = 7;       // generic amplitudes for the exact resonance audit
};

// Frequencies and control matrix of one equivalence class.
struct ClassPlan {
  int class_id = 0;
  std::vector<int> elements;  // Hall indices, ascending
  std::vector<int> delta;
  bool generator = false;
  int resonance_channel = 0;  // 1-based
  int parity = 0;             // epsilon
  long spacing = 1;           // multiplier used in the spacing chain, 0 for a random set
  // basic[g][c]: basic frequencies on channel c (0-based) for resonance group g.
  std::vector<std::vector<std::vector<long>>> basic;
  std::vector<long> resonance;           // omega* per group
  RationalMatrix displacement_per_2pi;   // A = 2 pi * this
  std::vector<std::vector<double>> A;
  std::vector<std::vector<double>> B;    // inverse of A
  double det_ratio = 0;                  // |det| after column normalization / prod of row norms
  std::vector<long> correction;          // per-channel junction frequency (smoothing)

  int groups() const { return static_cast<int>(resonance.size()); }
  // One-period input with the given resonance amplitudes.
  Period period(const std::vector<double>& amplitudes, int m) const;
  long max_frequency() const;
};

struct FrequencyPlan {
  int m = 0;
  int r = 0;
  std::vector<ClassPlan> classes;
};

struct ControlMatrixAudit {
  RationalMatrix displacement_per_2pi;
  bool non_resonant = true;   // smaller classes have no secular drift
  bool affine_ok = true;      // zero amplitudes give zero displacement, linear in a
  std::string detail;
};

// Exact solution of the canonical dynamics under trigonometric inputs for
// components 1..count, starting from v0.
std::vector<ExactTrig> canonical_trig_solution(const CanonicalSystem& sys, const std::vector<ExactTrig>& inputs,
                                               const RationalVector& v0, int count);
std::vector<ExactTrig> period_series(const Period& p, int m, const Rational& scale = 1);
// Value of an exact trig solution at t = 2 pi.
long double value_at_full_period(const ExactTrig& s);

ClassPlan plan_frequencies(const CanonicalSystem& sys, int class_id, const SteerConfig& cfg = {});
FrequencyPlan plan_all(const CanonicalSystem& sys, const SteerConfig& cfg = {});
ControlMatrixAudit control_matrix(const CanonicalSystem& sys, const ClassPlan& plan, std::uint64_t seed = 7,
                                  const std::vector<long>& correction = {});

// Amplitudes B * delta placed on the resonance channel.
Period steer_class(const std::vector<double>& delta, const ClassPlan& plan, int m);

struct ExactSteerOptions {
  double tolerance = 1e-10;
  int smooth = 0;  // 0: raw concatenation, >=1: continuous inputs across periods
};

ControlLaw exact_steer(const std::vector<double>& x_init, const CanonicalSystem& sys, const FrequencyPlan& plan,
                       const ExactSteerOptions& opts = {});

// Makes period k+1 start where period k ends, channel by channel, by adding
// c * cos(correction * tau) terms; returns the raw law when k = 0.
ControlLaw smooth_concatenate(const std::vector<Period>& periods, int m, const FrequencyPlan& plan, int k);
// Adds the junction correction to `next` so it starts at `target` (per channel).
void match_start(Period& next, const std::vector<double>& target, const std::vector<long>& correction);

}  // namespace nhsteer
