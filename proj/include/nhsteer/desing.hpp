#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nhsteer/canonical.hpp"
#include "nhsteer/expr.hpp"
#include "nhsteer/hall.hpp"
#include "nhsteer/poly.hpp"
#include "nhsteer/sim.hpp"

namespace nhsteer {

// Brackets X_{I_1..I_count} of expression fields.
std::vector<ExprField> bracket_fields(const HallBasis& basis, int count, const std::vector<ExprField>& x);

struct FrameSelection {
  std::vector<int> indices;  // Hall indices, ascending
  std::vector<double> anchor;
  double det_value = 0;
  bool exact = false;        // determinant computed in rational arithmetic
  std::shared_ptr<const std::vector<ExprField>> frame_fields;
  std::shared_ptr<const Tape> tape;  // all frame components, column-major

  double det_at(const std::vector<double>& x) const;
  // |det| > threshold * prod max(1, |column|) at x.
  bool contains(const std::vector<double>& x, double threshold = 1e-9) const;
};

// Among n-subsets of H^r with the smallest total length, the one with the
// largest |det| at a. Throws NoFrame.
FrameSelection select_frame(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& a);
// Uses the given indices (validated at a).
FrameSelection fixed_frame(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& a,
                           const std::vector<int>& indices);

struct LiftStep {
  int s = 0;
  std::vector<int> K;      // Hall indices of the frame at this step
  std::vector<int> added;  // Hall indices that received a fiber variable
};

struct LiftedSystem {
  int n = 0;    // base dimension
  int dim = 0;  // lifted dimension
  int m = 0;
  int r = 0;
  std::vector<double> anchor;
  RationalVector anchor_exact;
  FrameSelection frame;
  std::vector<ExprField> xi;           // lifted fields in (x, v)
  std::vector<std::string> names;      // base names then fiber names
  std::vector<int> fiber_hall;         // Hall index of each fiber variable
  TriangularMap chart;                 // (x - a, v) -> z
  Weights weights;
  CanonicalSystem approx;              // xi^ in z
  std::vector<PolyField> jets;         // xi in (x - a, v), Taylor degree r
  std::vector<PolyField> in_chart;     // xi in z, monomials of weighted degree <= r
  std::vector<LiftStep> steps;
  bool exact = true;

  std::vector<double> lift_point(const std::vector<double>& x) const;
  std::vector<double> project(const std::vector<double>& p) const;
  Trajectory project(const Trajectory& t) const;
  std::vector<double> to_z(const std::vector<double>& p) const;
};

LiftedSystem desingularize(const std::vector<ExprField>& x, const FrameSelection& frame, int r,
                           const std::vector<std::string>& names = {});

// Growth vector (n_1..n_r) at many points; brackets are compiled once.
class GrowthProbe {
 public:
  GrowthProbe(const std::vector<ExprField>& x, const HallBasis& basis);
  std::vector<int> at(const std::vector<double>& p, double tol = 1e-8) const;

 private:
  HallBasis basis_;
  Tape tape_;
};

// Growth vector (n_1..n_r) from Hall brackets evaluated at x, numerical rank
// by SVD with relative threshold tol.
std::vector<int> growth_vector(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& p,
                               double tol = 1e-8);

}  // namespace nhsteer
