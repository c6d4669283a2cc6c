#pragma once

#include <vector>

#include "nhsteer/hall.hpp"
#include "nhsteer/poly.hpp"
#include "nhsteer/rational.hpp"

namespace nhsteer {

// Exact construction of the coordinate chain y -> z~ -> z around an anchor,
// shared by the regular chart and the lifting algorithm. Everything lives in
// local coordinates q (q = 0 at the anchor); fields are Taylor jets in q.

// Brackets of the generators along the Hall tree for indices 1..count.
std::vector<PolyField> bracket_jets(const HallBasis& basis, int count, const std::vector<PolyField>& gens,
                                    const Truncation& t);

// (W_1^b_1 ... W_k^b_k f)(0): W_k is applied first.
Rational derivative_at_zero(const std::vector<const PolyField*>& ops, const std::vector<int>& powers, const Poly& f);

// Inverse of z_j = x_j + g_j(x_1..x_{j-1}) by back substitution (exact).
std::vector<Poly> invert_unipotent(const std::vector<Poly>& z_of_x);

struct ChartStepInput {
  const std::vector<PolyField>* fields = nullptr;  // generators in q coordinates
  const HallBasis* basis = nullptr;
  std::vector<int> frame;  // sorted Hall indices; 1..dim(s) first
  int s = 1;               // recursion (a) for indices <= dim(s), (b) for the rest
  std::vector<Poly> zeta_forward;  // previous coordinates zeta(q); y is linear in zeta
  std::vector<Poly> zeta_inverse;  // q(zeta)
  int jet_degree = 2;
};

struct ChartStepResult {
  RationalMatrix y_matrix;           // y = y_matrix * zeta
  std::vector<Poly> ztilde_of_y;     // triangular, unit linear part
  std::vector<Poly> psi;             // z in terms of z~, triangular
  std::vector<Poly> forward;         // z(q), exact
  std::vector<Poly> inverse;         // q(z), exact
  Weights weights;                   // weight of each z coordinate
};

// Throws SingularFrame when the frame at the anchor is not a basis and
// IdentificationFailure when the Psi system is inconsistent.
ChartStepResult build_chart_step(const ChartStepInput& in);

// Components of the fields in the chart, monomials of weighted degree <= max_weight.
std::vector<PolyField> fields_in_chart(const std::vector<PolyField>& fields, const std::vector<Poly>& forward,
                                       const std::vector<Poly>& inverse, const Weights& w, int max_weight);

// Least k such that some word X_{i1}..X_{ik} f is nonzero at 0; max_order + 1
// when none up to max_order.
int nonholonomic_order(const Poly& f, const std::vector<PolyField>& gens, int max_order);

// Frame test: all W^alpha f vanish at 0 for w(alpha) < expected, and some
// W^alpha f with w(alpha) = expected does not. The frame must be adapted.
bool frame_order_equals(const Poly& f, const std::vector<PolyField>& frame, const Weights& frame_weights,
                        int expected);

}  // namespace nhsteer
