#pragma once

#include <vector>

#include "nhsteer/canonical.hpp"
#include "nhsteer/expr.hpp"
#include "nhsteer/hall.hpp"
#include "nhsteer/poly.hpp"

namespace nhsteer {

// Privileged coordinates z = Phi(a, x) of a system free up to step r.
struct PrivilegedChart {
  RationalVector anchor;    // exact binary value of the anchor
  std::vector<double> anchor_value;
  Weights weights;
  RationalMatrix y_matrix;  // y = y_matrix * (x - a)
  std::vector<Poly> ztilde_of_y;
  std::vector<Poly> psi;    // z in terms of z~
  TriangularMap map;        // q = x - a  ->  z, with exact inverse
  bool exact = true;        // false when sin/cos values at the anchor were rounded

  std::size_t dim() const { return weights.size(); }
  std::vector<double> to_z(const std::vector<double>& x) const;
  std::vector<double> to_x(const std::vector<double>& z) const;
};

struct ApproxSystem {
  PrivilegedChart chart;
  CanonicalSystem approx;            // the canonical form, same for every anchor
  std::vector<PolyField> jets;       // fields in q = x - a, Taylor degree r
  std::vector<PolyField> in_chart;   // fields in z, monomials of weighted degree <= r
};

// Throws SingularFrame when the Hall frame is degenerate at a.
ApproxSystem first_order_approx(const std::vector<ExprField>& x, const std::vector<double>& a,
                                const CanonicalSystem& canon);
ApproxSystem first_order_approx(const std::vector<ExprField>& x, const std::vector<double>& a, const HallBasis& basis);

// Chart only, without the fields in chart coordinates.
PrivilegedChart privileged_chart(const std::vector<ExprField>& x, const std::vector<double>& a, const HallBasis& basis);

// Chart construction from Taylor jets already expressed in q = x - a.
PrivilegedChart regular_chart(const std::vector<PolyField>& jets, const HallBasis& basis, int jet_degree);

struct OrderReport {
  Weights expected;
  std::vector<int> word_orders;  // least length of a generator word detecting z_j
  std::vector<bool> frame_ok;    // adapted-frame criterion gives ord(z_j) = w_j
  int residual_min_degree = 0;   // least weighted degree of X_i - X^_i in the chart
  bool approx_is_canonical = false;

  bool ok() const;
};

// Both order routes for each chart coordinate plus the approximation residual.
OrderReport check_orders(const std::vector<PolyField>& jets, const HallBasis& basis, const std::vector<Poly>& forward,
                         const std::vector<PolyField>& in_chart, const CanonicalSystem& canon);

}  // namespace nhsteer
