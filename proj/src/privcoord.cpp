#include "nhsteer/privcoord.hpp"

#include <climits>

#include "nhsteer/chart_engine.hpp"
#include "nhsteer/errors.hpp"

namespace nhsteer {

std::vector<double> PrivilegedChart::to_z(const std::vector<double>& x) const {
  std::vector<double> q(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) q[i] = x[i] - anchor_value[i];
  return map.apply(q);
}

std::vector<double> PrivilegedChart::to_x(const std::vector<double>& z) const {
  std::vector<double> x = map.apply_inverse(z);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += anchor_value[i];
  return x;
}

PrivilegedChart regular_chart(const std::vector<PolyField>& jets, const HallBasis& basis, int jet_degree) {
  std::size_t n = jets.at(0).size();
  if (static_cast<int>(n) != basis.size())
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(n) + " differs from the Hall dimension " +
                    std::to_string(basis.size()) + "; the system is not free, lift it first");
  ChartStepInput in;
  in.fields = &jets;
  in.basis = &basis;
  for (int j = 1; j <= basis.size(); ++j) in.frame.push_back(j);
  in.s = basis.r;
  for (std::size_t i = 0; i < n; ++i) {
    in.zeta_forward.push_back(Poly::variable(n, i));
    in.zeta_inverse.push_back(Poly::variable(n, i));
  }
  in.jet_degree = jet_degree;
  ChartStepResult step = build_chart_step(in);
  PrivilegedChart chart;
  chart.weights = step.weights;
  chart.y_matrix = step.y_matrix;
  chart.ztilde_of_y = step.ztilde_of_y;
  chart.psi = step.psi;
  chart.map.forward = step.forward;
  chart.map.inverse = step.inverse;
  return chart;
}

ApproxSystem first_order_approx(const std::vector<ExprField>& x, const std::vector<double>& a,
                                const CanonicalSystem& canon) {
  if (x.empty() || static_cast<int>(x.size()) != canon.m)
    throw Error(ErrorCode::DimensionMismatch, "number of fields differs from the canonical system");
  RationalVector anchor;
  for (double v : a) anchor.push_back(from_double(v));
  int r = canon.r;
  bool exact = true;
  ApproxSystem out;
  for (const auto& f : x) {
    bool e = true;
    out.jets.push_back(taylor(f, anchor, r, &e));
    exact = exact && e;
  }
  out.chart = regular_chart(out.jets, canon.basis, r);
  out.chart.anchor = anchor;
  out.chart.anchor_value = a;
  out.chart.exact = exact;
  out.approx = canon;
  out.in_chart = fields_in_chart(out.jets, out.chart.map.forward, out.chart.map.inverse, out.chart.weights, r);
  return out;
}

PrivilegedChart privileged_chart(const std::vector<ExprField>& x, const std::vector<double>& a,
                                 const HallBasis& basis) {
  if (x.empty() || static_cast<int>(x.size()) != basis.m)
    throw Error(ErrorCode::DimensionMismatch, "number of fields differs from the Hall basis");
  RationalVector anchor;
  for (double v : a) anchor.push_back(from_double(v));
  bool exact = true;
  std::vector<PolyField> jets;
  for (const auto& f : x) {
    bool e = true;
    jets.push_back(taylor(f, anchor, basis.r, &e));
    exact = exact && e;
  }
  PrivilegedChart chart = regular_chart(jets, basis, basis.r);
  chart.anchor = anchor;
  chart.anchor_value = a;
  chart.exact = exact;
  return chart;
}

ApproxSystem first_order_approx(const std::vector<ExprField>& x, const std::vector<double>& a,
                                const HallBasis& basis) {
  return first_order_approx(x, a, canonical_fields(basis.m, basis.r));
}

bool OrderReport::ok() const {
  for (std::size_t j = 0; j < expected.size(); ++j)
    if (word_orders[j] != expected[j] || !frame_ok[j]) return false;
  return residual_min_degree >= 0 && approx_is_canonical;
}

OrderReport check_orders(const std::vector<PolyField>& jets, const HallBasis& basis, const std::vector<Poly>& forward,
                         const std::vector<PolyField>& in_chart, const CanonicalSystem& canon) {
  OrderReport rep;
  int n = static_cast<int>(forward.size());
  for (int j = 1; j <= n; ++j) rep.expected.push_back(basis.at(j).length);
  int r = basis.r;
  auto frame = bracket_jets(basis, n, jets, Truncation::ordinary(r));
  for (int j = 0; j < n; ++j) {
    int w = rep.expected[static_cast<std::size_t>(j)];
    rep.word_orders.push_back(nonholonomic_order(forward[static_cast<std::size_t>(j)], jets, w));
    rep.frame_ok.push_back(frame_order_equals(forward[static_cast<std::size_t>(j)], frame, rep.expected, w));
  }
  rep.residual_min_degree = INT_MAX;
  rep.approx_is_canonical = true;
  for (std::size_t i = 0; i < in_chart.size(); ++i) {
    PolyField diff = sub(in_chart[i], canon.fields[i]);
    rep.residual_min_degree = std::min(rep.residual_min_degree, weighted_order(diff, rep.expected));
    if (weighted_part(in_chart[i], rep.expected, -1) != canon.fields[i]) rep.approx_is_canonical = false;
  }
  return rep;
}

}  // namespace nhsteer
