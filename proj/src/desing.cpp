#include "nhsteer/desing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "nhsteer/chart_engine.hpp"
#include "nhsteer/errors.hpp"

namespace nhsteer {

std::vector<ExprField> bracket_fields(const HallBasis& basis, int count, const std::vector<ExprField>& x) {
  std::function<ExprField(const ExprField&, const ExprField&)> br = [](const ExprField& a, const ExprField& b) {
    return lie_bracket(a, b);
  };
  return evaluate_brackets<ExprField>(basis, count, x, br);
}

namespace {

Eigen::MatrixXd frame_matrix(const FrameSelection& f, const std::vector<double>& x) {
  std::size_t n = f.indices.size();
  std::vector<double> out(n * n), scratch;
  f.tape->eval(x.data(), out.data(), scratch);
  Eigen::MatrixXd a(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = out[c * n + r];
  return a;
}

FrameSelection make_selection(const std::vector<ExprField>& brackets, const std::vector<int>& indices,
                              const std::vector<double>& a) {
  FrameSelection f;
  f.indices = indices;
  f.anchor = a;
  auto fields = std::make_shared<std::vector<ExprField>>();
  std::vector<Expr> flat;
  for (int idx : indices) {
    fields->push_back(brackets[static_cast<std::size_t>(idx - 1)]);
    for (const auto& e : fields->back()) flat.push_back(e);
  }
  f.frame_fields = fields;
  f.tape = std::make_shared<Tape>(flat);
  return f;
}

std::size_t exact_rank(RationalMatrix rows) {
  std::size_t rank = 0;
  if (rows.empty()) return 0;
  std::size_t cols = rows[0].size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      Rational f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

std::size_t float_rank(const std::vector<std::vector<double>>& cols, double tol) {
  if (cols.empty()) return 0;
  Eigen::MatrixXd a(cols[0].size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols[c][r];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  double cutoff = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

double column_scale(const std::vector<std::vector<double>>& cols) {
  double s = 1;
  for (const auto& c : cols) {
    double nrm = 0;
    for (double v : c) nrm += v * v;
    s *= std::max(1.0, std::sqrt(nrm));
  }
  return s;
}

// Frame values at a from Taylor jets of degree r - 1.
struct FrameValues {
  std::vector<RationalVector> exact;
  std::vector<std::vector<double>> value;
  bool is_exact = true;
};

FrameValues frame_values(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& a) {
  RationalVector anchor;
  for (double v : a) anchor.push_back(from_double(v));
  int deg = std::max(0, basis.r - 1);
  FrameValues fv;
  std::vector<PolyField> jets;
  for (const auto& f : x) {
    bool e = true;
    jets.push_back(taylor(f, anchor, deg, &e));
    fv.is_exact = fv.is_exact && e;
  }
  auto br = bracket_jets(basis, basis.size(), jets, Truncation::ordinary(deg));
  for (const auto& b : br) {
    RationalVector col;
    std::vector<double> d;
    for (const auto& c : b) {
      col.push_back(c.constant_term());
      d.push_back(col.back().get_d());
    }
    fv.exact.push_back(col);
    fv.value.push_back(d);
  }
  return fv;
}

}  // namespace

double FrameSelection::det_at(const std::vector<double>& x) const { return frame_matrix(*this, x).determinant(); }

bool FrameSelection::contains(const std::vector<double>& x, double threshold) const {
  Eigen::MatrixXd a = frame_matrix(*this, x);
  double scale = 1;
  for (Eigen::Index c = 0; c < a.cols(); ++c) scale *= std::max(1.0, a.col(c).norm());
  double det = a.determinant();
  return std::isfinite(det) && std::abs(det) > threshold * scale;
}

FrameSelection select_frame(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& a) {
  std::size_t n = a.size();
  FrameValues fv = frame_values(x, basis, a);
  // Rank profile by length decides the minimal total weight.
  std::vector<std::vector<int>> by_length(static_cast<std::size_t>(basis.r) + 1);
  std::vector<std::size_t> rank_upto(static_cast<std::size_t>(basis.r) + 1, 0);
  RationalMatrix rows_exact;
  std::vector<std::vector<double>> cols_float;
  for (int s = 1; s <= basis.r; ++s) {
    for (int j = basis.dim(s - 1) + 1; j <= basis.dim(s); ++j) {
      const auto& col = fv.exact[static_cast<std::size_t>(j - 1)];
      bool nonzero = std::any_of(col.begin(), col.end(), [](const Rational& q) { return q != 0; });
      if (!nonzero) continue;
      by_length[static_cast<std::size_t>(s)].push_back(j);
      rows_exact.push_back(col);
      cols_float.push_back(fv.value[static_cast<std::size_t>(j - 1)]);
    }
    rank_upto[static_cast<std::size_t>(s)] = fv.is_exact ? exact_rank(rows_exact) : float_rank(cols_float, 1e-9);
  }
  if (rank_upto[static_cast<std::size_t>(basis.r)] < n)
    throw Error(ErrorCode::NoFrame, "brackets up to length " + std::to_string(basis.r) + " span only " +
                                        std::to_string(rank_upto[static_cast<std::size_t>(basis.r)]) +
                                        " dimensions at the anchor");
  std::vector<int> need(static_cast<std::size_t>(basis.r) + 1, 0);
  for (int s = 1; s <= basis.r; ++s)
    need[static_cast<std::size_t>(s)] =
        static_cast<int>(rank_upto[static_cast<std::size_t>(s)] - rank_upto[static_cast<std::size_t>(s - 1)]);

  std::vector<int> best;
  Rational best_exact = 0;
  double best_float = 0;
  long evaluated = 0;
  const long cap = 200000;
  std::vector<int> chosen;
  std::function<void(int, std::size_t, int)> rec = [&](int s, std::size_t start, int left) {
    if (evaluated >= cap) return;
    if (s > basis.r) {
      ++evaluated;
      if (fv.is_exact) {
        RationalMatrix m(n, RationalVector(n));
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t r = 0; r < n; ++r) m[r][c] = fv.exact[static_cast<std::size_t>(chosen[c] - 1)][r];
        Rational d = abs(determinant(m));
        if (d != 0 && (best.empty() || d > best_exact)) {
          best_exact = d;
          best = chosen;
        }
      } else {
        Eigen::MatrixXd m(n, n);
        std::vector<std::vector<double>> cols;
        for (std::size_t c = 0; c < n; ++c) {
          cols.push_back(fv.value[static_cast<std::size_t>(chosen[c] - 1)]);
          for (std::size_t r = 0; r < n; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols[c][r];
        }
        double d = std::abs(m.determinant());
        if (d > 1e-9 * column_scale(cols) && (best.empty() || d > best_float)) {
          best_float = d;
          best = chosen;
        }
      }
      return;
    }
    const auto& group = by_length[static_cast<std::size_t>(s)];
    if (left == 0) {
      int next = s + 1;
      rec(next, 0, next <= basis.r ? need[static_cast<std::size_t>(next)] : 0);
      return;
    }
    for (std::size_t i = start; i + static_cast<std::size_t>(left) <= group.size(); ++i) {
      chosen.push_back(group[i]);
      rec(s, i + 1, left - 1);
      chosen.pop_back();
    }
  };
  rec(1, 0, need[1]);
  if (best.empty()) throw Error(ErrorCode::NoFrame, "no frame with nonzero determinant at the anchor");
  auto brackets = bracket_fields(basis, best.back(), x);
  FrameSelection f = make_selection(brackets, best, a);
  f.exact = fv.is_exact;
  if (fv.is_exact) {
    RationalMatrix m(n, RationalVector(n));
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 0; r < n; ++r) m[r][c] = fv.exact[static_cast<std::size_t>(best[c] - 1)][r];
    f.det_value = determinant(m).get_d();
  } else {
    f.det_value = f.det_at(a);
  }
  return f;
}

FrameSelection fixed_frame(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& a,
                           const std::vector<int>& indices) {
  std::vector<int> idx = indices;
  std::sort(idx.begin(), idx.end());
  if (idx.size() != a.size() || std::adjacent_find(idx.begin(), idx.end()) != idx.end() || idx.front() < 1 ||
      idx.back() > basis.size())
    throw Error(ErrorCode::InvalidArgument, "frame must list " + std::to_string(a.size()) + " distinct Hall indices");
  FrameValues fv = frame_values(x, basis, a);
  std::size_t n = a.size();
  RationalMatrix m(n, RationalVector(n));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) m[r][c] = fv.exact[static_cast<std::size_t>(idx[c] - 1)][r];
  auto brackets = bracket_fields(basis, idx.back(), x);
  FrameSelection f = make_selection(brackets, idx, a);
  f.exact = fv.is_exact;
  f.det_value = fv.is_exact ? determinant(m).get_d() : f.det_at(a);
  bool ok = fv.is_exact ? determinant(m) != 0 : f.contains(a);
  if (!ok) throw Error(ErrorCode::SingularFrame, "requested frame is singular at the anchor");
  return f;
}

std::vector<double> LiftedSystem::lift_point(const std::vector<double>& x) const {
  std::vector<double> p = x;
  p.resize(static_cast<std::size_t>(dim), 0.0);
  return p;
}

std::vector<double> LiftedSystem::project(const std::vector<double>& p) const {
  return {p.begin(), p.begin() + n};
}

Trajectory LiftedSystem::project(const Trajectory& t) const {
  Trajectory out = t;
  for (auto& s : out.states) s.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<double> LiftedSystem::to_z(const std::vector<double>& p) const {
  std::vector<double> q = p;
  for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i)] -= anchor[static_cast<std::size_t>(i)];
  return chart.apply(q);
}

namespace {

std::vector<Poly> extend_all(const std::vector<Poly>& v, std::size_t nvars) {
  std::vector<Poly> out;
  for (const auto& p : v) out.push_back(p.extend(nvars));
  return out;
}

}  // namespace

LiftedSystem desingularize(const std::vector<ExprField>& x, const FrameSelection& frame, int r,
                           const std::vector<std::string>& names) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "no fields");
  std::size_t n = frame.anchor.size();
  int m = static_cast<int>(x.size());
  HallBasis basis = build_hall_basis(m, r);
  LiftedSystem out;
  out.n = static_cast<int>(n);
  out.m = m;
  out.r = r;
  out.anchor = frame.anchor;
  out.frame = frame;
  for (double v : frame.anchor) out.anchor_exact.push_back(from_double(v));
  out.names = names.empty() ? default_names(n, "x") : names;
  for (int idx : frame.indices)
    if (basis.at(idx).length > r) throw Error(ErrorCode::InvalidArgument, "frame element longer than r");

  // Generator jets in q = (x - a, v); fiber parts kept exactly as polynomials.
  int D = r;
  std::vector<PolyField> base_jets;
  for (const auto& f : x) {
    bool e = true;
    base_jets.push_back(taylor(f, out.anchor_exact, D, &e));
    out.exact = out.exact && e;
  }
  std::vector<std::vector<std::pair<std::size_t, Poly>>> fiber(static_cast<std::size_t>(m));  // (q index, component)
  std::size_t dim = n;
  std::vector<int> in_frame = frame.indices;
  auto is_frame = [&](int j) { return std::find(in_frame.begin(), in_frame.end(), j) != in_frame.end(); };

  auto jets_now = [&]() {
    std::vector<PolyField> jets;
    for (int i = 0; i < m; ++i) {
      PolyField f;
      for (const auto& c : base_jets[static_cast<std::size_t>(i)]) f.push_back(c.extend(dim));
      for (std::size_t k = n; k < dim; ++k) f.push_back(Poly(dim));
      for (const auto& [qi, comp] : fiber[static_cast<std::size_t>(i)])
        f[qi] = comp.extend(dim).truncate(Truncation::ordinary(D));
      jets.push_back(std::move(f));
    }
    return jets;
  };

  std::vector<int> K;
  std::vector<Poly> z_fwd, z_inv;
  for (int s = 1; s <= r; ++s) {
    LiftStep step;
    step.s = s;
    std::size_t prev_dim = dim;
    for (int j = basis.dim(s - 1) + 1; j <= basis.dim(s); ++j) {
      if (is_frame(j)) continue;
      step.added.push_back(j);
      out.fiber_hall.push_back(j);
      int phi = basis.at(j).phi;
      Poly comp = s == 1 ? Poly::constant(dim + step.added.size(), 1)
                         : canonical_monomial(basis, j, z_fwd.size()).compose(z_fwd);
      fiber[static_cast<std::size_t>(phi - 1)].push_back({dim + step.added.size() - 1, comp});
    }
    dim += step.added.size();
    // K^s = H^s plus the frame elements not yet reached.
    K.clear();
    for (int j = 1; j <= basis.dim(s); ++j) K.push_back(j);
    for (int j : in_frame)
      if (basis.at(j).length > s) K.push_back(j);
    std::sort(K.begin(), K.end());
    step.K = K;
    if (K.size() != dim)
      throw Error(ErrorCode::SingularFrame, "frame and fiber counts disagree at step " + std::to_string(s));

    ChartStepInput in;
    auto jets = jets_now();
    in.fields = &jets;
    in.basis = &basis;
    in.frame = K;
    in.s = s;
    in.jet_degree = D;
    if (s == 1) {
      for (std::size_t i = 0; i < dim; ++i) {
        in.zeta_forward.push_back(Poly::variable(dim, i));
        in.zeta_inverse.push_back(Poly::variable(dim, i));
      }
    } else {
      in.zeta_forward = extend_all(z_fwd, dim);
      in.zeta_inverse = extend_all(z_inv, dim);
      for (std::size_t k = prev_dim; k < dim; ++k) {
        in.zeta_forward.push_back(Poly::variable(dim, k));
        in.zeta_inverse.push_back(Poly::variable(dim, k));
      }
    }
    ChartStepResult res = build_chart_step(in);
    z_fwd = res.forward;
    z_inv = res.inverse;
    out.weights = res.weights;
    out.steps.push_back(std::move(step));
  }
  out.dim = static_cast<int>(dim);
  out.chart.forward = z_fwd;
  out.chart.inverse = z_inv;
  out.jets = jets_now();
  out.approx = canonical_fields(m, r);
  out.in_chart = fields_in_chart(out.jets, z_fwd, z_inv, out.weights, r);
  for (int j : out.fiber_hall) out.names.push_back("v" + std::to_string(j));

  RationalVector shift = out.anchor_exact;
  for (int i = 0; i < m; ++i) {
    ExprField f = x[static_cast<std::size_t>(i)];
    f.resize(dim, Expr(0));
    for (const auto& [qi, comp] : fiber[static_cast<std::size_t>(i)]) f[qi] = from_poly_shifted(comp.extend(dim), shift);
    out.xi.push_back(std::move(f));
  }
  return out;
}

GrowthProbe::GrowthProbe(const std::vector<ExprField>& x, const HallBasis& basis) : basis_(basis) {
  auto br = bracket_fields(basis, basis.size(), x);
  std::vector<Expr> flat;
  for (const auto& f : br)
    for (const auto& e : f) flat.push_back(e);
  tape_ = Tape(flat);
}

std::vector<int> GrowthProbe::at(const std::vector<double>& p, double tol) const {
  std::size_t n = p.size();
  std::vector<double> vals(static_cast<std::size_t>(basis_.size()) * n), scratch;
  tape_.eval(p.data(), vals.data(), scratch);
  std::vector<int> out;
  std::vector<std::vector<double>> cols;
  for (int s = 1; s <= basis_.r; ++s) {
    for (int j = basis_.dim(s - 1) + 1; j <= basis_.dim(s); ++j)
      cols.emplace_back(vals.begin() + static_cast<long>(static_cast<std::size_t>(j - 1) * n),
                        vals.begin() + static_cast<long>(static_cast<std::size_t>(j) * n));
    out.push_back(static_cast<int>(float_rank(cols, tol)));
  }
  return out;
}

std::vector<int> growth_vector(const std::vector<ExprField>& x, const HallBasis& basis, const std::vector<double>& p,
                               double tol) {
  return GrowthProbe(x, basis).at(p, tol);
}

}  // namespace nhsteer
