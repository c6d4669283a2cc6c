#include "nhsteer/chart_engine.hpp"

#include <functional>

#include "nhsteer/canonical.hpp"
#include "nhsteer/errors.hpp"

namespace nhsteer {

std::vector<PolyField> bracket_jets(const HallBasis& basis, int count, const std::vector<PolyField>& gens,
                                    const Truncation& t) {
  std::function<PolyField(const PolyField&, const PolyField&)> br = [&t](const PolyField& a, const PolyField& b) {
    return lie_bracket(a, b, t);
  };
  return evaluate_brackets<PolyField>(basis, count, gens, br);
}

Rational derivative_at_zero(const std::vector<const PolyField*>& ops, const std::vector<int>& powers, const Poly& f) {
  int remaining = 0;
  for (int p : powers) remaining += p;
  Poly g = f.truncate(Truncation::ordinary(remaining));
  for (std::size_t idx = ops.size(); idx-- > 0;) {
    for (int k = 0; k < powers[idx]; ++k) {
      --remaining;
      g = apply(*ops[idx], g, Truncation::ordinary(remaining));
      if (g.is_zero()) return 0;
    }
  }
  return g.constant_term();
}

std::vector<Poly> invert_unipotent(const std::vector<Poly>& z_of_x) {
  std::size_t n = z_of_x.size();
  std::vector<Poly> x_of_z;
  std::vector<Poly> subs;
  for (std::size_t i = 0; i < n; ++i) subs.push_back(Poly::variable(n, i));
  for (std::size_t j = 0; j < n; ++j) {
    Poly g = z_of_x[j] - Poly::variable(n, j);
    Poly xj = Poly::variable(n, j) - g.compose(subs);
    subs[j] = xj;
    x_of_z.push_back(xj);
  }
  return x_of_z;
}

namespace {

// All beta over variables [0, nv) with |beta| = k and weight in [.., max_weight].
void multi_indices(std::size_t nv, int k, const Weights& w, int max_weight, std::vector<int>& cur, std::size_t pos,
                   int weight, std::vector<std::vector<int>>& out) {
  if (pos == nv) {
    if (k == 0) out.push_back(cur);
    return;
  }
  for (int b = k; b >= 0; --b) {
    int nw = weight + b * w[pos];
    if (nw > max_weight) continue;
    cur[pos] = b;
    multi_indices(nv, k - b, w, max_weight, cur, pos + 1, nw, out);
  }
  cur[pos] = 0;
}

// Monomials over variables [0, nv) of weighted degree exactly `weight`.
void weighted_monomials(std::size_t nv, const Weights& w, int weight, std::vector<int>& cur, std::size_t pos,
                        std::vector<std::vector<int>>& out) {
  if (pos == nv) {
    if (weight == 0) out.push_back(cur);
    return;
  }
  for (int b = weight / w[pos]; b >= 0; --b) {
    cur[pos] = b;
    weighted_monomials(nv, w, weight - b * w[pos], cur, pos + 1, out);
  }
  cur[pos] = 0;
}

Poly linear_combination(const RationalMatrix& a, std::size_t row, const std::vector<Poly>& v, std::size_t nvars) {
  Poly out(nvars);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (a[row][k] != 0) out += v[k] * a[row][k];
  return out;
}

std::vector<Poly> compose_all(const std::vector<Poly>& outer, const std::vector<Poly>& inner,
                              const Truncation& t = Truncation::none()) {
  std::vector<Poly> out;
  for (const auto& p : outer) out.push_back(p.compose(inner, t));
  return out;
}

}  // namespace

std::vector<PolyField> fields_in_chart(const std::vector<PolyField>& fields, const std::vector<Poly>& forward,
                                       const std::vector<Poly>& inverse, const Weights& w, int max_weight) {
  std::vector<PolyField> out;
  Truncation tq = Truncation::ordinary(max_weight);
  Truncation tz = Truncation::weighted(w, max_weight);
  for (const auto& f : fields) {
    PolyField comp;
    for (const auto& zk : forward) {
      Poly in_q = apply(f, zk.truncate(Truncation::ordinary(max_weight + 1)), tq);
      comp.push_back(in_q.compose(inverse, tz));
    }
    out.push_back(std::move(comp));
  }
  return out;
}

ChartStepResult build_chart_step(const ChartStepInput& in) {
  const HallBasis& basis = *in.basis;
  const auto& gens = *in.fields;
  std::size_t n = in.frame.size();
  if (gens.empty() || gens[0].size() != n || in.zeta_forward.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "chart step: frame size differs from the space dimension");
  int D = in.jet_degree;
  int count = in.frame.back();
  auto brackets = bracket_jets(basis, count, gens, Truncation::ordinary(D));

  ChartStepResult res;
  for (int idx : in.frame) res.weights.push_back(basis.at(idx).length);
  std::size_t nh = 0;
  while (nh < n && res.weights[nh] <= in.s) ++nh;
  for (std::size_t j = 0; j < nh; ++j)
    if (in.frame[j] != static_cast<int>(j) + 1)
      throw Error(ErrorCode::InvalidArgument, "chart step: frame must start with the full Hall basis up to step s");

  // y: d/dy_j equals the frame value at the anchor, expressed in zeta.
  RationalMatrix jac(n, RationalVector(n, 0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      Exponent e(n, 0);
      e[c] = 1;
      jac[r][c] = in.zeta_forward[r].coefficient(e);
    }
  RationalMatrix frame_q(n, RationalVector(n, 0));
  for (std::size_t c = 0; c < n; ++c) {
    const PolyField& b = brackets[static_cast<std::size_t>(in.frame[c] - 1)];
    for (std::size_t r = 0; r < n; ++r) frame_q[r][c] = b[r].constant_term();
  }
  RationalMatrix m = multiply(jac, frame_q);
  try {
    res.y_matrix = inverse(m);
  } catch (const Error&) {
    throw Error(ErrorCode::SingularFrame, "frame is not a basis at the anchor");
  }
  std::vector<Poly> y_of_q;
  for (std::size_t j = 0; j < n; ++j) y_of_q.push_back(linear_combination(res.y_matrix, j, in.zeta_forward, n));

  // z~ by the recursive corrections; derivative coefficients exact at 0.
  std::vector<const PolyField*> ops;
  for (std::size_t l = 0; l < nh; ++l) ops.push_back(&brackets[l]);
  for (std::size_t j = 0; j < n; ++j) {
    Poly f = Poly::variable(n, j);
    std::size_t nv = j < nh ? j : nh;
    int kmax = j < nh ? res.weights[j] - 1 : in.s;
    int wmax = j < nh ? res.weights[j] - 1 : in.s;
    for (int k = 2; k <= kmax; ++k) {
      Poly fq = f.compose(y_of_q, Truncation::ordinary(k));
      std::vector<std::vector<int>> betas;
      std::vector<int> cur(nv, 0);
      multi_indices(nv, k, res.weights, wmax, cur, 0, 0, betas);
      Poly rk(n);
      std::vector<const PolyField*> used(ops.begin(), ops.begin() + static_cast<long>(nv));
      for (const auto& beta : betas) {
        Rational d = derivative_at_zero(used, beta, fq);
        if (d == 0) continue;
        Exponent e(n, 0);
        Rational denom = 1;
        for (std::size_t l = 0; l < nv; ++l) {
          e[l] = beta[l];
          denom *= factorial(beta[l]);
        }
        rk.add_term(e, -d / denom);
      }
      f += rk;
    }
    res.ztilde_of_y.push_back(f);
  }

  std::vector<Poly> ztilde_of_q = compose_all(res.ztilde_of_y, y_of_q);
  RationalMatrix y_inv = m;  // zeta = m * y
  std::vector<Poly> y_of_ztilde = invert_unipotent(res.ztilde_of_y);
  std::vector<Poly> zeta_of_ztilde;
  for (std::size_t j = 0; j < n; ++j) zeta_of_ztilde.push_back(linear_combination(y_inv, j, y_of_ztilde, n));
  std::vector<Poly> q_of_ztilde = compose_all(in.zeta_inverse, zeta_of_ztilde);

  // Psi by identification of the weighted degree w_j - 1 parts.
  int wmax_h = nh ? res.weights[nh - 1] : 1;
  auto chart_fields = fields_in_chart(gens, ztilde_of_q, q_of_ztilde, res.weights, wmax_h);
  std::vector<Poly> placeholder;
  for (std::size_t j = 0; j < n; ++j) placeholder.push_back(Poly::variable(n, j));
  res.psi = placeholder;
  std::size_t m_in = gens.size();
  for (std::size_t j = 0; j < nh; ++j) {
    int wj = res.weights[j];
    int phi = basis.at(static_cast<int>(j) + 1).phi;
    Poly pj = canonical_monomial(basis, static_cast<int>(j) + 1, n).compose(res.psi);
    std::vector<std::vector<int>> alphas;
    if (wj >= 2) {
      std::vector<int> cur(j, 0);
      weighted_monomials(j, res.weights, wj, cur, 0, alphas);
    }
    std::erase_if(alphas, [](const std::vector<int>& a) {
      int d = 0;
      for (int x : a) d += x;
      return d < 2;
    });
    // Row per (input i, monomial); columns per alpha.
    std::map<std::pair<std::size_t, Exponent>, std::size_t> rows;
    std::vector<std::map<std::size_t, Rational>> cols(alphas.size());
    std::map<std::size_t, Rational> rhs;
    auto row_of = [&](std::size_t i, const Exponent& e) {
      auto key = std::make_pair(i, e);
      auto it = rows.find(key);
      if (it != rows.end()) return it->second;
      std::size_t r = rows.size();
      rows.emplace(key, r);
      return r;
    };
    for (std::size_t i = 0; i < m_in; ++i) {
      Poly known = chart_fields[i][j].weighted_part(res.weights, wj - 1);
      Poly target = static_cast<int>(i) + 1 == phi ? pj : Poly(n);
      Poly diff = target - known;
      for (const auto& [e, c] : diff.terms()) rhs[row_of(i, e)] += c;
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        Poly col(n);
        for (std::size_t k = 0; k < j; ++k) {
          if (!alphas[a][k]) continue;
          Exponent e(n, 0);
          for (std::size_t l = 0; l < j; ++l) e[l] = alphas[a][l];
          e[k] -= 1;
          col += Poly::monomial(e, alphas[a][k]) * chart_fields[i][k];
        }
        col = col.weighted_part(res.weights, wj - 1);
        for (const auto& [e, c] : col.terms()) cols[a][row_of(i, e)] += c;
      }
    }
    RationalMatrix a_mat(rows.size(), RationalVector(alphas.size(), 0));
    RationalVector b_vec(rows.size(), 0);
    for (std::size_t a = 0; a < alphas.size(); ++a)
      for (const auto& [r, c] : cols[a]) a_mat[r][a] = c;
    for (const auto& [r, c] : rhs) b_vec[r] = c;
    Poly psi_j = Poly::variable(n, j);
    if (alphas.empty()) {
      for (const auto& b : b_vec)
        if (b != 0)
          throw Error(ErrorCode::IdentificationFailure,
                      "coordinate " + std::to_string(j + 1) + " cannot be brought to canonical form");
    } else {
      SolveResult sol = solve_min_norm(a_mat, b_vec, alphas.size());
      if (sol.status == SolveStatus::Inconsistent)
        throw Error(ErrorCode::IdentificationFailure,
                    "inconsistent identification system for coordinate " + std::to_string(j + 1));
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        if (sol.x[a] == 0) continue;
        Exponent e(n, 0);
        for (std::size_t l = 0; l < j; ++l) e[l] = alphas[a][l];
        psi_j.add_term(e, sol.x[a]);
      }
    }
    res.psi[j] = psi_j;
  }

  res.forward = compose_all(res.psi, ztilde_of_q);
  std::vector<Poly> ztilde_of_z = invert_unipotent(res.psi);
  res.inverse = compose_all(q_of_ztilde, ztilde_of_z);
  return res;
}

int nonholonomic_order(const Poly& f, const std::vector<PolyField>& gens, int max_order) {
  if (f.constant_term() != 0) return 0;
  std::vector<Poly> level{f.truncate(Truncation::ordinary(max_order))};
  for (int k = 1; k <= max_order; ++k) {
    std::vector<Poly> next;
    for (const auto& p : level)
      for (const auto& g : gens) {
        Poly d = apply(g, p, Truncation::ordinary(max_order - k));
        if (d.is_zero()) continue;
        if (d.constant_term() != 0) return k;
        next.push_back(std::move(d));
      }
    level = std::move(next);
    if (level.empty()) break;
  }
  return max_order + 1;
}

bool frame_order_equals(const Poly& f, const std::vector<PolyField>& frame, const Weights& frame_weights,
                        int expected) {
  std::vector<const PolyField*> ops;
  for (const auto& w : frame) ops.push_back(&w);
  std::size_t nv = frame.size();
  bool reached = false;
  for (int k = 0; k <= expected; ++k) {
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(nv, 0);
    multi_indices(nv, k, frame_weights, expected, cur, 0, 0, alphas);
    for (const auto& alpha : alphas) {
      int w = 0;
      for (std::size_t l = 0; l < nv; ++l) w += alpha[l] * frame_weights[l];
      Rational d = derivative_at_zero(ops, alpha, f);
      if (d == 0) continue;
      if (w < expected) return false;
      reached = true;
    }
  }
  return reached;
}

}  // namespace nhsteer
