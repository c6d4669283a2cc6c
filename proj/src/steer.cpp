#include "nhsteer/steer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <algorithm>
#include <functional>
#include <numbers>
#include <random>

#include "nhsteer/errors.hpp"
#include "nhsteer/homogeneous.hpp"

namespace nhsteer {

long ClassPlan::max_frequency() const {
  long w = 0;
  for (const auto& g : basic)
    for (const auto& ch : g)
      for (long f : ch) w = std::max(w, f);
  for (long f : resonance) w = std::max(w, f);
  for (long f : correction) w = std::max(w, f);
  return w;
}

Period ClassPlan::period(const std::vector<double>& amplitudes, int m) const {
  Period p(m);
  if (generator) {
    p.channels[static_cast<std::size_t>(resonance_channel - 1)].push_back({amplitudes.at(0), 0, 0});
    return p;
  }
  for (std::size_t g = 0; g < basic.size(); ++g) {
    for (int c = 0; c < m; ++c)
      for (long f : basic[g][static_cast<std::size_t>(c)]) p.channels[static_cast<std::size_t>(c)].push_back({1.0, f, 0});
    p.channels[static_cast<std::size_t>(resonance_channel - 1)].push_back({amplitudes.at(g), resonance[g], parity});
  }
  return p;
}

std::vector<ExactTrig> period_series(const Period& p, int m, const Rational& scale) {
  std::vector<ExactTrig> out(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c)
    for (const auto& s : p.channels[static_cast<std::size_t>(c)])
      out[static_cast<std::size_t>(c)] += ExactTrig::cosine(from_double(s.amplitude) * scale, s.frequency, s.phase);
  return out;
}

std::vector<ExactTrig> canonical_trig_solution(const CanonicalSystem& sys, const std::vector<ExactTrig>& inputs,
                                               const RationalVector& v0, int count) {
  std::vector<ExactTrig> v;
  std::map<std::pair<int, int>, ExactTrig> powers;  // (index, exponent) -> v_index^exponent
  std::function<const ExactTrig&(int, int)> power = [&](int l, int k) -> const ExactTrig& {
    auto key = std::make_pair(l, k);
    auto it = powers.find(key);
    if (it != powers.end()) return it->second;
    ExactTrig s = k == 1 ? v[static_cast<std::size_t>(l - 1)] : power(l, k - 1) * v[static_cast<std::size_t>(l - 1)];
    return powers.emplace(key, std::move(s)).first->second;
  };
  for (int j = 1; j <= count; ++j) {
    const HallElement& e = sys.basis.at(j);
    ExactTrig rhs = inputs.at(static_cast<std::size_t>(e.phi - 1));
    Rational denom = 1;
    for (int l = 1; l < j; ++l) {
      int k = e.alpha[static_cast<std::size_t>(l - 1)];
      if (!k) continue;
      rhs = rhs * power(l, k);
      denom *= factorial(k);
    }
    ExactTrig vj = rhs.integrate() * (Rational(1) / denom);
    Rational init = j - 1 < static_cast<int>(v0.size()) ? v0[static_cast<std::size_t>(j - 1)] : Rational(0);
    if (init != 0) vj += ExactTrig::constant(init);
    v.push_back(std::move(vj));
  }
  return v;
}

long double value_at_full_period(const ExactTrig& s) {
  long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double total = 0;
  for (const auto& [p, c] : s.at_full_period()) total += to_long_double(c) * std::pow(two_pi, p);
  return total;
}

namespace {

Rational generic_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(1, 97), den(2, 89);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return std::bernoulli_distribution(0.5)(rng) ? q : Rational(-q);
}

// Period input with rational amplitudes on the resonance channel.
std::vector<ExactTrig> exact_period(const ClassPlan& plan, int m, const RationalVector& a,
                                    const std::vector<long>& correction, const RationalVector& corr_amp) {
  std::vector<ExactTrig> in(static_cast<std::size_t>(m));
  std::size_t rc = static_cast<std::size_t>(plan.resonance_channel - 1);
  if (plan.generator) {
    in[rc] += ExactTrig::constant(a[0]);
  } else {
    for (std::size_t g = 0; g < plan.basic.size(); ++g) {
      for (int c = 0; c < m; ++c)
        for (long f : plan.basic[g][static_cast<std::size_t>(c)]) in[static_cast<std::size_t>(c)] += ExactTrig::cosine(1, f, 0);
      in[rc] += ExactTrig::cosine(a[g], plan.resonance[g], plan.parity);
    }
  }
  for (std::size_t c = 0; c < correction.size(); ++c)
    if (correction[c] > 0) in[c] += ExactTrig::cosine(corr_amp[c], correction[c], 0);
  return in;
}

struct Propagated {
  RationalVector class_disp;  // displacement / 2 pi of the class elements
  bool affine = true;         // no t^p, p >= 2 in class elements
  bool smaller_periodic = true;
};

Propagated propagate(const CanonicalSystem& sys, const ClassPlan& plan, const std::vector<ExactTrig>& inputs) {
  int len = sys.basis.at(plan.elements.back()).length;
  int count = sys.basis.dim(len);
  auto v = canonical_trig_solution(sys, inputs, {}, count);
  Propagated out;
  for (int j = 1; j <= count; ++j) {
    const HallElement& e = sys.basis.at(j);
    const ExactTrig& s = v[static_cast<std::size_t>(j - 1)];
    if (e.class_id < plan.class_id) {
      if (s.has_secular_terms()) out.smaller_periodic = false;
    } else if (e.class_id == plan.class_id) {
      auto at = s.at_full_period();
      Rational c1 = 0;
      for (const auto& [p, c] : at) {
        if (p == 1) c1 = c;
        else out.affine = false;  // p = 0 sums to zero by construction; higher powers break affinity
      }
      out.class_disp.push_back(c1);
    }
  }
  return out;
}

}  // namespace

ControlMatrixAudit control_matrix(const CanonicalSystem& sys, const ClassPlan& plan, std::uint64_t seed,
                                  const std::vector<long>& correction) {
  int m = sys.m;
  std::size_t n_el = plan.elements.size();
  std::size_t groups = plan.generator ? 1 : plan.basic.size();
  std::mt19937_64 rng(seed);
  RationalVector corr_amp(static_cast<std::size_t>(m), 0);
  for (auto& c : corr_amp) c = generic_rational(rng);
  ControlMatrixAudit audit;
  audit.displacement_per_2pi.assign(n_el, RationalVector(groups, 0));
  auto check = [&](const Propagated& p, const std::string& label) {
    if (!p.smaller_periodic) {
      audit.non_resonant = false;
      audit.detail += label + ": smaller class drifts; ";
    }
    if (!p.affine) {
      audit.affine_ok = false;
      audit.detail += label + ": class displacement not affine; ";
    }
  };
  // b = displacement at zero amplitude must vanish.
  RationalVector zero(groups, 0);
  Propagated p0 = propagate(sys, plan, exact_period(plan, m, zero, correction, corr_amp));
  check(p0, "a=0");
  for (const auto& d : p0.class_disp)
    if (d != 0) {
      audit.affine_ok = false;
      audit.detail += "a=0: nonzero drift; ";
      break;
    }
  for (std::size_t g = 0; g < groups; ++g) {
    RationalVector a(groups, 0);
    a[g] = 1;
    Propagated pg = propagate(sys, plan, exact_period(plan, m, a, correction, corr_amp));
    check(pg, "column " + std::to_string(g + 1));
    for (std::size_t i = 0; i < n_el; ++i) audit.displacement_per_2pi[i][g] = pg.class_disp[i];
  }
  // Generic amplitudes: displacement must equal the linear prediction.
  RationalVector ar(groups);
  for (auto& x : ar) x = generic_rational(rng);
  Propagated pr = propagate(sys, plan, exact_period(plan, m, ar, correction, corr_amp));
  check(pr, "generic");
  RationalVector predicted = multiply(audit.displacement_per_2pi, ar);
  if (predicted != pr.class_disp) {
    audit.affine_ok = false;
    audit.detail += "generic: displacement not linear in amplitudes; ";
  }
  return audit;
}

namespace {

void build_chain(ClassPlan& plan, int m, long spacing) {
  const auto& delta = plan.delta;
  int rc = plan.resonance_channel;
  std::size_t groups = plan.elements.size();
  plan.basic.assign(groups, std::vector<std::vector<long>>(static_cast<std::size_t>(m)));
  plan.resonance.assign(groups, 0);
  std::vector<long> prev_last(static_cast<std::size_t>(m), 0);
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<long> last(static_cast<std::size_t>(m), 0);
    bool first_in_group = true;
    long sum = 0;
    for (int c = 1; c <= m; ++c) {
      long dc = delta[static_cast<std::size_t>(c - 1)];
      long count = dc - (c == rc ? 1 : 0);
      for (long i = 0; i < count; ++i) {
        long lower = 0;
        if (first_in_group) {
          for (int c2 = 1; c2 <= m; ++c2) lower += delta[static_cast<std::size_t>(c2 - 1)] * prev_last[static_cast<std::size_t>(c2 - 1)];
        } else {
          for (int c2 = 1; c2 < c; ++c2) lower += delta[static_cast<std::size_t>(c2 - 1)] * last[static_cast<std::size_t>(c2 - 1)];
          if (i > 0) lower += dc * last[static_cast<std::size_t>(c - 1)];
        }
        long w = (g == 0 && first_in_group) ? 1 : spacing * lower + 1;
        plan.basic[g][static_cast<std::size_t>(c - 1)].push_back(w);
        last[static_cast<std::size_t>(c - 1)] = w;
        sum += w;
        first_in_group = false;
      }
    }
    plan.resonance[g] = sum;
    prev_last = last;
  }
}

double det_ratio(const RationalMatrix& q) {
  std::size_t n = q.size();
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q[i][j].get_d();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double c = a.col(j).norm();
    if (c == 0) return 0;
    a.col(j) /= c;
  }
  double rows = 1;
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows *= a.row(i).norm();
  if (rows == 0) return 0;
  return std::abs(a.determinant()) / rows;
}

void finalize_matrices(ClassPlan& plan) {
  std::size_t n = plan.displacement_per_2pi.size();
  RationalMatrix qinv = inverse(plan.displacement_per_2pi);
  plan.A.assign(n, std::vector<double>(n, 0));
  plan.B.assign(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      plan.A[i][j] = kTwoPi * plan.displacement_per_2pi[i][j].get_d();
      plan.B[i][j] = qinv[i][j].get_d() / kTwoPi;
    }
}

bool choose_correction(const CanonicalSystem& sys, ClassPlan& plan, std::uint64_t seed) {
  int m = sys.m;
  long base = plan.max_frequency() + 1;
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  for (int attempt = 0; attempt < 64; ++attempt) {
    long hi = base * (4L << (attempt / 16));
    std::uniform_int_distribution<long> pick(base, hi);
    std::vector<long> corr;
    while (corr.size() < static_cast<std::size_t>(m)) {
      long w = pick(rng);
      if (std::find(corr.begin(), corr.end(), w) == corr.end()) corr.push_back(w);
    }
    ControlMatrixAudit audit = control_matrix(sys, plan, seed + 1, corr);
    if (audit.non_resonant && audit.affine_ok && audit.displacement_per_2pi == plan.displacement_per_2pi) {
      plan.correction = corr;
      return true;
    }
  }
  return false;
}

}  // namespace

ClassPlan plan_frequencies(const CanonicalSystem& sys, int class_id, const SteerConfig& cfg) {
  const auto& classes = sys.basis.classes;
  if (class_id < 1 || class_id > static_cast<int>(classes.size()))
    throw Error(ErrorCode::InvalidArgument, "class id out of range");
  ClassPlan plan;
  plan.class_id = class_id;
  plan.elements = classes[static_cast<std::size_t>(class_id - 1)];
  const HallElement& first = sys.basis.at(plan.elements.front());
  plan.delta = first.delta;
  int m = sys.m;
  if (first.is_generator()) {
    plan.generator = true;
    plan.resonance_channel = first.generator;
    plan.displacement_per_2pi = {{Rational(1)}};
    plan.resonance = {0};
    plan.det_ratio = 1;
    finalize_matrices(plan);
    if (cfg.plan_smoothing && !choose_correction(sys, plan, cfg.seed))
      throw Error(ErrorCode::SearchBudgetExhausted, "no junction frequencies found for generator class");
    return plan;
  }
  for (int c = m; c >= 1; --c)
    if (plan.delta[static_cast<std::size_t>(c - 1)] > 0) {
      plan.resonance_channel = c;
      break;
    }
  plan.parity = (first.length - 1) % 2;
  std::string last_failure;
  auto accept = [&]() {
    ControlMatrixAudit audit = control_matrix(sys, plan, cfg.seed);
    if (!audit.non_resonant || !audit.affine_ok) {
      last_failure = audit.detail;
      return false;
    }
    double ratio = det_ratio(audit.displacement_per_2pi);
    if (!(ratio >= cfg.det_threshold)) {
      last_failure = "determinant ratio " + std::to_string(ratio) + " below threshold";
      return false;
    }
    plan.displacement_per_2pi = audit.displacement_per_2pi;
    plan.det_ratio = ratio;
    finalize_matrices(plan);
    if (cfg.plan_smoothing && !choose_correction(sys, plan, cfg.seed)) {
      last_failure = "no non-resonant junction frequencies";
      return false;
    }
    return true;
  };
  long spacing = 1;
  for (int attempt = 0; attempt <= cfg.max_spacing_doublings; ++attempt, spacing *= 2) {
    plan.spacing = spacing;
    build_chain(plan, m, spacing);
    if (accept()) return plan;
  }
  // The chain keeps the same frequency ratios in every group, which can leave
  // the columns of A nearly parallel; fall back to random integer sets.
  std::mt19937_64 rng(cfg.seed);
  std::size_t groups = plan.elements.size();
  long per_group = 0;
  for (int d : plan.delta) per_group += d;
  for (int attempt = 0; attempt < cfg.random_candidates; ++attempt) {
    plan.spacing = 0;
    long hi = 2 * per_group * static_cast<long>(groups) * (1L << (attempt / 16));
    std::uniform_int_distribution<long> pick(1, hi);
    plan.basic.assign(groups, std::vector<std::vector<long>>(static_cast<std::size_t>(m)));
    plan.resonance.assign(groups, 0);
    for (std::size_t g = 0; g < groups; ++g)
      for (int c = 1; c <= m; ++c) {
        long count = plan.delta[static_cast<std::size_t>(c - 1)] - (c == plan.resonance_channel ? 1 : 0);
        for (long i = 0; i < count; ++i) {
          long w = pick(rng);
          plan.basic[g][static_cast<std::size_t>(c - 1)].push_back(w);
          plan.resonance[g] += w;
        }
      }
    if (accept()) return plan;
  }
  throw Error(ErrorCode::SearchBudgetExhausted,
              "frequency search exhausted for class " + std::to_string(class_id) + ": " + last_failure);
}

FrequencyPlan plan_all(const CanonicalSystem& sys, const SteerConfig& cfg) {
  FrequencyPlan plan;
  plan.m = sys.m;
  plan.r = sys.r;
  for (int c = 1; c <= static_cast<int>(sys.basis.classes.size()); ++c) plan.classes.push_back(plan_frequencies(sys, c, cfg));
  return plan;
}

Period steer_class(const std::vector<double>& delta, const ClassPlan& plan, int m) {
  std::size_t n = plan.B.size();
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i] += plan.B[i][j] * delta.at(j);
  return plan.period(a, m);
}

void match_start(Period& next, const std::vector<double>& target, const std::vector<long>& correction) {
  for (std::size_t c = 0; c < next.channels.size(); ++c) {
    double gap = target[c] - next.value(static_cast<int>(c), 0.0);
    if (gap == 0) continue;
    if (c >= correction.size() || correction[c] <= 0)
      throw Error(ErrorCode::InvalidArgument, "plan has no junction frequencies; plan with smoothing enabled");
    next.channels[c].push_back({gap, correction[c], 0});
  }
}

ControlLaw smooth_concatenate(const std::vector<Period>& periods, int m, const FrequencyPlan& plan, int k) {
  ControlLaw law;
  law.m = m;
  law.periods = periods;
  if (k <= 0) return law;
  for (std::size_t p = 1; p < law.periods.size(); ++p) {
    const ClassPlan& cp = plan.classes.at(p % plan.classes.size());
    std::vector<double> target(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) target[static_cast<std::size_t>(c)] = law.periods[p - 1].value(c, kTwoPi);
    match_start(law.periods[p], target, cp.correction);
  }
  return law;
}

ControlLaw exact_steer(const std::vector<double>& x_init, const CanonicalSystem& sys, const FrequencyPlan& plan,
                       const ExactSteerOptions& opts) {
  ControlLaw law;
  law.m = sys.m;
  double lambda = pseudo_norm(x_init, sys.weights);
  if (lambda == 0) return law;
  std::vector<double> x = dilate(x_init, 1.0 / lambda, sys.weights);
  static thread_local std::map<std::pair<int, int>, DriftlessSystem> cache;
  auto key = std::make_pair(sys.m, sys.r);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, DriftlessSystem::from_poly(sys.fields, "canonical")).first;
  const DriftlessSystem& canon = it->second;
  IntegratorOptions io;
  io.tolerance = opts.tolerance;
  io.record = false;
  for (const ClassPlan& cp : plan.classes) {
    std::vector<double> delta;
    for (int j : cp.elements) delta.push_back(-x[static_cast<std::size_t>(j - 1)]);
    Period period = steer_class(delta, cp, sys.m);
    if (opts.smooth > 0 && !law.periods.empty()) {
      std::vector<double> target(static_cast<std::size_t>(sys.m));
      for (int c = 0; c < sys.m; ++c) target[static_cast<std::size_t>(c)] = law.periods.back().value(c, kTwoPi);
      match_start(period, target, cp.correction);
    }
    ControlLaw one;
    one.m = sys.m;
    one.periods.push_back(period);
    x = integrate_endpoint(canon, x, one, io);
    law.periods.push_back(period);
  }
  law.scale = lambda;
  return law;
}

}  // namespace nhsteer
