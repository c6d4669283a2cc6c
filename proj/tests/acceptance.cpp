// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nhsteer/canonical.hpp"
#include "nhsteer/desing.hpp"
#include "nhsteer/hall.hpp"
#include "nhsteer/homogeneous.hpp"
#include "nhsteer/planner.hpp"
#include "nhsteer/privcoord.hpp"
#include "nhsteer/sim.hpp"
#include "nhsteer/steer.hpp"
#include "nhsteer/system_spec.hpp"

using namespace nhsteer;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::vector<double> unit_point(std::mt19937_64& rng, const CanonicalSystem& sys) {
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(sys.dim()));
  for (auto& c : x) c = g(rng);
  return dilate(x, 1.0 / pseudo_norm(x, sys.weights), sys.weights);
}

PolyField poly_bracket(const PolyField& a, const PolyField& b) { return lie_bracket(a, b); }

// Necklace counting: (1/k) sum_{d | k} mu(d) m^(k/d).
long witt(int m, int k) {
  auto mu = [](int n) {
    int res = 1;
    for (int p = 2; p * p <= n; ++p) {
      if (n % p) continue;
      n /= p;
      if (n % p == 0) return 0;
      res = -res;
    }
    return n > 1 ? -res : res;
  };
  long s = 0;
  for (int d = 1; d <= k; ++d)
    if (k % d == 0) s += mu(d) * static_cast<long>(std::llround(std::pow(m, k / d)));
  return s / k;
}

Outcome criterion1() {
  Outcome o;
  int checked = 0;
  for (int m = 1; m <= 3; ++m)
    for (int r = 1; r <= 5; ++r) {
      HallBasis b = build_hall_basis(m, r);
      long total = 0;
      for (int k = 1; k <= r; ++k) {
        total += witt(m, k);
        if (b.level_dims[static_cast<std::size_t>(k - 1)] != total) o.pass = false;
      }
      ++checked;
    }
  o.detail = std::to_string(checked) + " (m,r) pairs against necklace counts";
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (auto [m, r] : std::vector<std::pair<int, int>>{{2, 4}, {3, 3}}) {
    CanonicalSystem sys = canonical_fields(m, r);
    RationalVector zero(static_cast<std::size_t>(sys.dim()), Rational(0));
    auto br = canonical_brackets(sys);
    for (int j = 1; j <= sys.dim(); ++j) {
      auto v = eval(br[static_cast<std::size_t>(j - 1)], zero);
      for (int k = 1; k <= sys.dim(); ++k)
        if (v[static_cast<std::size_t>(k - 1)] != Rational(j == k ? 1 : 0)) o.pass = false;
    }
    HallBasis longer = build_hall_basis(m, r + 1);
    auto all = evaluate_brackets<PolyField>(longer, longer.size(), sys.fields, poly_bracket);
    int vanished = 0;
    for (int j = longer.dim(r) + 1; j <= longer.size(); ++j) {
      if (!is_zero(all[static_cast<std::size_t>(j - 1)])) o.pass = false;
      ++vanished;
    }
    o.detail += "(" + std::to_string(m) + "," + std::to_string(r) + "): " + std::to_string(sys.dim()) +
                " brackets checked, " + std::to_string(vanished) + " of length " + std::to_string(r + 1) +
                " vanish; ";
  }
  return o;
}

// Shared by criteria 3, 4 and 11.
struct SteeringRuns {
  double worst_norm = 0;           // pseudo-norm of the endpoint
  double worst_smaller_change = 0; // non-resonance
  double worst_jump = 0;           // smoothing discontinuity
  std::string per_case;
};

SteeringRuns steering_runs(int smooth) {
  SteeringRuns out;
  std::mt19937_64 rng(2024);
  for (int r : {2, 3, 4}) {
    CanonicalSystem sys = canonical_fields(2, r);
    SteerConfig cfg;
    cfg.plan_smoothing = smooth > 0;
    FrequencyPlan plan = plan_all(sys, cfg);
    DriftlessSystem dyn = DriftlessSystem::from_poly(sys.fields);
    IntegratorOptions io;
    io.tolerance = 1e-10;
    io.record = false;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      auto x0 = unit_point(rng, sys);
      ControlLaw law = exact_steer(x0, sys, plan, {1e-10, smooth});
      Trajectory tr = integrate(dyn, x0, law, io);
      worst = std::max(worst, pseudo_norm(tr.back(), sys.weights));
      // Boundary states: x0 and the end of every period.
      std::vector<std::vector<double>> bounds{x0};
      for (std::size_t p = 1; p <= law.periods.size(); ++p) {
        double tb = static_cast<double>(p) * law.period_duration();
        for (std::size_t s = 0; s < tr.times.size(); ++s)
          if (std::abs(tr.times[s] - tb) <= 1e-9 * std::max(1.0, tb)) {
            bounds.push_back(tr.states[s]);
            break;
          }
      }
      if (bounds.size() != law.periods.size() + 1) out.worst_smaller_change = INFINITY;
      for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
        int cls = plan.classes[p].class_id;
        for (int j = 1; j <= sys.dim(); ++j)
          if (sys.basis.at(j).class_id < cls)
            out.worst_smaller_change = std::max(out.worst_smaller_change,
                                                std::abs(bounds[p + 1][static_cast<std::size_t>(j - 1)] -
                                                         bounds[p][static_cast<std::size_t>(j - 1)]));
      }
      for (std::size_t p = 1; p < law.periods.size(); ++p) {
        auto a = law.eval(static_cast<double>(p) * law.period_duration() * (1 - 1e-15));
        auto left = law.period_value(p - 1, kTwoPi), right = law.period_value(p, 0);
        (void)a;
        for (std::size_t c = 0; c < left.size(); ++c)
          out.worst_jump = std::max(out.worst_jump, law.scale / law.time_scale * std::abs(left[c] - right[c]));
      }
    }
    out.worst_norm = std::max(out.worst_norm, worst);
    out.per_case += "(2," + std::to_string(r) + ") " + fmt(worst) + "; ";
  }
  return out;
}

Outcome criterion5() {
  Outcome o;
  CanonicalSystem sys = canonical_fields(2, 5);
  int cls = 0;
  for (std::size_t c = 0; c < sys.basis.classes.size(); ++c)
    if (sys.basis.at(sys.basis.classes[c][0]).delta == std::vector<int>{3, 2}) cls = static_cast<int>(c) + 1;
  ClassPlan cp = plan_frequencies(sys, cls);
  if (cp.elements.size() != 2) o.pass = false;
  double det = cp.A[0][0] * cp.A[1][1] - cp.A[0][1] * cp.A[1][0];
  if (!(std::abs(det) > 0)) o.pass = false;
  std::vector<double> target{0.5, -0.3};
  Period period = steer_class(target, cp, 2);
  int count = cp.elements.back();

  // Route 1: exact trigonometric propagation of the canonical dynamics.
  auto exact = canonical_trig_solution(sys, period_series(period, 2), {}, count);
  double err_exact = 0, drift_exact = 0;
  for (std::size_t i = 0; i < 2; ++i)
    err_exact = std::max(err_exact, std::abs(static_cast<double>(value_at_full_period(
                                                 exact[static_cast<std::size_t>(cp.elements[i] - 1)])) -
                                             target[i]));
  for (int j = 1; j <= count; ++j)
    if (sys.basis.at(j).class_id < cls)
      drift_exact = std::max(drift_exact,
                             std::abs(static_cast<double>(value_at_full_period(exact[static_cast<std::size_t>(j - 1)]))));

  // Route 2: numerical integration, only when the period is within reach of floating point.
  double amp_max = 0;
  long freq_max = 0;
  for (const auto& ch : period.channels)
    for (const auto& term : ch) {
      amp_max = std::max(amp_max, std::abs(term.amplitude));
      freq_max = std::max(freq_max, term.frequency);
    }
  std::string numeric = "skipped (amplitude " + fmt(amp_max) + ", frequency " + std::to_string(freq_max) + ")";
  if (amp_max < 1e3 && freq_max < 2000) {
    ControlLaw law;
    law.m = 2;
    law.periods = {period};
    IntegratorOptions io;
    io.tolerance = 1e-12;
    io.record = false;
    auto x = integrate_endpoint(DriftlessSystem::from_poly(sys.fields),
                                std::vector<double>(static_cast<std::size_t>(sys.dim()), 0.0), law, io);
    double err_num = 0;
    for (std::size_t i = 0; i < 2; ++i)
      err_num = std::max(err_num, std::abs(x[static_cast<std::size_t>(cp.elements[i] - 1)] - target[i]));
    if (err_num > 1e-6) o.pass = false;
    numeric = fmt(err_num);
  }

  if (err_exact > 1e-6 || drift_exact > 1e-6) o.pass = false;
  std::ostringstream d;
  d << "class " << cls << " = {" << sys.basis.bracket_string(cp.elements[0]) << ", "
    << sys.basis.bracket_string(cp.elements[1]) << "}, |det A| = " << fmt(std::abs(det))
    << ", target error exact " << fmt(err_exact) << ", numerical " << numeric << ", smaller-class drift "
    << fmt(drift_exact) << ", max frequency " << cp.max_frequency();
  o.detail = d.str();
  return o;
}

Outcome criterion6() {
  Outcome o;
  SystemSpec mart = benchmark_system("martinet");
  HallBasis b3 = build_hall_basis(2, 3), b4 = build_hall_basis(2, 4);
  std::vector<double> a{0.0, 0.0, 0.0};
  FrameSelection frame = select_frame(mart.parsed, b3, a);
  LiftedSystem lift = desingularize(mart.parsed, frame, 3);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);

  GrowthProbe probe(lift.xi, b3);
  int good = 0, sampled = 0;
  while (sampled < 100) {
    std::vector<double> p(static_cast<std::size_t>(lift.dim));
    for (auto& c : p) c = u(rng);
    if (!frame.contains(lift.project(p), 0.1)) continue;
    ++sampled;
    if (probe.at(p, 1e-8) == std::vector<int>{2, 3, 5}) ++good;
  }
  if (good != 100) o.pass = false;

  DriftlessSystem base(mart.parsed), up(lift.xi);
  IntegratorOptions io;
  io.tolerance = 1e-12;
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  std::uniform_int_distribution<int> freq(0, 4), phase(0, 3);
  double sup = 0;
  for (int t = 0; t < 20; ++t) {
    ControlLaw law;
    law.m = 2;
    law.time_scale = 0.25;
    for (int p = 0; p < 8; ++p) {
      Period per(2);
      for (auto& ch : per.channels)
        for (int k = 0; k < 2; ++k) ch.push_back({amp(rng), freq(rng), phase(rng)});
      law.periods.push_back(per);
    }
    std::vector<double> x0{u(rng), u(rng), u(rng)};
    Trajectory lifted = lift.project(integrate(up, lift.lift_point(x0), law, io));
    Trajectory direct = integrate(base, x0, law, io);
    // Compare at every period boundary.
    for (std::size_t p = 0; p <= law.periods.size(); ++p) {
      double tb = static_cast<double>(p) * law.period_duration();
      auto at = [&](const Trajectory& tr) {
        std::size_t best = 0;
        for (std::size_t s = 0; s < tr.times.size(); ++s)
          if (std::abs(tr.times[s] - tb) < std::abs(tr.times[best] - tb)) best = s;
        return tr.states[best];
      };
      sup = std::max(sup, max_diff(at(lifted), at(direct)));
    }
  }
  if (sup > 1e-8) o.pass = false;

  auto br = bracket_fields(b4, b4.size(), lift.xi);
  int zero4 = 0;
  for (int j = b3.size() + 1; j <= b4.size(); ++j)
    if (is_identically_zero(br[static_cast<std::size_t>(j - 1)], static_cast<std::size_t>(lift.dim))) ++zero4;
  if (zero4 != b4.size() - b3.size()) o.pass = false;
  o.detail = "lifted dim " + std::to_string(lift.dim) + ", growth (2,3,5) at " + std::to_string(good) +
             "/100 points, projection sup-error " + fmt(sup) + ", " + std::to_string(zero4) + "/" +
             std::to_string(b4.size() - b3.size()) + " length-4 brackets vanish";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  std::ostringstream d;
  for (const auto& name : benchmark_names()) {
    SystemSpec spec = benchmark_system(name);
    int r = spec.step;
    HallBasis basis = build_hall_basis(spec.m, r);
    int ok = 0, min_residual = 1 << 20;
    bool lifted = false;
    for (int t = 0; t < 10; ++t) {
      std::vector<double> a(static_cast<std::size_t>(spec.n));
      for (auto& c : a) c = u(rng);
      if (name == "martinet" && t < 3) a[0] = 0;  // include anchors on the singular locus
      OrderReport rep;
      if (basis.size() == spec.n && growth_vector(spec.parsed, basis, a) == basis.level_dims) {
        ApproxSystem ap = first_order_approx(spec.parsed, a, basis);
        rep = check_orders(ap.jets, basis, ap.chart.map.forward, ap.in_chart, ap.approx);
      } else {
        LiftedSystem lift = desingularize(spec.parsed, select_frame(spec.parsed, basis, a), r);
        rep = check_orders(lift.jets, basis, lift.chart.forward, lift.in_chart, lift.approx);
        lifted = true;
      }
      if (rep.ok()) ++ok;
      else o.pass = false;
      min_residual = std::min(min_residual, rep.residual_min_degree);
    }
    d << name << (lifted ? " (lifted)" : "") << " " << ok << "/10, least residual degree "
      << (min_residual >= (1 << 20) ? std::string("none (exact)") : std::to_string(min_residual)) << "; ";
  }
  o.detail = d.str();
  return o;
}

Outcome criterion8() {
  Outcome o;
  SystemSpec uni = benchmark_system("unicycle");
  FreeSystem sys = FreeSystem::make(uni.parsed, 2);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1), th(-M_PI, M_PI), frac(0.01, 1.0);
  std::normal_distribution<double> g;
  double found = 0;
  double worst_ratio_at_found = 0;
  for (double eps = 1.0; eps >= 1e-4; eps /= 2) {
    bool all = true;
    double worst_ratio = 0;
    for (int t = 0; t < 100 && all; ++t) {
      std::vector<double> a{u(rng), u(rng), th(rng)};
      PrivilegedChart chart = sys.chart_at(a);
      std::vector<double> z{g(rng), g(rng), g(rng)};
      z = dilate(z, frac(rng) * eps / pseudo_norm(z, chart.weights), chart.weights);
      std::vector<double> x = chart.to_x(z);
      double before = pseudo_norm(chart.to_z(x), chart.weights);
      AppSteerResult res = app_steer(x, chart, sys, 1e-12);
      double after = pseudo_norm(chart.to_z(res.x), chart.weights);
      double ratio = before > 0 ? after / before : 0;
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 0.5) all = false;
    }
    if (all) {
      found = eps;
      worst_ratio_at_found = worst_ratio;
      break;
    }
  }
  if (found < 1e-3) o.pass = false;
  o.detail = "largest contracting radius eps = " + fmt(found) + " (worst ratio there " + fmt(worst_ratio_at_found) + ")";
  return o;
}

struct PlanRuns {
  ControlLaw unicycle_law, martinet_law;
};

Outcome criterion9(PlanRuns& keep) {
  Outcome o;
  std::ostringstream d;
  SystemSpec uni = benchmark_system("unicycle");
  FreeSystem free_uni = FreeSystem::make(uni.parsed, 2);
  SystemSpec mart = benchmark_system("martinet");
  BoxGrid grid{{-1, -1, -1}, {1, 1, 1}, 9};
  for (bool modified : {false, true}) {
    PlannerConfig cfg;
    cfg.modified = modified;
    const char* tag = modified ? "modified" : "plain";

    auto t0 = Clock::now();
    PlannerReport rep = global_free({0, 0, 0}, {0, 1, 0}, free_uni, cfg);
    double tu = seconds_since(t0);
    bool bound_ok = true;
    if (modified)
      for (double z : rep.z_norms)
        if (z > rep.k_bound) bound_ok = false;
    bool ok = rep.converged() && rep.z_norms.back() <= cfg.tolerance && bound_ok && tu < 300;
    if (!ok) o.pass = false;
    d << "unicycle " << tag << ": " << rep.status << " in " << rep.loops << " loops, residual "
      << fmt(rep.z_norms.back()) << (modified ? (bound_ok ? ", bound held" : ", bound VIOLATED") : "") << ", "
      << fmt(tu) << " s; ";
    if (!modified) keep.unicycle_law = rep.law();

    t0 = Clock::now();
    GlobalResult res;
    std::string failure;
    try {
      res = global_plan(mart.parsed, 3, {-0.5, 0, 0}, {0.5, 0.2, 0.1}, grid, cfg);
    } catch (const Error& e) {
      failure = e.what();
    }
    double tm = seconds_since(t0);
    bool mbound = true;
    long loops = 0;
    for (const auto& leg : res.report.legs) {
      loops += leg.free.loops;
      if (modified)
        for (double z : leg.free.z_norms)
          if (z > leg.free.k_bound) mbound = false;
    }
    bool mok = failure.empty() && res.report.converged() && res.report.final_residual <= cfg.tolerance && mbound &&
               tm < 300;
    if (!mok) o.pass = false;
    if (!failure.empty()) d << "martinet " << tag << ": error " << failure << "; ";
    else
      d << "martinet " << tag << ": " << res.report.status << ", " << res.report.legs.size() << " legs, " << loops
        << " loops, residual " << fmt(res.report.final_residual) << ", replay " << fmt(res.report.replay_error)
        << (modified ? (mbound ? ", bound held" : ", bound VIOLATED") : "") << ", " << fmt(tm) << " s; ";
    if (!modified) keep.martinet_law = res.law;
  }
  o.detail = d.str();
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(10);
  double worst = 0;
  for (int r : {2, 3, 4}) {
    CanonicalSystem sys = canonical_fields(2, r);
    FrequencyPlan plan = plan_all(sys);
    for (int t = 0; t < 5; ++t) {
      auto x = unit_point(rng, sys);
      double l0 = input_length(exact_steer(x, sys, plan), 1e-13);
      for (double lambda : {0.1, 2.0, 10.0}) {
        double l = input_length(exact_steer(dilate(x, lambda, sys.weights), sys, plan), 1e-13);
        worst = std::max(worst, std::abs(l - lambda * l0) / (lambda * l0));
      }
    }
  }
  if (worst > 1e-10) o.pass = false;
  o.detail = "worst relative deviation " + fmt(worst) + " over (2,2..4), 5 points, lambda in {0.1, 2, 10}";
  return o;
}

Outcome criterion12(const PlanRuns& runs) {
  Outcome o;
  std::ostringstream d;
  IntegratorOptions io;
  io.tolerance = 1e-13;
  io.record = false;
  double worst = 0;
  auto check = [&](const std::string& name, const std::vector<ExprField>& f, const std::vector<double>& x0,
                   const ControlLaw& law) {
    if (law.empty()) {
      o.pass = false;
      d << name << ": no law; ";
      return;
    }
    DriftlessSystem sys(f);
    auto ref = integrate_endpoint(sys, x0, law, io);
    // Halving gives a power-of-two time scale; a factor of three exercises non-aligned steps as well.
    double e = 0;
    for (double factor : {2.0, 3.0}) {
      ControlLaw slow = reparameterize(law, law.sup_bound() / factor);
      if (slow.sup_bound() > law.sup_bound() / factor * (1 + 1e-12)) o.pass = false;
      e = std::max(e, max_diff(ref, integrate_endpoint(sys, x0, slow, io)));
    }
    worst = std::max(worst, e);
    d << name << " " << fmt(e) << "; ";
  };
  check("unicycle plan", benchmark_system("unicycle").parsed, {0, 0, 0}, runs.unicycle_law);
  check("martinet plan", benchmark_system("martinet").parsed, {-0.5, 0, 0}, runs.martinet_law);
  CanonicalSystem c3 = canonical_fields(2, 3);
  std::vector<ExprField> f3;
  for (const auto& v : c3.fields) f3.push_back(from_poly_field(v));
  std::vector<double> x3{0.3, -0.2, 0.1, 0.05, -0.04};
  check("canonical (2,3)", f3, x3, exact_steer(x3, c3, plan_all(c3)));
  if (worst > 1e-9) o.pass = false;
  o.detail = "endpoint change with the bound divided by 2 and 3: " + d.str();
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& title, double limit_s, const std::function<Outcome()>& run) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double s = seconds_since(t0);
    if (limit_s > 0 && s > limit_s) {
      o.pass = false;
      o.detail += " [over the " + fmt(limit_s) + " s budget]";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
  };

  report(1, "Hall dimensions", 1, criterion1);
  report(2, "canonical identities", 10, criterion2);

  SteeringRuns raw, smooth;
  double raw_time = 0;
  report(3, "exact nilpotent steering", 120, [&] {
    auto t0 = Clock::now();
    raw = steering_runs(0);
    raw_time = seconds_since(t0);
    Outcome o;
    o.pass = raw.worst_norm <= 1e-6;
    o.detail = "worst endpoint pseudo-norm per case: " + raw.per_case + "bound 1e-6";
    return o;
  });
  report(4, "non-resonance", 0, [&] {
    Outcome o;
    o.pass = raw_time > 0 && raw.worst_smaller_change <= 1e-8;
    o.detail = "worst smaller-class change over a class period " + fmt(raw.worst_smaller_change) + " (same runs)";
    return o;
  });
  report(5, "multi-element class", 300, criterion5);
  report(6, "desingularization", 60, criterion6);
  report(7, "privileged-coordinate orders", 60, criterion7);
  report(8, "contraction", 0, criterion8);
  PlanRuns runs;
  report(9, "global termination", 600, [&] { return criterion9(runs); });
  report(10, "homogeneity", 0, criterion10);
  report(11, "smoothing", 0, [&] {
    smooth = steering_runs(1);
    Outcome o;
    o.pass = smooth.worst_jump <= 1e-12 && smooth.worst_norm <= 1e-6;
    o.detail = "worst input jump " + fmt(smooth.worst_jump) + "; worst endpoint pseudo-norm per case: " +
               smooth.per_case + "bound 1e-6";
    return o;
  });
  report(12, "reparameterization", 0, [&] { return criterion12(runs); });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
