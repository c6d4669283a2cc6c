#include "nhsteer/sim.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace nhsteer {

namespace odeint = boost::numeric::odeint;

DriftlessSystem::DriftlessSystem(const std::vector<ExprField>& fields, std::string id) : id_(std::move(id)) {
  n_ = fields.empty() ? 0 : fields[0].size();
  for (const auto& f : fields) {
    if (f.size() != n_) throw Error(ErrorCode::DimensionMismatch, "fields of different dimension");
    tapes_.emplace_back(f);
  }
}

DriftlessSystem DriftlessSystem::from_poly(const std::vector<PolyField>& fields, std::string id) {
  std::vector<ExprField> ef;
  for (const auto& f : fields) ef.push_back(from_poly_field(f));
  return DriftlessSystem(ef, std::move(id));
}

namespace {

template <class T>
struct Rhs {
  const DriftlessSystem* sys;
  const ControlLaw* law;
  std::size_t period;
  double start;
  void operator()(const std::vector<T>& x, std::vector<T>& dxdt, double t) const {
    std::vector<double> u = law->period_value(period, (t - start) / law->time_scale);
    dxdt.resize(x.size());
    sys->rhs(x.data(), u.data(), dxdt.data());
  }
};

struct DomainStop {};

template <class T>
void integrate_period(const DriftlessSystem& sys, const ControlLaw& u, std::size_t p, std::vector<T>& x,
                      const IntegratorOptions& opts, const std::function<void(const std::vector<T>&, double)>& observe) {
  double d = u.period_duration();
  double t0 = static_cast<double>(p) * d, t1 = t0 + d;
  Rhs<T> rhs{&sys, &u, p, t0};
  // Initial step from the fastest oscillation in the period.
  long wmax = 1;
  for (const auto& ch : u.periods[p].channels)
    for (const auto& s : ch) wmax = std::max(wmax, s.frequency);
  double dt0 = 0.01 * u.time_scale / static_cast<double>(wmax);
  auto obs = [&](const std::vector<T>& s, double t) { observe(s, t); };
  if (opts.fixed_step) {
    odeint::runge_kutta4<std::vector<T>> rk4;
    long steps = std::max(1L, static_cast<long>(std::ceil(d / opts.fixed_dt)));
    double dt = d / static_cast<double>(steps);
    odeint::integrate_n_steps(rk4, rhs, x, t0, dt, static_cast<std::size_t>(steps), obs);
    return;
  }
  odeint::bulirsch_stoer<std::vector<T>> stepper(static_cast<T>(opts.tolerance), static_cast<T>(opts.tolerance));
  odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt0, obs);
}

}  // namespace

Trajectory integrate(const DriftlessSystem& sys, const std::vector<double>& x0, const ControlLaw& u,
                     const IntegratorOptions& opts) {
  if (x0.size() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state has wrong dimension");
  Trajectory traj;
  traj.system_id = sys.id();
  traj.tolerance = opts.tolerance;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  std::vector<double> x = x0;
  auto observe = [&](const std::vector<double>& s, double t) {
    for (double v : s)
      if (!std::isfinite(v)) throw IntegrationError(ErrorCode::StepFailure, "state became non-finite", traj);
    if (opts.inside && !opts.inside(s)) {
      traj.times.push_back(t);
      traj.states.push_back(s);
      traj.status = "domain_exit";
      throw IntegrationError(ErrorCode::DomainExit, "trajectory left the working domain", traj);
    }
    if (t <= traj.times.back()) return;
    if (opts.record) {
      traj.times.push_back(t);
      traj.states.push_back(s);
    }
  };
  for (std::size_t p = 0; p < u.periods.size(); ++p) {
    integrate_period<double>(sys, u, p, x, opts, observe);
    double tb = static_cast<double>(p + 1) * u.period_duration();
    if (traj.times.back() < tb) {
      traj.times.push_back(tb);
      traj.states.push_back(x);
    } else {
      traj.states.back() = x;
    }
  }
  return traj;
}

std::vector<double> integrate_endpoint(const DriftlessSystem& sys, const std::vector<double>& x0,
                                       const ControlLaw& u, const IntegratorOptions& opts) {
  IntegratorOptions o = opts;
  o.record = false;
  return integrate(sys, x0, u, o).back();
}

std::vector<long double> integrate_endpoint_long(const DriftlessSystem& sys, const std::vector<long double>& x0,
                                                 const ControlLaw& u, double tolerance) {
  std::vector<long double> x = x0;
  IntegratorOptions opts;
  opts.tolerance = tolerance;
  auto observe = [](const std::vector<long double>&, double) {};
  for (std::size_t p = 0; p < u.periods.size(); ++p) integrate_period<long double>(sys, u, p, x, opts, observe);
  return x;
}

double input_length(const ControlLaw& u, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0;
  for (std::size_t p = 0; p < u.periods.size(); ++p) {
    auto speed = [&](double tau) {
      std::vector<double> v = u.period_value(p, tau);
      double s = 0;
      for (double c : v) s += c * c;
      return std::sqrt(s);
    };
    // Split the period so each piece holds a bounded number of oscillations.
    long wmax = 1;
    for (const auto& ch : u.periods[p].channels)
      for (const auto& s : ch) wmax = std::max(wmax, s.frequency);
    int pieces = static_cast<int>(std::min<long>(4096, std::max<long>(1, wmax / 4)));
    double h = kTwoPi / pieces;
    double sum = 0;
    for (int k = 0; k < pieces; ++k) {
      double err = 0;
      sum += gauss_kronrod<double, 61>::integrate(speed, k * h, (k + 1) * h, 15, rel_tol, &err);
    }
    // d t = time_scale d tau
    total += sum * u.time_scale;
  }
  return total;
}

ControlLaw reparameterize(const ControlLaw& u, double bound) {
  if (!(bound > 0)) throw Error(ErrorCode::InvalidArgument, "bound must be positive");
  double sup = u.sup_bound();
  if (sup <= bound) return u;
  ControlLaw out = u;
  out.time_scale = u.time_scale * (sup / bound);
  return out;
}

}  // namespace nhsteer
