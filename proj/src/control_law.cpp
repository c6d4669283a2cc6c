#include "nhsteer/control_law.hpp"

#include <cmath>

#include "nhsteer/errors.hpp"

namespace nhsteer {

double Sinusoid::value(double tau) const { return derivative(tau, 0); }

double Sinusoid::derivative(double tau, int k) const {
  // d^k/dtau^k cos(w tau - q pi/2) = w^k cos(w tau - (q - k) pi/2)
  double w = static_cast<double>(frequency);
  if (frequency == 0 && k > 0) return 0;
  double arg = w * tau;
  int q = (((phase - k) % 4) + 4) % 4;
  double trig = 0;
  switch (q) {
    case 0: trig = std::cos(arg); break;
    case 1: trig = std::sin(arg); break;
    case 2: trig = -std::cos(arg); break;
    case 3: trig = -std::sin(arg); break;
  }
  return amplitude * std::pow(w, k) * trig;
}

double Period::value(int channel, double tau) const { return derivative(channel, tau, 0); }

double Period::derivative(int channel, double tau, int k) const {
  double s = 0;
  for (const auto& term : channels.at(static_cast<std::size_t>(channel))) s += term.derivative(tau, k);
  return s;
}

std::vector<double> ControlLaw::period_value(std::size_t p, double tau) const {
  std::vector<double> u(static_cast<std::size_t>(m), 0.0);
  double f = scale / time_scale;
  for (int c = 0; c < m; ++c) u[static_cast<std::size_t>(c)] = f * periods.at(p).value(c, tau);
  return u;
}

std::vector<double> ControlLaw::eval(double t) const {
  if (periods.empty() || t < 0 || t > horizon()) return std::vector<double>(static_cast<std::size_t>(m), 0.0);
  double d = period_duration();
  std::size_t p = static_cast<std::size_t>(std::floor(t / d));
  if (p >= periods.size()) p = periods.size() - 1;
  double tau = (t - static_cast<double>(p) * d) / time_scale;
  return period_value(p, tau);
}

double ControlLaw::sup_bound() const {
  double best = 0;
  for (const auto& period : periods) {
    double s2 = 0;
    for (const auto& ch : period.channels) {
      double s = 0;
      for (const auto& term : ch) s += std::abs(term.amplitude);
      s2 += s * s;
    }
    best = std::max(best, std::sqrt(s2));
  }
  return best * std::abs(scale) / time_scale;
}

ControlLaw ControlLaw::normalized() const {
  ControlLaw out = *this;
  for (auto& period : out.periods)
    for (auto& ch : period.channels)
      for (auto& term : ch) term.amplitude *= scale;
  out.scale = 1.0;
  return out;
}

ControlLaw concatenate(const std::vector<ControlLaw>& laws) {
  ControlLaw out;
  bool first = true;
  for (const auto& law : laws) {
    if (first) {
      out.m = law.m;
      out.time_scale = law.time_scale;
      first = false;
    }
    if (law.empty()) continue;
    if (law.m != out.m || law.time_scale != out.time_scale)
      throw Error(ErrorCode::InvalidArgument, "laws with different channel counts or time scales");
    ControlLaw n = law.normalized();
    out.periods.insert(out.periods.end(), n.periods.begin(), n.periods.end());
  }
  return out;
}

}  // namespace nhsteer
