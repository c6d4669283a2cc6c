#pragma once

#include <numbers>
#include <vector>

namespace nhsteer {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// amplitude * cos(frequency * tau - phase * pi/2) in period-local time tau.
struct Sinusoid {
  double amplitude = 0;
  long frequency = 0;
  int phase = 0;

  double value(double tau) const;
  // k-th derivative with respect to tau.
  double derivative(double tau, int k) const;
};

struct Period {
  std::vector<std::vector<Sinusoid>> channels;

  explicit Period(int m = 0) : channels(static_cast<std::size_t>(m)) {}
  double value(int channel, double tau) const;
  double derivative(int channel, double tau, int k) const;
};

// Piecewise trigonometric input. Every period lasts 2 pi * time_scale and the
// realized input is (scale / time_scale) * sum of the period's sinusoids
// evaluated at tau = (t - start) / time_scale.
struct ControlLaw {
  int m = 0;
  std::vector<Period> periods;
  double scale = 1.0;
  double time_scale = 1.0;

  double period_duration() const { return kTwoPi * time_scale; }
  double horizon() const { return period_duration() * static_cast<double>(periods.size()); }
  bool empty() const { return periods.empty(); }

  // Value on period p at local time tau in [0, 2 pi].
  std::vector<double> period_value(std::size_t p, double tau) const;
  // Right-continuous evaluation at absolute time t; t = horizon uses the last period.
  std::vector<double> eval(double t) const;
  // Sum of absolute amplitudes per channel combined in the Euclidean norm:
  // an upper bound on sup_t |u(t)|.
  double sup_bound() const;
  // Moves scale into the amplitudes.
  ControlLaw normalized() const;
};

// Joins laws period by period. Laws must share time_scale.
ControlLaw concatenate(const std::vector<ControlLaw>& laws);

}  // namespace nhsteer
