#pragma once

#include <cmath>
#include <vector>

#include "nhsteer/poly.hpp"

namespace nhsteer {

// sum_j |z_j|^(1/w_j)
inline double pseudo_norm(const std::vector<double>& z, const Weights& w) {
  double s = 0;
  for (std::size_t j = 0; j < z.size(); ++j) s += std::pow(std::abs(z[j]), 1.0 / w[j]);
  return s;
}

// (t^w_1 z_1, ..., t^w_n z_n)
inline std::vector<double> dilate(const std::vector<double>& z, double t, const Weights& w) {
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = std::pow(t, w[j]) * z[j];
  return out;
}

}  // namespace nhsteer
