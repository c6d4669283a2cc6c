#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nhsteer/control_law.hpp"
#include "nhsteer/errors.hpp"
#include "nhsteer/expr.hpp"
#include "nhsteer/poly.hpp"

namespace nhsteer {

// x' = sum_i u_i X_i(x), fields compiled for repeated evaluation.
class DriftlessSystem {
 public:
  DriftlessSystem() = default;
  DriftlessSystem(const std::vector<ExprField>& fields, std::string id = "");
  static DriftlessSystem from_poly(const std::vector<PolyField>& fields, std::string id = "");

  std::size_t dim() const { return n_; }
  std::size_t inputs() const { return tapes_.size(); }
  const std::string& id() const { return id_; }

  template <class T>
  void rhs(const T* x, const double* u, T* dxdt) const;

 private:
  std::size_t n_ = 0;
  std::vector<Tape> tapes_;
  std::string id_;
};

template <class T>
void DriftlessSystem::rhs(const T* x, const double* u, T* dxdt) const {
  thread_local std::vector<T> scratch;
  thread_local std::vector<T> out;
  out.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) dxdt[k] = 0;
  for (std::size_t i = 0; i < tapes_.size(); ++i) {
    if (u[i] == 0) continue;
    tapes_[i].eval(x, out.data(), scratch);
    for (std::size_t k = 0; k < n_; ++k) dxdt[k] += static_cast<T>(u[i]) * out[k];
  }
}

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::string system_id;
  std::string input_id;
  double tolerance = 0;
  std::string status = "ok";

  const std::vector<double>& back() const { return states.back(); }
};

struct IntegratorOptions {
  double tolerance = 1e-10;   // absolute and relative local error
  bool fixed_step = false;    // classical RK4 with fixed_dt
  double fixed_dt = 1e-3;
  bool record = true;         // keep every accepted step, not only boundaries
  std::function<bool(const std::vector<double>&)> inside;  // domain test
};

class IntegrationError : public Error {
 public:
  IntegrationError(ErrorCode code, const std::string& message, Trajectory partial)
      : Error(code, message), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Integrates over the whole horizon of u. States at every period boundary are
// always recorded.
Trajectory integrate(const DriftlessSystem& sys, const std::vector<double>& x0, const ControlLaw& u,
                     const IntegratorOptions& opts = {});
std::vector<double> integrate_endpoint(const DriftlessSystem& sys, const std::vector<double>& x0,
                                       const ControlLaw& u, const IntegratorOptions& opts = {});
// Same scheme in extended precision; used for cross-checks.
std::vector<long double> integrate_endpoint_long(const DriftlessSystem& sys, const std::vector<long double>& x0,
                                                 const ControlLaw& u, double tolerance);

// Length of the input, adaptive Gauss-Kronrod per period.
double input_length(const ControlLaw& u, double rel_tol = 1e-10);

// Uniform time rescaling so that sup_bound() <= bound; the state curve of a
// driftless system is unchanged.
ControlLaw reparameterize(const ControlLaw& u, double bound);

}  // namespace nhsteer
