#pragma once

#include <vector>

#include "nhsteer/hall.hpp"
#include "nhsteer/poly.hpp"

namespace nhsteer {

// Free nilpotent system of step r on R^n, n = dim of the free Lie algebra up to length r.
struct CanonicalSystem {
  int m = 0;
  int r = 0;
  HallBasis basis;
  std::vector<Poly> monomials;  // P_j, index j-1
  std::vector<PolyField> fields;  // D_1..D_m
  Weights weights;

  int dim() const { return basis.size(); }
};

// P_j = v^alpha_j / alpha_j! over n variables.
Poly canonical_monomial(const HallBasis& basis, int j, std::size_t nvars);

CanonicalSystem canonical_fields(int m, int r);

// D_{I_k} computed by bracketing the D fields along the Hall tree.
PolyField canonical_bracket(const CanonicalSystem& sys, int k);
std::vector<PolyField> canonical_brackets(const CanonicalSystem& sys);

struct CanonicalDynamics {
  Poly monomial;  // P_j
  int channel;    // phi(j), 1-based
};

CanonicalDynamics canonical_dynamics(const CanonicalSystem& sys, int j);

}  // namespace nhsteer
