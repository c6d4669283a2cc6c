#include "nhsteer/canonical.hpp"

namespace nhsteer {

Poly canonical_monomial(const HallBasis& basis, int j, std::size_t nvars) {
  const HallElement& e = basis.at(j);
  Exponent ex(nvars, 0);
  Rational denom = 1;
  for (std::size_t l = 0; l < e.alpha.size() && l < nvars; ++l) {
    ex[l] = e.alpha[l];
    denom *= factorial(e.alpha[l]);
  }
  return Poly::monomial(ex, Rational(1) / denom);
}

CanonicalSystem canonical_fields(int m, int r) {
  CanonicalSystem sys;
  sys.m = m;
  sys.r = r;
  sys.basis = build_hall_basis(m, r);
  std::size_t n = static_cast<std::size_t>(sys.basis.size());
  sys.weights = sys.basis.free_weights;
  for (int j = 1; j <= sys.basis.size(); ++j) sys.monomials.push_back(canonical_monomial(sys.basis, j, n));
  for (int i = 1; i <= m; ++i) {
    PolyField d = zero_field(n);
    for (int j = 1; j <= sys.basis.size(); ++j) {
      const HallElement& e = sys.basis.at(j);
      if (e.phi == i) d[static_cast<std::size_t>(j - 1)] = sys.monomials[static_cast<std::size_t>(j - 1)];
    }
    sys.fields.push_back(d);
  }
  return sys;
}

std::vector<PolyField> canonical_brackets(const CanonicalSystem& sys) {
  return evaluate_brackets<PolyField>(sys.basis, sys.basis.size(), sys.fields,
                                      [](const PolyField& a, const PolyField& b) { return lie_bracket(a, b); });
}

PolyField canonical_bracket(const CanonicalSystem& sys, int k) {
  return evaluate_bracket<PolyField>(sys.basis, k, sys.fields,
                                     [](const PolyField& a, const PolyField& b) { return lie_bracket(a, b); });
}

CanonicalDynamics canonical_dynamics(const CanonicalSystem& sys, int j) {
  return {sys.monomials.at(static_cast<std::size_t>(j - 1)), sys.basis.at(j).phi};
}

}  // namespace nhsteer
