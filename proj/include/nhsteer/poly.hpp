#pragma once

#include <map>
#include <string>
#include <vector>

#include "nhsteer/rational.hpp"

namespace nhsteer {

using Exponent = std::vector<int>;
using Weights = std::vector<int>;

int total_degree(const Exponent& e);
int weighted_degree(const Exponent& e, const Weights& w);

// Truncation rule for products: keep monomials whose degree (weighted when
// weights are set, ordinary otherwise) is at most max_degree.
struct Truncation {
  int max_degree = -1;  // negative: no truncation
  Weights weights;      // empty: ordinary degree

  static Truncation none() { return {}; }
  static Truncation ordinary(int d) { return {d, {}}; }
  static Truncation weighted(const Weights& w, int d) { return {d, w}; }
  bool active() const { return max_degree >= 0; }
  bool keeps(const Exponent& e) const;
};

// Multivariate polynomial with exact rational coefficients.
class Poly {
 public:
  using Terms = std::map<Exponent, Rational>;

  explicit Poly(std::size_t nvars = 0) : nvars_(nvars) {}
  static Poly constant(std::size_t nvars, const Rational& c);
  static Poly variable(std::size_t nvars, std::size_t i);
  static Poly monomial(const Exponent& e, const Rational& c);

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;
  Rational coefficient(const Exponent& e) const;
  int degree() const;  // -1 for the zero polynomial
  int min_weighted_degree(const Weights& w) const;
  int max_weighted_degree(const Weights& w) const;

  void add_term(const Exponent& e, const Rational& c);

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Rational& c);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
  friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
  friend Poly operator*(const Poly& a, const Poly& b) { return multiply(a, b, Truncation::none()); }
  friend bool operator==(const Poly& a, const Poly& b) { return a.nvars_ == b.nvars_ && a.terms_ == b.terms_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  static Poly multiply(const Poly& a, const Poly& b, const Truncation& t);
  Poly pow(int k, const Truncation& t = Truncation::none()) const;
  Poly diff(std::size_t i) const;

  Rational eval(const RationalVector& x) const;
  double eval(const double* x) const;
  template <class T>
  T eval_as(const T* x) const;

  Poly truncate(const Truncation& t) const;
  Poly weighted_part(const Weights& w, int degree) const;

  // Substitutes subs[i] for variable i; all subs share one variable count.
  Poly compose(const std::vector<Poly>& subs, const Truncation& t = Truncation::none()) const;
  // Appends variables (new ones have exponent 0).
  Poly extend(std::size_t nvars) const;
  // Renames variable i to map[i] in a space of nvars variables.
  Poly remap(const std::vector<std::size_t>& map, std::size_t nvars) const;
  // True when no term involves a variable with index >= k.
  bool depends_only_on_first(std::size_t k) const;

  std::string to_string(const std::vector<std::string>& names) const;
  std::string to_string() const;

 private:
  std::size_t nvars_;
  Terms terms_;
};

template <class T>
T Poly::eval_as(const T* x) const {
  T sum = 0;
  for (const auto& [e, c] : terms_) {
    T term = static_cast<T>(to_long_double(c));
    for (std::size_t i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) term *= x[i];
    sum += term;
  }
  return sum;
}

std::vector<std::string> default_names(std::size_t n, const std::string& prefix);

// Polynomial vector field: component k is the coefficient of d/dx_k.
using PolyField = std::vector<Poly>;

PolyField zero_field(std::size_t n);
PolyField coordinate_field(std::size_t n, std::size_t k);
PolyField add(const PolyField& a, const PolyField& b);
PolyField sub(const PolyField& a, const PolyField& b);
PolyField scale(const PolyField& a, const Rational& c);
bool is_zero(const PolyField& v);
PolyField truncate(const PolyField& v, const Truncation& t);

// V applied to f as a derivation.
Poly apply(const PolyField& v, const Poly& f, const Truncation& t = Truncation::none());
// [V, W] = DW V - DV W.
PolyField lie_bracket(const PolyField& v, const PolyField& w, const Truncation& t = Truncation::none());
std::vector<Rational> eval(const PolyField& v, const RationalVector& x);

// Weighted degree of z^alpha d/dz_j is w(alpha) - w_j.
std::map<int, PolyField> weighted_components(const PolyField& v, const Weights& w);
// Least weighted degree present; returns INT_MAX for the zero field.
int weighted_order(const PolyField& v, const Weights& w);
PolyField weighted_part(const PolyField& v, const Weights& w, int degree);

std::string to_string(const PolyField& v, const std::vector<std::string>& names);

// Triangular polynomial change of coordinates z = forward(x) with stored inverse.
struct TriangularMap {
  std::vector<Poly> forward;
  std::vector<Poly> inverse;

  static TriangularMap identity(std::size_t n);
  std::size_t dim() const { return forward.size(); }
  TriangularMap then(const TriangularMap& next) const;  // next after this
  TriangularMap inverted() const { return {inverse, forward}; }
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_inverse(const std::vector<double>& z) const;
};

// dPhi V evaluated at Phi^{-1}: the field V written in the new coordinates.
PolyField pushforward(const PolyField& v, const TriangularMap& phi, const Truncation& t = Truncation::none());

}  // namespace nhsteer
