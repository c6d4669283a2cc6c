#include "nhsteer/poly.hpp"

#include <climits>
#include <sstream>

#include "nhsteer/errors.hpp"

namespace nhsteer {

int total_degree(const Exponent& e) {
  int d = 0;
  for (int k : e) d += k;
  return d;
}

int weighted_degree(const Exponent& e, const Weights& w) {
  int d = 0;
  for (std::size_t i = 0; i < e.size(); ++i) d += e[i] * w[i];
  return d;
}

bool Truncation::keeps(const Exponent& e) const {
  if (max_degree < 0) return true;
  int d = weights.empty() ? total_degree(e) : weighted_degree(e, weights);
  return d <= max_degree;
}

Poly Poly::constant(std::size_t nvars, const Rational& c) {
  Poly p(nvars);
  if (c != 0) p.terms_[Exponent(nvars, 0)] = c;
  return p;
}

Poly Poly::variable(std::size_t nvars, std::size_t i) {
  Exponent e(nvars, 0);
  e[i] = 1;
  return monomial(e, 1);
}

Poly Poly::monomial(const Exponent& e, const Rational& c) {
  Poly p(e.size());
  if (c != 0) p.terms_[e] = c;
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
}

Rational Poly::constant_term() const { return coefficient(Exponent(nvars_, 0)); }

Rational Poly::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

int Poly::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
  return d;
}

int Poly::min_weighted_degree(const Weights& w) const {
  int d = INT_MAX;
  for (const auto& [e, c] : terms_) d = std::min(d, weighted_degree(e, w));
  return d;
}

int Poly::max_weighted_degree(const Weights& w) const {
  int d = INT_MIN;
  for (const auto& [e, c] : terms_) d = std::max(d, weighted_degree(e, w));
  return d;
}

void Poly::add_term(const Exponent& e, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly p = *this;
  for (auto& [e, c] : p.terms_) c = -c;
  return p;
}

Poly& Poly::operator+=(const Poly& o) {
  if (nvars_ != o.nvars_) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    throw Error(ErrorCode::DimensionMismatch, "polynomial variable counts differ");
  }
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (nvars_ != o.nvars_) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = -o;
    throw Error(ErrorCode::DimensionMismatch, "polynomial variable counts differ");
  }
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Poly& Poly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

Poly Poly::multiply(const Poly& a, const Poly& b, const Truncation& t) {
  if (a.is_zero() || b.is_zero()) return Poly(std::max(a.nvars_, b.nvars_));
  if (a.nvars_ != b.nvars_) throw Error(ErrorCode::DimensionMismatch, "polynomial variable counts differ");
  Poly p(a.nvars_);
  Exponent e(a.nvars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      if (!t.keeps(e)) continue;
      p.add_term(e, ca * cb);
    }
  }
  return p;
}

Poly Poly::pow(int k, const Truncation& t) const {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "negative polynomial power");
  Poly result = constant(nvars_, 1).truncate(t);
  Poly base = truncate(t);
  while (k > 0) {
    if (k & 1) result = multiply(result, base, t);
    k >>= 1;
    if (k) base = multiply(base, base, t);
  }
  return result;
}

Poly Poly::diff(std::size_t i) const {
  Poly p(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponent f = e;
    f[i] -= 1;
    p.add_term(f, c * e[i]);
  }
  return p;
}

Rational Poly::eval(const RationalVector& x) const {
  Rational sum = 0;
  for (const auto& [e, c] : terms_) {
    Rational term = c;
    for (std::size_t i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) term *= x[i];
    sum += term;
  }
  return sum;
}

double Poly::eval(const double* x) const {
  double sum = 0;
  for (const auto& [e, c] : terms_) {
    double term = c.get_d();
    for (std::size_t i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) term *= x[i];
    sum += term;
  }
  return sum;
}

Poly Poly::truncate(const Truncation& t) const {
  if (!t.active()) return *this;
  Poly p(nvars_);
  for (const auto& [e, c] : terms_)
    if (t.keeps(e)) p.terms_.emplace_hint(p.terms_.end(), e, c);
  return p;
}

Poly Poly::weighted_part(const Weights& w, int degree) const {
  Poly p(nvars_);
  for (const auto& [e, c] : terms_)
    if (weighted_degree(e, w) == degree) p.terms_.emplace_hint(p.terms_.end(), e, c);
  return p;
}

Poly Poly::compose(const std::vector<Poly>& subs, const Truncation& t) const {
  if (subs.size() != nvars_) throw Error(ErrorCode::DimensionMismatch, "substitution arity differs");
  std::size_t out_vars = nvars_ ? subs[0].nvars() : 0;
  for (const auto& s : subs)
    if (!s.is_zero()) out_vars = s.nvars();
  std::vector<int> max_pow(nvars_, 0);
  for (const auto& [e, c] : terms_)
    for (std::size_t i = 0; i < nvars_; ++i) max_pow[i] = std::max(max_pow[i], e[i]);
  std::vector<std::vector<Poly>> powers(nvars_);
  for (std::size_t i = 0; i < nvars_; ++i) {
    powers[i].push_back(constant(out_vars, 1));
    Poly si = subs[i].is_zero() ? Poly(out_vars) : subs[i].truncate(t);
    for (int k = 1; k <= max_pow[i]; ++k) powers[i].push_back(multiply(powers[i].back(), si, t));
  }
  Poly result(out_vars);
  for (const auto& [e, c] : terms_) {
    Poly term = constant(out_vars, c);
    for (std::size_t i = 0; i < nvars_ && !term.is_zero(); ++i)
      if (e[i]) term = multiply(term, powers[i][e[i]], t);
    result += term;
  }
  return result;
}

Poly Poly::extend(std::size_t nvars) const {
  Poly p(nvars);
  for (const auto& [e, c] : terms_) {
    Exponent f(nvars, 0);
    std::copy(e.begin(), e.end(), f.begin());
    p.terms_.emplace(f, c);
  }
  return p;
}

Poly Poly::remap(const std::vector<std::size_t>& map, std::size_t nvars) const {
  Poly p(nvars);
  for (const auto& [e, c] : terms_) {
    Exponent f(nvars, 0);
    for (std::size_t i = 0; i < e.size(); ++i) f[map[i]] += e[i];
    p.add_term(f, c);
  }
  return p;
}

bool Poly::depends_only_on_first(std::size_t k) const {
  for (const auto& [e, c] : terms_)
    for (std::size_t i = k; i < e.size(); ++i)
      if (e[i]) return false;
  return true;
}

std::vector<std::string> default_names(std::size_t n, const std::string& prefix) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

std::string Poly::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  // Print higher degrees last so constants lead.
  std::vector<std::pair<Exponent, Rational>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return total_degree(a.first) < total_degree(b.first);
  });
  for (const auto& [e, c] : ordered) {
    Rational mag = abs(c);
    bool unit = mag == 1 && total_degree(e) > 0;
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (!unit) out << mag.get_str();
    bool need_star = !unit;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      if (need_star) out << "*";
      out << names[i];
      if (e[i] > 1) out << "^" << e[i];
      need_star = true;
    }
  }
  return out.str();
}

std::string Poly::to_string() const { return to_string(default_names(nvars_, "x")); }

PolyField zero_field(std::size_t n) { return PolyField(n, Poly(n)); }

PolyField coordinate_field(std::size_t n, std::size_t k) {
  PolyField v = zero_field(n);
  v[k] = Poly::constant(n, 1);
  return v;
}

PolyField add(const PolyField& a, const PolyField& b) {
  PolyField c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

PolyField sub(const PolyField& a, const PolyField& b) {
  PolyField c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

PolyField scale(const PolyField& a, const Rational& s) {
  PolyField c = a;
  for (auto& p : c) p *= s;
  return c;
}

bool is_zero(const PolyField& v) {
  for (const auto& p : v)
    if (!p.is_zero()) return false;
  return true;
}

PolyField truncate(const PolyField& v, const Truncation& t) {
  PolyField c;
  for (const auto& p : v) c.push_back(p.truncate(t));
  return c;
}

Poly apply(const PolyField& v, const Poly& f, const Truncation& t) {
  std::size_t n = v.size();
  Poly out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i].is_zero()) continue;
    Poly d = f.diff(i);
    if (d.is_zero()) continue;
    out += Poly::multiply(v[i], d, t);
  }
  return out;
}

PolyField lie_bracket(const PolyField& v, const PolyField& w, const Truncation& t) {
  PolyField out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(apply(v, w[k], t) - apply(w, v[k], t));
  return out;
}

std::vector<Rational> eval(const PolyField& v, const RationalVector& x) {
  std::vector<Rational> out;
  for (const auto& p : v) out.push_back(p.eval(x));
  return out;
}

std::map<int, PolyField> weighted_components(const PolyField& v, const Weights& w) {
  std::map<int, PolyField> parts;
  std::size_t n = v.size();
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& [e, c] : v[j].terms()) {
      int d = weighted_degree(e, w) - w[j];
      auto it = parts.find(d);
      if (it == parts.end()) it = parts.emplace(d, zero_field(n)).first;
      it->second[j].add_term(e, c);
    }
  }
  return parts;
}

int weighted_order(const PolyField& v, const Weights& w) {
  int d = INT_MAX;
  for (std::size_t j = 0; j < v.size(); ++j)
    for (const auto& [e, c] : v[j].terms()) d = std::min(d, weighted_degree(e, w) - w[j]);
  return d;
}

PolyField weighted_part(const PolyField& v, const Weights& w, int degree) {
  PolyField out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(v[j].weighted_part(w, degree + w[j]));
  return out;
}

std::string to_string(const PolyField& v, const std::vector<std::string>& names) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].is_zero()) continue;
    if (!first) out << " + ";
    first = false;
    bool compound = v[k].terms().size() > 1;
    if (v[k] == Poly::constant(v[k].nvars(), 1)) {
      out << "d/d" << names[k];
      continue;
    }
    out << (compound ? "(" : "") << v[k].to_string(names) << (compound ? ")" : "") << " d/d" << names[k];
  }
  return first ? "0" : out.str();
}

TriangularMap TriangularMap::identity(std::size_t n) {
  TriangularMap m;
  for (std::size_t i = 0; i < n; ++i) {
    m.forward.push_back(Poly::variable(n, i));
    m.inverse.push_back(Poly::variable(n, i));
  }
  return m;
}

TriangularMap TriangularMap::then(const TriangularMap& next) const {
  TriangularMap m;
  for (const auto& p : next.forward) m.forward.push_back(p.compose(forward));
  for (const auto& p : inverse) m.inverse.push_back(p.compose(next.inverse));
  return m;
}

std::vector<double> TriangularMap::apply(const std::vector<double>& x) const {
  std::vector<double> z;
  for (const auto& p : forward) z.push_back(p.eval(x.data()));
  return z;
}

std::vector<double> TriangularMap::apply_inverse(const std::vector<double>& z) const {
  std::vector<double> x;
  for (const auto& p : inverse) x.push_back(p.eval(z.data()));
  return x;
}

PolyField pushforward(const PolyField& v, const TriangularMap& phi, const Truncation& t) {
  PolyField out;
  for (const auto& comp : phi.forward) {
    Poly vz = apply(v, comp);
    out.push_back(vz.compose(phi.inverse, t));
  }
  return out;
}

}  // namespace nhsteer
