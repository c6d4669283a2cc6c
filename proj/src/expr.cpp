#include "nhsteer/expr.hpp"

#include <cctype>
#include <sstream>

#include "nhsteer/errors.hpp"

namespace nhsteer {

Expr::Expr() : Expr(Rational(0)) {}

Expr::Expr(const Rational& c) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = c;
  node_ = std::move(n);
}

Expr::Expr(int c) : Expr(Rational(c)) {}

Expr Expr::var(std::size_t i) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = i;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::make(Kind kind, std::vector<Expr> args, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  n->exponent = exponent;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator+(const Expr& a, const Expr& b) {
  std::vector<Expr> terms;
  Rational c = 0;
  for (const Expr* e : {&a, &b}) {
    if (e->kind() == Expr::Kind::Add) {
      for (const auto& t : e->args()) {
        if (t.is_const()) c += t.value();
        else terms.push_back(t);
      }
    } else if (e->is_const()) {
      c += e->value();
    } else {
      terms.push_back(*e);
    }
  }
  if (c != 0) terms.insert(terms.begin(), Expr(c));
  if (terms.empty()) return Expr(0);
  if (terms.size() == 1) return terms[0];
  return Expr::make(Expr::Kind::Add, std::move(terms));
}

Expr operator*(const Expr& a, const Expr& b) {
  std::vector<Expr> factors;
  Rational c = 1;
  for (const Expr* e : {&a, &b}) {
    if (e->kind() == Expr::Kind::Mul) {
      for (const auto& f : e->args()) {
        if (f.is_const()) c *= f.value();
        else factors.push_back(f);
      }
    } else if (e->is_const()) {
      c *= e->value();
    } else {
      factors.push_back(*e);
    }
  }
  if (c == 0) return Expr(0);
  if (c != 1) factors.insert(factors.begin(), Expr(c));
  if (factors.empty()) return Expr(1);
  if (factors.size() == 1) return factors[0];
  return Expr::make(Expr::Kind::Mul, std::move(factors));
}

Expr operator-(const Expr& a) { return Expr(-1) * a; }
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr pow(const Expr& base, int k) {
  if (base.is_const()) {
    if (base.value() == 0) {
      if (k <= 0) throw Error(ErrorCode::InvalidArgument, "zero to a non-positive power");
      return Expr(0);
    }
    Rational r = 1;
    for (int i = 0; i < std::abs(k); ++i) r *= base.value();
    return k >= 0 ? Expr(r) : Expr(Rational(1) / r);
  }
  if (k < 0) throw Error(ErrorCode::UnsupportedExpression, "negative power of a non-constant expression");
  if (k == 0) return Expr(1);
  if (k == 1) return base;
  if (base.kind() == Expr::Kind::Pow) return pow(base.args()[0], base.exponent() * k);
  return Expr::make(Expr::Kind::Pow, {base}, k);
}

Expr sin(const Expr& a) {
  if (a.is_zero()) return Expr(0);
  return Expr::make(Expr::Kind::Sin, {a});
}

Expr cos(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return Expr::make(Expr::Kind::Cos, {a});
}

Expr Expr::diff(std::size_t i) const {
  switch (kind()) {
    case Kind::Const: return Expr(0);
    case Kind::Var: return Expr(var_index() == i ? 1 : 0);
    case Kind::Add: {
      Expr s(0);
      for (const auto& t : args()) s = s + t.diff(i);
      return s;
    }
    case Kind::Mul: {
      Expr s(0);
      const auto& f = args();
      for (std::size_t k = 0; k < f.size(); ++k) {
        Expr d = f[k].diff(i);
        if (d.is_zero()) continue;
        Expr prod = d;
        for (std::size_t l = 0; l < f.size(); ++l)
          if (l != k) prod = prod * f[l];
        s = s + prod;
      }
      return s;
    }
    case Kind::Pow: {
      Expr d = args()[0].diff(i);
      if (d.is_zero()) return Expr(0);
      return Expr(exponent()) * pow(args()[0], exponent() - 1) * d;
    }
    case Kind::Sin: {
      Expr d = args()[0].diff(i);
      if (d.is_zero()) return Expr(0);
      return cos(args()[0]) * d;
    }
    case Kind::Cos: {
      Expr d = args()[0].diff(i);
      if (d.is_zero()) return Expr(0);
      return -(sin(args()[0]) * d);
    }
  }
  return Expr(0);
}

double Expr::eval(const double* x) const {
  switch (kind()) {
    case Kind::Const: return value().get_d();
    case Kind::Var: return x[var_index()];
    case Kind::Add: {
      double s = 0;
      for (const auto& t : args()) s += t.eval(x);
      return s;
    }
    case Kind::Mul: {
      double p = 1;
      for (const auto& t : args()) p *= t.eval(x);
      return p;
    }
    case Kind::Pow: return std::pow(args()[0].eval(x), exponent());
    case Kind::Sin: return std::sin(args()[0].eval(x));
    case Kind::Cos: return std::cos(args()[0].eval(x));
  }
  return 0;
}

std::size_t Expr::arity() const {
  if (kind() == Kind::Var) return var_index() + 1;
  std::size_t n = 0;
  for (const auto& a : args()) n = std::max(n, a.arity());
  return n;
}

std::optional<Poly> Expr::to_poly(std::size_t nvars) const {
  switch (kind()) {
    case Kind::Const: return Poly::constant(nvars, value());
    case Kind::Var:
      if (var_index() >= nvars) return std::nullopt;
      return Poly::variable(nvars, var_index());
    case Kind::Add: {
      Poly s(nvars);
      for (const auto& t : args()) {
        auto p = t.to_poly(nvars);
        if (!p) return std::nullopt;
        s += *p;
      }
      return s;
    }
    case Kind::Mul: {
      Poly s = Poly::constant(nvars, 1);
      for (const auto& t : args()) {
        auto p = t.to_poly(nvars);
        if (!p) return std::nullopt;
        s = s * *p;
      }
      return s;
    }
    case Kind::Pow: {
      auto p = args()[0].to_poly(nvars);
      if (!p) return std::nullopt;
      return p->pow(exponent());
    }
    case Kind::Sin:
    case Kind::Cos: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

// sin and cos of (c + q) with q having no constant term, truncated at degree.
void sin_cos_series(const Poly& arg, int degree, Poly* s, Poly* c, bool* exact) {
  std::size_t n = arg.nvars();
  Rational c0 = arg.constant_term();
  Poly q = arg - Poly::constant(n, c0);
  Rational sc = 0, cc = 1;
  if (c0 != 0) {
    double v = c0.get_d();
    sc = from_double(std::sin(v));
    cc = from_double(std::cos(v));
    if (exact) *exact = false;
  }
  Truncation t = Truncation::ordinary(degree);
  Poly sq(n), cq = Poly::constant(n, 1);  // sin(q), cos(q)
  Poly power = Poly::constant(n, 1);
  for (int k = 1; k <= degree; ++k) {
    power = Poly::multiply(power, q, t);
    if (power.is_zero()) break;
    Rational coef = Rational(1) / factorial(k);
    // sin q = q - q^3/3! + ..., cos q = 1 - q^2/2! + ...
    int phase = k % 4;
    if (phase == 1) sq += power * coef;
    if (phase == 3) sq -= power * coef;
    if (phase == 2) cq -= power * coef;
    if (phase == 0) cq += power * coef;
  }
  *s = sq * cc + cq * sc;
  *c = cq * cc - sq * sc;
}

Poly taylor_rec(const Expr& e, const RationalVector& a, int degree, bool* exact,
                std::unordered_map<const void*, Poly>& memo) {
  auto it = memo.find(e.id());
  if (it != memo.end()) return it->second;
  std::size_t n = a.size();
  Truncation t = Truncation::ordinary(degree);
  Poly out(n);
  switch (e.kind()) {
    case Expr::Kind::Const: out = Poly::constant(n, e.value()); break;
    case Expr::Kind::Var:
      out = Poly::constant(n, a[e.var_index()]) + Poly::variable(n, e.var_index());
      break;
    case Expr::Kind::Add:
      for (const auto& s : e.args()) out += taylor_rec(s, a, degree, exact, memo);
      break;
    case Expr::Kind::Mul:
      out = Poly::constant(n, 1);
      for (const auto& s : e.args()) out = Poly::multiply(out, taylor_rec(s, a, degree, exact, memo), t);
      break;
    case Expr::Kind::Pow:
      out = taylor_rec(e.args()[0], a, degree, exact, memo).pow(e.exponent(), t);
      break;
    case Expr::Kind::Sin:
    case Expr::Kind::Cos: {
      Poly s(n), c(n);
      sin_cos_series(taylor_rec(e.args()[0], a, degree, exact, memo), degree, &s, &c, exact);
      out = e.kind() == Expr::Kind::Sin ? s : c;
      break;
    }
  }
  memo.emplace(e.id(), out);
  return out;
}

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add: return 1;
    case Expr::Kind::Mul: return 2;
    case Expr::Kind::Pow: return 3;
    default: return 4;
  }
}

void print(const Expr& e, const std::vector<std::string>& names, std::ostream& out, int parent) {
  bool paren = precedence(e.kind()) < parent;
  if (e.is_const() && parent > 1 && (e.value() < 0 || e.value().get_den() != 1)) paren = true;
  if (paren) out << "(";
  switch (e.kind()) {
    case Expr::Kind::Const: out << e.value().get_str(); break;
    case Expr::Kind::Var:
      out << (e.var_index() < names.size() ? names[e.var_index()] : "x" + std::to_string(e.var_index() + 1));
      break;
    case Expr::Kind::Add:
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        const Expr& t = e.args()[i];
        bool neg = t.kind() == Expr::Kind::Mul && t.args()[0].is_const() && t.args()[0].value() < 0;
        if (i > 0) out << (neg ? " - " : " + ");
        if (neg && i > 0) {
          Expr pos = Expr(-t.args()[0].value());
          for (std::size_t k = 1; k < t.args().size(); ++k) pos = pos * t.args()[k];
          print(pos, names, out, 2);
        } else {
          print(t, names, out, 1);
        }
      }
      break;
    case Expr::Kind::Mul:
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        const Expr& f = e.args()[i];
        if (i == 0 && f.is_const() && f.value() == -1) {
          out << "-";
          continue;
        }
        if (i > 0 && !(i == 1 && e.args()[0].is_const() && e.args()[0].value() == -1)) out << "*";
        print(f, names, out, 3);
      }
      break;
    case Expr::Kind::Pow:
      print(e.args()[0], names, out, 4);
      out << "^" << e.exponent();
      break;
    case Expr::Kind::Sin:
    case Expr::Kind::Cos:
      out << (e.kind() == Expr::Kind::Sin ? "sin(" : "cos(");
      print(e.args()[0], names, out, 0);
      out << ")";
      break;
  }
  if (paren) out << ")";
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& names) : text_(text), names_(names) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ < text_.size()) fail(ErrorCode::ParseError, "unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string& what) const { fail_at(code, what, pos_); }
  [[noreturn]] void fail_at(ErrorCode code, const std::string& what, std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(code, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = unary();
        if (!d.is_const()) fail_at(ErrorCode::UnsupportedExpression, "division by a non-constant expression", at);
        if (d.value() == 0) fail_at(ErrorCode::ParseError, "division by zero", at);
        e = e * Expr(Rational(1) / d.value());
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      skip_space();
      std::size_t at = pos_;
      bool neg = accept('-');
      skip_space();
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        fail(ErrorCode::UnsupportedExpression, "exponent must be an integer literal");
      long k = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        k = k * 10 + (text_[pos_++] - '0');
        if (k > 1000) fail_at(ErrorCode::UnsupportedExpression, "exponent too large", at);
      }
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
        fail(ErrorCode::UnsupportedExpression, "exponent must be an integer literal");
      if (neg) k = -k;
      if (k < 0 && !base.is_const()) fail_at(ErrorCode::UnsupportedExpression, "negative power of a non-constant expression", at);
      if (base.is_zero() && k <= 0) fail_at(ErrorCode::ParseError, "zero to a non-positive power", at);
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '^') fail(ErrorCode::ParseError, "chained '^' is ambiguous; add parentheses");
      return pow(base, static_cast<int>(k));
    }
    return base;
  }

  Expr number() {
    std::size_t start = pos_;
    mpz_class digits = 0;
    long scale = 0;
    bool any = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      digits = digits * 10 + (text_[pos_++] - '0');
      any = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits = digits * 10 + (text_[pos_++] - '0');
        --scale;
        any = true;
      }
    }
    if (!any) fail_at(ErrorCode::ParseError, "malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      bool neg = false;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) neg = text_[pos_++] == '-';
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        fail_at(ErrorCode::ParseError, "malformed exponent in number", start);
      long ex = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ex = ex * 10 + (text_[pos_++] - '0');
        if (ex > 400) fail_at(ErrorCode::ParseError, "number exponent out of range", start);
      }
      scale += neg ? -ex : ex;
    }
    mpz_class ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
    Rational q = scale >= 0 ? Rational(digits * ten_pow) : Rational(digits, ten_pow);
    q.canonicalize();
    return Expr(q);
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail(ErrorCode::ParseError, "unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail(ErrorCode::ParseError, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      std::string id = text_.substr(start, pos_ - start);
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        if (id != "sin" && id != "cos") fail_at(ErrorCode::UnsupportedExpression, "unsupported function '" + id + "'", start);
        ++pos_;
        Expr arg = expression();
        if (!accept(')')) fail(ErrorCode::ParseError, "expected ')'");
        return id == "sin" ? sin(arg) : cos(arg);
      }
      for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == id) return Expr::var(i);
      fail_at(ErrorCode::ParseError, "unknown identifier '" + id + "'", start);
    }
    fail(ErrorCode::ParseError, "unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly Expr::taylor(const RationalVector& a, int degree, bool* exact) const {
  std::unordered_map<const void*, Poly> memo;
  return taylor_rec(*this, a, degree, exact, memo);
}

std::string Expr::to_string(const std::vector<std::string>& names) const {
  std::ostringstream out;
  print(*this, names, out, 0);
  return out.str();
}

Expr from_poly(const Poly& p) { return from_poly_shifted(p, {}); }

Expr from_poly_shifted(const Poly& p, const RationalVector& shift) {
  std::vector<Expr> vars;
  for (std::size_t i = 0; i < p.nvars(); ++i) {
    if (i < shift.size() && shift[i] != 0) vars.push_back(Expr::var(i) - Expr(shift[i]));
    else vars.push_back(Expr::var(i));
  }
  Expr s(0);
  for (const auto& [e, c] : p.terms()) {
    Expr term(c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i]) term = term * pow(vars[i], e[i]);
    s = s + term;
  }
  return s;
}

Expr parse_expr(const std::string& text, const std::vector<std::string>& names) {
  return Parser(text, names).parse();
}

Expr apply(const ExprField& v, const Expr& f) {
  Expr s(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_zero()) continue;
    Expr d = f.diff(i);
    if (d.is_zero()) continue;
    s = s + v[i] * d;
  }
  return s;
}

ExprField lie_bracket(const ExprField& v, const ExprField& w) {
  ExprField out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(apply(v, w[k]) - apply(w, v[k]));
  return out;
}

std::vector<double> eval(const ExprField& v, const double* x) {
  std::vector<double> out;
  for (const auto& e : v) out.push_back(e.eval(x));
  return out;
}

bool is_identically_zero(const Expr& e, std::size_t nvars) {
  if (e.is_zero()) return true;
  auto p = e.to_poly(std::max(nvars, e.arity()));
  return p && p->is_zero();
}

bool is_identically_zero(const ExprField& v, std::size_t nvars) {
  for (const auto& e : v)
    if (!is_identically_zero(e, nvars)) return false;
  return true;
}

PolyField taylor(const ExprField& v, const RationalVector& a, int degree, bool* exact) {
  std::unordered_map<const void*, Poly> memo;
  PolyField out;
  for (const auto& e : v) out.push_back(taylor_rec(e, a, degree, exact, memo));
  return out;
}

std::optional<PolyField> to_poly_field(const ExprField& v, std::size_t nvars) {
  PolyField out;
  for (const auto& e : v) {
    auto p = e.to_poly(nvars);
    if (!p) return std::nullopt;
    out.push_back(*p);
  }
  return out;
}

ExprField from_poly_field(const PolyField& v) {
  ExprField out;
  for (const auto& p : v) out.push_back(from_poly(p));
  return out;
}

std::string to_string(const ExprField& v, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i].to_string(names);
  out << ")";
  return out.str();
}

Tape::Tape(const std::vector<Expr>& outputs) {
  std::unordered_map<const void*, std::size_t> seen;
  for (const auto& e : outputs) outputs_.push_back(emit(e, seen));
}

std::size_t Tape::emit(const Expr& e, std::unordered_map<const void*, std::size_t>& seen) {
  auto it = seen.find(e.id());
  if (it != seen.end()) return it->second;
  std::vector<std::size_t> slots;
  for (const auto& a : e.args()) slots.push_back(emit(a, seen));
  Instr in;
  switch (e.kind()) {
    case Expr::Kind::Const: in.op = Op::Const; in.constant = to_long_double(e.value()); break;
    case Expr::Kind::Var: in.op = Op::Var; in.index = e.var_index(); break;
    case Expr::Kind::Add: in.op = Op::Add; break;
    case Expr::Kind::Mul: in.op = Op::Mul; break;
    case Expr::Kind::Pow: in.op = Op::Pow; in.exponent = e.exponent(); break;
    case Expr::Kind::Sin: in.op = Op::Sin; break;
    case Expr::Kind::Cos: in.op = Op::Cos; break;
  }
  in.arg_begin = arg_slots_.size();
  arg_slots_.insert(arg_slots_.end(), slots.begin(), slots.end());
  in.arg_end = arg_slots_.size();
  code_.push_back(in);
  seen.emplace(e.id(), code_.size() - 1);
  return code_.size() - 1;
}

}  // namespace nhsteer
