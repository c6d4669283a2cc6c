#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nhsteer/poly.hpp"
#include "nhsteer/rational.hpp"

namespace nhsteer {

// Scalar expression over {rational constants, variables, +, *, integer powers,
// sin, cos}. Nodes are immutable and shared.
class Expr {
 public:
  enum class Kind { Const, Var, Add, Mul, Pow, Sin, Cos };

  Expr();
  Expr(const Rational& c);  // NOLINT: implicit constants read naturally
  Expr(int c);              // NOLINT
  static Expr var(std::size_t i);

  Kind kind() const { return node_->kind; }
  const Rational& value() const { return node_->value; }
  std::size_t var_index() const { return node_->index; }
  int exponent() const { return node_->exponent; }
  const std::vector<Expr>& args() const { return node_->args; }
  const void* id() const { return node_.get(); }

  bool is_const() const { return kind() == Kind::Const; }
  bool is_zero() const { return is_const() && value() == 0; }
  bool is_one() const { return is_const() && value() == 1; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int k);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);

  Expr diff(std::size_t i) const;
  double eval(const double* x) const;
  // Highest variable index used plus one.
  std::size_t arity() const;

  // Exact polynomial form when the expression is polynomial.
  std::optional<Poly> to_poly(std::size_t nvars) const;
  // Taylor polynomial in p = x - a, total degree <= degree. exact is cleared
  // when a sin/cos is evaluated at a nonzero argument (value rounded from a
  // double to its exact binary rational).
  Poly taylor(const RationalVector& a, int degree, bool* exact = nullptr) const;

  std::string to_string(const std::vector<std::string>& names) const;

 private:
  struct Node {
    Kind kind;
    Rational value;
    std::size_t index = 0;
    int exponent = 0;
    std::vector<Expr> args;
  };
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(Kind kind, std::vector<Expr> args, int exponent = 0);

  std::shared_ptr<const Node> node_;
};

Expr from_poly(const Poly& p);
// Polynomial in p with p_k replaced by (x_k - shift_k) for k < shift.size()
// and by x_k otherwise.
Expr from_poly_shifted(const Poly& p, const RationalVector& shift);

// Throws Error(ParseError | UnsupportedExpression) with line/column.
Expr parse_expr(const std::string& text, const std::vector<std::string>& names);

using ExprField = std::vector<Expr>;

Expr apply(const ExprField& v, const Expr& f);
ExprField lie_bracket(const ExprField& v, const ExprField& w);
std::vector<double> eval(const ExprField& v, const double* x);
// Zero test: exact through polynomial normal form when possible, otherwise structural.
bool is_identically_zero(const Expr& e, std::size_t nvars);
bool is_identically_zero(const ExprField& v, std::size_t nvars);
PolyField taylor(const ExprField& v, const RationalVector& a, int degree, bool* exact = nullptr);
std::optional<PolyField> to_poly_field(const ExprField& v, std::size_t nvars);
ExprField from_poly_field(const PolyField& v);
std::string to_string(const ExprField& v, const std::vector<std::string>& names);

// Flattened evaluation program shared by all outputs (common nodes computed once).
class Tape {
 public:
  Tape() = default;
  explicit Tape(const std::vector<Expr>& outputs);

  std::size_t outputs() const { return outputs_.size(); }
  template <class T>
  void eval(const T* x, T* out, std::vector<T>& scratch) const;

 private:
  enum class Op { Const, Var, Add, Mul, Pow, Sin, Cos };
  struct Instr {
    Op op;
    long double constant = 0;
    std::size_t index = 0;
    int exponent = 0;
    std::size_t arg_begin = 0, arg_end = 0;
  };
  std::size_t emit(const Expr& e, std::unordered_map<const void*, std::size_t>& seen);

  std::vector<Instr> code_;
  std::vector<std::size_t> arg_slots_;
  std::vector<std::size_t> outputs_;
};

template <class T>
void Tape::eval(const T* x, T* out, std::vector<T>& scratch) const {
  using std::cos;
  using std::sin;
  scratch.resize(code_.size());
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instr& in = code_[k];
    T v = 0;
    switch (in.op) {
      case Op::Const: v = static_cast<T>(in.constant); break;
      case Op::Var: v = x[in.index]; break;
      case Op::Add:
        v = 0;
        for (std::size_t a = in.arg_begin; a < in.arg_end; ++a) v += scratch[arg_slots_[a]];
        break;
      case Op::Mul:
        v = 1;
        for (std::size_t a = in.arg_begin; a < in.arg_end; ++a) v *= scratch[arg_slots_[a]];
        break;
      case Op::Pow: {
        T b = scratch[arg_slots_[in.arg_begin]];
        v = 1;
        for (int i = 0; i < in.exponent; ++i) v *= b;
        break;
      }
      case Op::Sin: v = sin(scratch[arg_slots_[in.arg_begin]]); break;
      case Op::Cos: v = cos(scratch[arg_slots_[in.arg_begin]]); break;
    }
    scratch[k] = v;
  }
  for (std::size_t o = 0; o < outputs_.size(); ++o) out[o] = scratch[outputs_[o]];
}

}  // namespace nhsteer
