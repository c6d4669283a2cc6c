#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace nhsteer {

using Rational = mpq_class;

// Exact conversion of a finite double to the binary rational it represents.
Rational from_double(double value);
double to_double(const Rational& q);
long double to_long_double(const Rational& q);
std::string to_string(const Rational& q);
Rational factorial(int k);

using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

RationalMatrix identity_matrix(std::size_t n);
RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalVector multiply(const RationalMatrix& a, const RationalVector& x);
Rational determinant(RationalMatrix a);

// Throws Error(SingularMatrix) when a is not invertible.
RationalMatrix inverse(const RationalMatrix& a);

enum class SolveStatus { Unique, MinimumNorm, Inconsistent };

struct SolveResult {
  SolveStatus status;
  RationalVector x;
  std::size_t rank;
};

// Solves a x = b exactly. When the system is consistent but underdetermined the
// minimum Euclidean norm solution x = A^T (A A^T)^{-1} b over an independent
// row subset is returned.
SolveResult solve_min_norm(const RationalMatrix& a, const RationalVector& b, std::size_t cols);

}  // namespace nhsteer
