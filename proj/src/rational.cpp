#include "nhsteer/rational.hpp"

#include <cmath>

#include "nhsteer/errors.hpp"

namespace nhsteer {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedExpression: return "UnsupportedExpression";
    case ErrorCode::NoFrame: return "NoFrame";
    case ErrorCode::SingularFrame: return "SingularFrame";
    case ErrorCode::IdentificationFailure: return "IdentificationFailure";
    case ErrorCode::SearchBudgetExhausted: return "SearchBudgetExhausted";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::CoverageGap: return "CoverageGap";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::DomainExit: return "DomainExit";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Rational from_double(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, "non-finite value cannot be made rational");
  }
  Rational q(value);
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

long double to_long_double(const Rational& q) {
  mpf_class f(q, 256);
  double hi = f.get_d();
  mpf_class rest = f - mpf_class(hi, 256);
  return static_cast<long double>(hi) + static_cast<long double>(rest.get_d());
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational factorial(int k) {
  Rational f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

RationalMatrix identity_matrix(std::size_t n) {
  RationalMatrix id(n, RationalVector(n, 0));
  for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
  return id;
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  std::size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
  RationalMatrix c(n, RationalVector(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    }
  return c;
}

RationalVector multiply(const RationalMatrix& a, const RationalVector& x) {
  RationalVector y(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (a[i][j] != 0) y[i] += a[i][j] * x[j];
  return y;
}

Rational determinant(RationalMatrix a) {
  std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

RationalMatrix inverse(const RationalMatrix& a) {
  std::size_t n = a.size();
  RationalMatrix m = a;
  RationalMatrix inv = identity_matrix(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) throw Error(ErrorCode::SingularMatrix, "matrix is singular");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Rational piv = m[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      m[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      Rational f = m[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

SolveResult solve_min_norm(const RationalMatrix& a, const RationalVector& b, std::size_t cols) {
  std::size_t rows = a.size();
  // Row-reduce [A | b] while remembering which original rows stay independent.
  RationalMatrix m(rows, RationalVector(cols + 1, 0));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m[i][j] = a[i][j];
    m[i][cols] = b[i];
  }
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_cols;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[rank]);
    std::swap(order[p], order[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0) continue;
      Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k <= cols; ++k) m[r][k] -= f * m[rank][k];
    }
    pivot_cols.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r) {
    if (m[r][cols] != 0) return {SolveStatus::Inconsistent, {}, rank};
  }
  // Independent rows of the original system are order[0..rank).
  RationalMatrix ar(rank, RationalVector(cols, 0));
  RationalVector br(rank, 0);
  for (std::size_t i = 0; i < rank; ++i) {
    ar[i] = RationalVector(a[order[i]].begin(), a[order[i]].begin() + cols);
    br[i] = b[order[i]];
  }
  RationalMatrix gram(rank, RationalVector(rank, 0));
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t j = i; j < rank; ++j) {
      Rational s = 0;
      for (std::size_t k = 0; k < cols; ++k)
        if (ar[i][k] != 0 && ar[j][k] != 0) s += ar[i][k] * ar[j][k];
      gram[i][j] = s;
      gram[j][i] = s;
    }
  RationalVector y = rank ? multiply(inverse(gram), br) : RationalVector{};
  RationalVector x(cols, 0);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      if (ar[i][k] != 0) x[k] += ar[i][k] * y[i];
  return {rank == cols ? SolveStatus::Unique : SolveStatus::MinimumNorm, x, rank};
}

}  // namespace nhsteer
