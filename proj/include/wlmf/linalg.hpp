#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace wlmf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr Complex kJ{0.0, 1.0};

/// Throws NonFinite / DimensionMismatch if the matrix is empty or has NaN/Inf.
void require_valid(const CMatrix& m, const char* what);
void require_valid(const CVector& v, const char* what);

bool is_hermitian(const CMatrix& a, double rel_tol = 1e-10);
bool is_symmetric(const CMatrix& c, double rel_tol = 1e-10);

/// Default pivot threshold: 1e-12 times the largest diagonal entry.
double default_pd_tolerance(const CMatrix& a);

/// Cholesky factor of a Hermitian positive definite matrix. Construction
/// throws NotPositiveDefinite when a pivot falls at or below the tolerance.
class HermitianFactor {
 public:
  explicit HermitianFactor(const CMatrix& a, std::optional<double> tol = {});

  Eigen::Index dim() const { return llt_.matrixLLT().rows(); }
  CVector solve(const CVector& b) const;
  CMatrix solve(const CMatrix& b) const;
  CMatrix inverse() const;

 private:
  Eigen::LLT<CMatrix> llt_;
};

bool is_positive_definite(const CMatrix& a, std::optional<double> tol = {});

/// Solves A y = b for Hermitian positive definite A.
CVector hermitian_solve(const CMatrix& a, const CVector& b);

struct HermitianEig {
  RVector values;   // descending
  CMatrix vectors;  // columns match values
};

HermitianEig hermitian_eig(const CMatrix& a);

/// C = Q diag(values) Q^T with Q unitary and values sorted descending.
struct TakagiResult {
  CMatrix q;
  RVector values;
};

/// Takagi/Autonne factorization of a complex symmetric matrix. Columns that
/// belong to zero Takagi values are not fixed by C; they are taken from the
/// eigenvectors (descending) of `companion` restricted to that subspace, or
/// from the identity when no companion is given.
TakagiResult takagi(const CMatrix& c);
TakagiResult takagi(const CMatrix& c, const CMatrix& companion);

/// Real-part-checked quadratic form x^H A^{-1} x. Throws NumericalInconsistency
/// when the imaginary residue exceeds 1e-12 of the magnitude.
double real_quadratic_form(const CVector& x, const CVector& a_inv_x);

}  // namespace wlmf
