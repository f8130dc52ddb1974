#include "wlmf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wlmf/error.hpp"

namespace wlmf {
namespace {

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

// Eigen returns ascending eigenpairs; flip to descending.
HermitianEig descending(const Eigen::SelfAdjointEigenSolver<CMatrix>& es) {
  const auto n = es.eigenvalues().size();
  HermitianEig out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

// Q (Q^H Q)^{-1/2}: nearest matrix with orthonormal columns.
CMatrix orthonormalize(const CMatrix& q) {
  const CMatrix gram = q.adjoint() * q;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
  const RVector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return q * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

TakagiResult takagi_impl(const CMatrix& c, const CMatrix* companion) {
  require_valid(c, "takagi");
  require_square(c, "takagi");
  if (!is_symmetric(c)) {
    throw Error(ErrorKind::NotSymmetric, "takagi: input is not complex symmetric");
  }
  const Eigen::Index n = c.rows();
  if (companion != nullptr) {
    if (companion->rows() != n || companion->cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "takagi: companion dimension differs from C");
    }
  }

  // For C = A + jB, the real symmetric [[A, B], [B, -A]] has spectrum +-sigma_i.
  // An eigenvector (x; y) for +sigma gives q = x + jy with C conj(q) = sigma q.
  const RMatrix a = c.real();
  const RMatrix b = c.imag();
  RMatrix embed(2 * n, 2 * n);
  embed << a, b, b, -a;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(embed);

  const double sigma_max = std::max(es.eigenvalues()(2 * n - 1), 0.0);
  const double zero_tol = 1e-10 * sigma_max;
  Eigen::Index k = 0;
  while (k < n && sigma_max > 0.0 && es.eigenvalues()(2 * n - 1 - k) > zero_tol) ++k;

  TakagiResult out{CMatrix(n, n), RVector::Zero(n)};
  if (k > 0) {
    CMatrix q_pos(n, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index col = 2 * n - 1 - i;
      out.values(i) = es.eigenvalues()(col);
      q_pos.col(i) = es.eigenvectors().col(col).head(n).cast<Complex>() +
                     kJ * es.eigenvectors().col(col).tail(n).cast<Complex>();
    }
    out.q.leftCols(k) = orthonormalize(q_pos);
  }
  if (k < n) {
    // Orthonormal basis of the complement of span(Q+); any such vector q
    // satisfies C conj(q) = 0.
    const CMatrix proj = CMatrix::Identity(n, n) - out.q.leftCols(k) * out.q.leftCols(k).adjoint();
    const HermitianEig pe = descending(Eigen::SelfAdjointEigenSolver<CMatrix>(proj));
    const CMatrix basis = pe.vectors.leftCols(n - k);
    const CMatrix h = companion != nullptr ? CMatrix(*companion) : CMatrix::Identity(n, n);
    const CMatrix reduced = basis.adjoint() * h * basis;
    const HermitianEig re =
        descending(Eigen::SelfAdjointEigenSolver<CMatrix>(CMatrix(0.5 * (reduced + reduced.adjoint()))));
    out.q.rightCols(n - k) = basis * re.vectors;
  }
  return out;
}

}  // namespace

void require_valid(const CMatrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": empty matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string(what) + ": non-finite entry");
  }
}

void require_valid(const CVector& v, const char* what) {
  if (v.size() < 1) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": empty vector");
  }
  if (!v.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string(what) + ": non-finite entry");
  }
}

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= rel_tol * a.norm();
}

bool is_symmetric(const CMatrix& c, double rel_tol) {
  if (c.rows() != c.cols()) return false;
  return (c - c.transpose()).norm() <= rel_tol * c.norm();
}

double default_pd_tolerance(const CMatrix& a) {
  return 1e-12 * a.diagonal().real().maxCoeff();
}

HermitianFactor::HermitianFactor(const CMatrix& a, std::optional<double> tol) {
  require_valid(a, "cholesky");
  require_square(a, "cholesky");
  const double threshold = tol.value_or(default_pd_tolerance(a));
  if (!(a.diagonal().real().maxCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "cholesky: non-positive diagonal");
  }
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "cholesky: factorization failed");
  }
  // Pivots of the LDL^H view are the squared diagonal of L.
  const RVector pivots = llt_.matrixLLT().diagonal().real().cwiseAbs2();
  if (!(pivots.minCoeff() > threshold)) {
    std::ostringstream os;
    os << "cholesky: pivot " << pivots.minCoeff() << " not above tolerance " << threshold;
    throw Error(ErrorKind::NotPositiveDefinite, os.str());
  }
}

CVector HermitianFactor::solve(const CVector& b) const {
  if (b.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "hermitian solve: right-hand side length differs");
  }
  return llt_.solve(b);
}

CMatrix HermitianFactor::solve(const CMatrix& b) const {
  if (b.rows() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "hermitian solve: right-hand side rows differ");
  }
  return llt_.solve(b);
}

CMatrix HermitianFactor::inverse() const {
  return llt_.solve(CMatrix::Identity(dim(), dim()));
}

bool is_positive_definite(const CMatrix& a, std::optional<double> tol) {
  try {
    HermitianFactor f(a, tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

CVector hermitian_solve(const CMatrix& a, const CVector& b) {
  require_valid(b, "hermitian_solve");
  if (!is_hermitian(a)) {
    throw Error(ErrorKind::NotHermitian, "hermitian_solve: matrix is not Hermitian");
  }
  return HermitianFactor(a).solve(b);
}

HermitianEig hermitian_eig(const CMatrix& a) {
  require_valid(a, "hermitian_eig");
  if (!is_hermitian(a)) {
    throw Error(ErrorKind::NotHermitian, "hermitian_eig: matrix is not Hermitian");
  }
  return descending(Eigen::SelfAdjointEigenSolver<CMatrix>(CMatrix(0.5 * (a + a.adjoint()))));
}

TakagiResult takagi(const CMatrix& c) { return takagi_impl(c, nullptr); }

TakagiResult takagi(const CMatrix& c, const CMatrix& companion) {
  return takagi_impl(c, &companion);
}

double real_quadratic_form(const CVector& x, const CVector& a_inv_x) {
  const Complex value = x.dot(a_inv_x);  // conjugates x
  if (std::abs(value.imag()) > 1e-12 * std::abs(value)) {
    std::ostringstream os;
    os << "quadratic form has imaginary residue " << value.imag() << " on value " << value.real();
    throw Error(ErrorKind::NumericalInconsistency, os.str());
  }
  return value.real();
}

}  // namespace wlmf
