#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isoflow {

using Complex = std::complex<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

/// log|det| together with the sign of a real determinant. `sign == 0` marks an
/// exactly singular matrix, in which case `log_abs` is -infinity.
struct LogDet {
  double log_abs = 0.0;
  int sign = 1;
};

/// Determinant in log-magnitude form via LU with partial pivoting.
LogDet log_determinant(const RealMatrix& m);

/// log|sinh(x)| without overflow for large |x|.
double log_abs_sinh(double x);

/// Logarithms of the singular values of diag(exp(row_log_scale)) * T, sorted
/// ascending. The row scales are kept in log form throughout a one-sided
/// Jacobi iteration, so strongly graded products whose entries would overflow
/// a double are handled with high relative accuracy.
template <class Scalar>
std::vector<double> graded_log_singular_values(std::span<const double> row_log_scale,
                                               const Matrix<Scalar>& T);

/// ½·log of the eigenvalues of M^† M, ascending. Direct route for short
/// products; throws NumericalOverflowError once precision is exhausted.
template <class Scalar>
std::vector<double> half_log_gram_eigenvalues(const Matrix<Scalar>& m);

/// Max over columns of |<q_i, q_j> - δ_ij|.
template <class Scalar>
double orthonormality_defect(const Matrix<Scalar>& q);

} // namespace isoflow
