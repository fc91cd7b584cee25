#include "isoflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isoflow/errors.hpp"

namespace isoflow {

LogDet log_determinant(const RealMatrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("log_determinant: matrix is not square");
  if (m.rows() == 0) return {0.0, 1};
  Eigen::PartialPivLU<RealMatrix> lu(m);
  const RealMatrix& f = lu.matrixLU();
  LogDet out;
  out.sign = static_cast<int>(lu.permutationP().determinant());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double d = f(i, i);
    if (d == 0.0 || !std::isfinite(d)) {
      return {-std::numeric_limits<double>::infinity(), 0};
    }
    if (d < 0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(d));
  }
  return out;
}

double log_abs_sinh(double x) {
  const double a = std::abs(x);
  if (a < 1.0) return std::log(std::abs(std::sinh(x)));
  // sinh(a) = e^a (1 - e^{-2a}) / 2
  return a + std::log1p(-std::exp(-2.0 * a)) - std::log(2.0);
}

// Hestenes one-sided Jacobi on the columns of (D T)^† = T^† D. Each column is
// stored as exp(scale) * unit vector. For a pair with log-scale difference d
// and normalized overlap |g|, the rotation tangent is
//   t = sign(ζ) / (|ζ| + sqrt(1 + ζ²)),  ζ = -sinh(d) / |g|,
// and the update only needs t·e^{±d}, both of which are bounded when written
// in terms of u = e^{-|d|}.
template <class Scalar>
std::vector<double> graded_log_singular_values(std::span<const double> row_log_scale,
                                               const Matrix<Scalar>& T) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = T.rows();
  if (T.cols() != n || static_cast<Eigen::Index>(row_log_scale.size()) != n) {
    throw ParameterError("graded_log_singular_values: shape mismatch");
  }

  std::vector<Vec> cols(static_cast<std::size_t>(n));
  std::vector<double> scale(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec v = T.row(i).adjoint();
    const double nv = v.norm();
    if (!(nv > 0.0) || !std::isfinite(nv) || !std::isfinite(row_log_scale[i])) {
      throw DegenerateTrajectoryError("graded_log_singular_values: degenerate row");
    }
    cols[i] = v / nv;
    scale[i] = row_log_scale[i] + std::log(nv);
  }

  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  constexpr int kMaxSweeps = 80;
  bool converged = n < 2;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        Vec& vi = cols[i];
        Vec& vj = cols[j];
        const Scalar g = vi.dot(vj); // vi^† vj
        const double ag = std::abs(g);
        if (ag <= tol) continue;
        converged = false;
        if constexpr (!std::is_same_v<Scalar, double>) {
          vj *= std::conj(g) / ag; // rotate the phase so that <vi, vj> = |g|
        } else if (g < 0) {
          vj = -vj;
        }
        const double d = scale[i] - scale[j];
        const double u = std::exp(-std::abs(d));
        const double q = (1.0 - u * u) / (2.0 * ag);
        const double den = q + std::sqrt(u * u + q * q);
        const double sgn = d > 0 ? -1.0 : 1.0;
        const double t = sgn * u / den;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        double t_up, t_down; // t e^{d}, t e^{-d}
        if (d >= 0) {
          t_up = sgn / den;
          t_down = sgn * u * u / den;
        } else {
          t_up = sgn * u * u / den;
          t_down = sgn / den;
        }
        Vec wi = c * vi - (c * t_down) * vj;
        Vec wj = (c * t_up) * vi + c * vj;
        const double ni = wi.norm();
        const double nj = wj.norm();
        if (!(ni > 0.0) || !(nj > 0.0)) {
          throw DegenerateTrajectoryError("graded_log_singular_values: rank loss");
        }
        vi = wi / ni;
        vj = wj / nj;
        scale[i] += std::log(ni);
        scale[j] += std::log(nj);
      }
    }
  }
  std::sort(scale.begin(), scale.end());
  return scale;
}

template <class Scalar>
std::vector<double> half_log_gram_eigenvalues(const Matrix<Scalar>& m) {
  if (!m.allFinite()) throw NumericalOverflowError("direct exponents: non-finite matrix entries");
  const Matrix<Scalar> gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalOverflowError("direct exponents: eigen decomposition failed");
  }
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    const double s = eig.eigenvalues()(k);
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NumericalOverflowError(
          "direct exponents: strain eigenvalue lost to round-off; use QR renormalization");
    }
    out[static_cast<std::size_t>(k)] = 0.5 * std::log(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class Scalar>
double orthonormality_defect(const Matrix<Scalar>& q) {
  const Matrix<Scalar> g = q.adjoint() * q;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g(i, j) - target));
    }
  }
  return worst;
}

template std::vector<double> graded_log_singular_values<double>(std::span<const double>,
                                                                const RealMatrix&);
template std::vector<double> graded_log_singular_values<Complex>(std::span<const double>,
                                                                 const ComplexMatrix&);
template std::vector<double> half_log_gram_eigenvalues<double>(const RealMatrix&);
template std::vector<double> half_log_gram_eigenvalues<Complex>(const ComplexMatrix&);
template double orthonormality_defect<double>(const RealMatrix&);
template double orthonormality_defect<Complex>(const ComplexMatrix&);

} // namespace isoflow
