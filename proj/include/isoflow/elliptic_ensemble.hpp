#pragma once

#include <array>
#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "isoflow/linalg.hpp"
#include "isoflow/random.hpp"

namespace isoflow {

/// Parameters of the Gaussian elliptic ensemble.
///
/// `beta` selects the field (1 real, 2 complex). `tau` interpolates between
/// skew (tau = -1) and symmetric/Hermitian (tau = 1) matrices; tau = 0 is
/// Ginibre. The ensemble is sampled only through the symmetric/skew
/// decomposition, so both endpoints of [-1, 1] are admissible.
struct EnsembleParams {
  int dim = 1;
  int beta = 1;
  double tau = 0.0;

  /// Throws ParameterError unless dim >= 1, beta in {1, 2}, tau in [-1, 1].
  void validate() const;
};

/// Coefficients of a general isotropic Gaussian covariance tensor.
///
/// Real:    E[X_ij X_kl]  = a δ_ij δ_kl + b δ_ik δ_jl + c δ_il δ_jk.
/// Complex: E[X_ij X_kl]  = a δ_ij δ_kl + b δ_il δ_jk,
///          E[X*_ij X_kl] = c δ_ij δ_kl + d δ_ik δ_jl.
///
/// Only the elliptic choice (from_elliptic) is used by the simulator; the
/// general form exists to test isotropy and the decomposition itself.
struct IsotropyDecomposition {
  int beta = 1;
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 0.0;

  static IsotropyDecomposition from_elliptic(int beta, double tau);

  /// Positivity constraints on the pair correlations: real a+b+c >= 0 and
  /// b±c >= 0; complex c+d±(a+b) >= 0 and d±b >= 0.
  bool admissible() const;

  /// Additionally required for sampling as a sum of independent pieces:
  /// a >= 0 (real) or c >= |a| (complex).
  bool samplable() const;
};

struct IndexQuad {
  int i, j, k, l;
};

/// One draw from the ensemble. Real draws are stored as real matrices.
class GaussianMatrix {
public:
  GaussianMatrix(EnsembleParams params, RealMatrix entries);
  GaussianMatrix(EnsembleParams params, ComplexMatrix entries);

  const EnsembleParams& params() const noexcept { return params_; }
  int dim() const noexcept { return params_.dim; }
  bool is_real() const noexcept { return std::holds_alternative<RealMatrix>(entries_); }

  Complex operator()(int i, int j) const;
  const RealMatrix& real() const { return std::get<RealMatrix>(entries_); }
  const ComplexMatrix& complex() const { return std::get<ComplexMatrix>(entries_); }
  ComplexMatrix as_complex() const;

private:
  EnsembleParams params_;
  std::variant<RealMatrix, ComplexMatrix> entries_;
};

/// Writes X = sqrt((1+τ)/2) H + sqrt((1-τ)/2) A into `out`, with H a GOE/GUE
/// matrix and A an independent skew-GOE/skew-GUE matrix. Hot path for the
/// simulator; `Scalar` must match `params.beta`.
template <class Scalar>
void sample_into(Matrix<Scalar>& out, const EnsembleParams& params, RandomStream& rng);

GaussianMatrix sample(const EnsembleParams& params, RandomStream& rng);

/// Draw with a general isotropic covariance (test surface).
GaussianMatrix sample(const IsotropyDecomposition& decomposition, int dim, RandomStream& rng);

/// Closed-form elliptic covariance. With `conjugate_first`, returns
/// E[conj(X_ij) X_kl]; otherwise E[X_ij X_kl]. For beta = 1 both coincide.
double covariance(const EnsembleParams& params, const IndexQuad& idx, bool conjugate_first);

/// Closed-form covariance of a general isotropic tensor.
double covariance(const IsotropyDecomposition& decomposition, const IndexQuad& idx,
                  bool conjugate_first);

/// Sample-mean estimate of a covariance with its standard error. The
/// imaginary part is reported separately; all model covariances are real.
struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double imag = 0.0;
  double imag_std_error = 0.0;
  std::size_t samples = 0;
};

CovarianceEstimate estimate_covariance(std::span<const GaussianMatrix> samples,
                                       const IndexQuad& idx, bool conjugate_first);

/// Pooled estimate over several index quadruples sharing one model value:
/// each sample contributes the average product over `indices`.
CovarianceEstimate estimate_covariance(std::span<const GaussianMatrix> samples,
                                       std::span<const IndexQuad> indices,
                                       bool conjugate_first);

/// Haar-distributed orthogonal (beta 1) or unitary (beta 2) matrix.
ComplexMatrix haar_matrix(int dim, int beta, RandomStream& rng);

/// U^† X U, keeping the field of X.
GaussianMatrix conjugate_by(const GaussianMatrix& x, const ComplexMatrix& u);

} // namespace isoflow
