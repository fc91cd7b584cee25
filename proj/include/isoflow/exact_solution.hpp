#pragma once

#include <span>
#include <vector>

#include "isoflow/linalg.hpp"
#include "isoflow/random.hpp"

namespace isoflow {

/// Signed value kept as log|v| and sign(v); sign 0 means v = 0.
struct SignedLog {
  double log_abs = 0.0;
  int sign = 1;

  double value() const noexcept;
};

/// Closed-form β = 2 objects at time t: rates μ̃_k, Gaussian weights
/// w_k(x) = N(x; μ̃_k t, κt) and scaled monomials p_j(x) = (x / 2κt)^{j-1}.
class ExactModel {
public:
  /// Throws ParameterError unless dim >= 1, kappa > 0, t > 0.
  ExactModel(int dim, double kappa, double mu, double t);

  int dim() const noexcept { return dim_; }
  double kappa() const noexcept { return kappa_; }
  double mu() const noexcept { return mu_; }
  double t() const noexcept { return t_; }
  double variance() const noexcept { return kappa_ * t_; }
  /// μ̃_k, ascending.
  const std::vector<double>& rates() const noexcept { return rates_; }
  /// Mean μ̃_k t of weight k (0-based).
  double mean(int k) const { return rates_[static_cast<std::size_t>(k)] * t_; }

  double weight(int k, double x) const;
  double monomial(int j, double x) const;

private:
  int dim_;
  double kappa_;
  double mu_;
  double t_;
  std::vector<double> rates_;
};

/// Joint density of the (unordered) exponents,
///   Π_k 1/k! · det[p_j(λ_i)] · det[w_j(λ_i)],
/// normalized to one over R^N. Both determinants are evaluated in log form;
/// the Gaussian one with per-row rescaling before pivoted LU.
/// Coincident λ's give sign 0.
SignedLog jpdf_log(std::span<const double> lambda, const ExactModel& model);

/// Density at time t started from distinct exponents ν_1 < ... < ν_N:
///   e^{-V₀ t}/N! · det[g_j(λ_i + μt)] · Π_{i<j} sinh(λ_j-λ_i)/sinh(ν_j-ν_i),
/// g_j the heat kernel N(·; ν_j, κt) and V₀ = κN(N²-1)/6. The model's rates
/// are not used. Throws ParameterError for non-increasing ν; the coincident
/// limit ν = 0 is jpdf_log.
SignedLog jpdf_general_log(std::span<const double> lambda, std::span<const double> nu,
                           const ExactModel& model);

/// Raw moment E[X^n] of N(mean, variance).
double gaussian_moment(int n, double mean, double variance);

/// Polynomial-ensemble kernel K(x,y) = Σ_{j,k} p_j(x) (G^{-1})_{kj} w_k(y),
/// G_jk = ∫ p_j w_k.
class GramKernel {
public:
  const ExactModel& model() const noexcept { return model_; }
  const RealMatrix& gram() const noexcept { return gram_; }
  const RealMatrix& inverse_gram() const noexcept { return inverse_; }
  /// Reciprocal condition estimate of G (LU based).
  double rcond() const noexcept { return rcond_; }
  bool well_conditioned() const noexcept { return rcond_ > 1e-10; }

  double operator()(double x, double y) const;

private:
  friend GramKernel build_kernel(const ExactModel& model);
  explicit GramKernel(const ExactModel& model) : model_(model) {}

  ExactModel model_;
  RealMatrix gram_;
  RealMatrix inverse_;
  double rcond_ = 0.0;
};

/// Throws ConditioningError when G is numerically singular (rcond < 1e-14).
GramKernel build_kernel(const ExactModel& model);

/// One-point function K(x,x); integrates to N.
double level_density(double x, const GramKernel& kernel);

/// CDFs of the ordered exponents λ_(1) <= ... <= λ_(N) at x. Uses
///   E Π_i (z 1[λ_i <= x] + 1[λ_i > x]) = det(z G(x) + G^c(x)) / det G
/// with G(x), G^c(x) the Gram matrices restricted to (-∞, x] and (x, ∞).
std::vector<double> ordered_cdf(double x, const GramKernel& kernel);

/// Sorted eigenvalues of diag(μ̃_k t) + sqrt(κt) H with H from the GUE
/// normalized to E|H_ij|² = 1.
std::vector<double> sample_gue_external_source(const ExactModel& model, RandomStream& rng);

} // namespace isoflow
