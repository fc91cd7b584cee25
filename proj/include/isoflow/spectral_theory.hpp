#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "isoflow/flow_simulator.hpp"

namespace isoflow {

/// Infinite-time Lyapunov exponents μ̃_k = κ(2k-1-N) - μ, ascending.
std::vector<double> lyapunov_infinite(const FlowParams& params);
std::vector<double> lyapunov_infinite(int dim, double kappa, double mu);

/// Limiting density of the scaled exponents under σ² = 1/N: uniform with
/// height 1/(1+τ) on [-μ-(1+τ)/2, -μ+(1+τ)/2]. τ = -1 is a point mass and
/// raises ParameterError.
double square_law_density(double x, double tau, double mu);
double square_law_cdf(double x, double tau, double mu);

/// Kolmogorov distance between the empirical CDF of `values` and the square law.
double square_law_sup_distance(std::span<const double> values, double tau, double mu);

enum class Stability { stable, unstable, critical };
std::string_view to_string(Stability s) noexcept;

struct PhasePoint {
  double tau = 0.0;
  double mu = 0.0;
};

/// Sign of μ - (1+τ)/2: positive stable, negative unstable, zero critical.
Stability classify(const PhasePoint& p) noexcept;

/// Density as a function of (λ, t).
using DensityFn = std::function<double(std::span<const double>, double)>;

struct FpResidual {
  /// ∂_t ρ - L ρ by central differences.
  double residual = 0.0;
  /// Sum of magnitudes of the individual terms; a natural scale for `residual`.
  double scale = 0.0;
};

/// Residual of the exponent Fokker-Planck equation
///   ∂_t ρ = (κ/β) Σ_i ∂_i(∂_i ρ + β ρ ∂_i Ω) + μ Σ_i ∂_i ρ,
///   ∂_i Ω = -Σ_{j≠i} coth(λ_i - λ_j),
/// with step h in every λ_i and in t. Throws SingularityError when two
/// λ's are closer than 10h and ParameterError unless t > h.
FpResidual fp_generator_apply(const DensityFn& density, std::span<const double> point, double t,
                              const FlowParams& params, double h = 1e-3);

/// Residuals at steps h and h/2 with the observed order log2(|r_h| / |r_{h/2}|)
/// and a Richardson estimate of the truncation error at h/2. `warning` is set
/// when that estimate exceeds 1e-3 of the term scale.
struct RichardsonReport {
  double r_h = 0.0;
  double r_h2 = 0.0;
  double observed_order = 0.0;
  double truncation_estimate = 0.0;
  double scale = 0.0;
  bool warning = false;
};

RichardsonReport fp_residual_richardson(const DensityFn& density, std::span<const double> point,
                                        double t, const FlowParams& params, double h = 1e-3);

/// coth(a-b)coth(c-b) + coth(b-c)coth(a-c) + coth(c-a)coth(b-a); identically 1.
double cyclic_coth_sum(double a, double b, double c);

/// Potential of the ground-state transformed exponent dynamics,
///   V(λ) = κ(β-2)/2 Σ_{i<j} coth²(λ_i-λ_j) + κβ N(N-1)(N-2)/12 + κ N(N-1)/2,
/// i.e. the heat-equation form ∂_t ψ = (κ/β)Δψ - Vψ of ρ = e^{-βΩ/2} ψ.
/// For β = 2 the pair term drops and V = κN(N²-1)/6 = U/2.
double potential_energy(std::span<const double> lambda, const FlowParams& params);

/// U = κ(N+1)N(N-1)/3, the normalization with Σ_k μ̃_k² = κU at μ = 0.
double constant_U(const FlowParams& params);
double constant_U(int dim, double kappa);

/// The β = 2 value of V, κN(N²-1)/6.
double ground_state_energy(int dim, double kappa);

} // namespace isoflow
