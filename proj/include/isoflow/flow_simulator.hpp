#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "isoflow/elliptic_ensemble.hpp"
#include "isoflow/linalg.hpp"
#include "isoflow/random.hpp"

namespace isoflow {

/// Model parameters of the linearized flow dΠ = (σ dB - μ dt) Π.
struct FlowParams {
  EnsembleParams ensemble;
  double sigma = 1.0;
  double mu = 0.0;

  /// κ = (1+τ)σ²/2; zero exactly when τ = -1 or σ = 0.
  double kappa() const noexcept { return 0.5 * (1.0 + ensemble.tau) * sigma * sigma; }
  int dim() const noexcept { return ensemble.dim; }
  int beta() const noexcept { return ensemble.beta; }

  /// Ensemble checks plus sigma >= 0 and finite mu.
  void validate() const;
};

enum class Scheme { ito, stratonovich };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme) noexcept;

/// Sorted finite-time exponents λ_1 <= ... <= λ_N at time t.
struct ExponentSpectrum {
  double t = 0.0;
  std::vector<double> exponents;
};

/// Evolution state for one field.
///
/// The product is stored as Π = exp(drift_log) · W · diag(exp(ℓ)) · T where
/// W is orthonormal right after a renormalization (and carries the pending
/// increments in between), ℓ = log_r_diag, and T is upper triangular with
/// unit-modulus diagonal. Only the drift-free part is ever multiplied; the
/// drift enters as the exact scalar factor exp(-μ t).
template <class Scalar>
struct BasicEvolution {
  double time = 0.0;
  std::int64_t step = 0;
  double drift_log = 0.0;
  bool pending = false;
  Matrix<Scalar> working;
  std::vector<double> log_r_diag;
  Matrix<Scalar> triangular;
  std::optional<Matrix<Scalar>> raw;

  // Scratch reused by every step.
  Matrix<Scalar> noise;
  Matrix<Scalar> increment;
  Matrix<Scalar> product;

  explicit BasicEvolution(int dim = 1, bool keep_raw = false);
};

/// Field-erased evolution state.
class EvolutionState {
public:
  using Real = BasicEvolution<double>;
  using Cplx = BasicEvolution<Complex>;

  /// Π(0) = 1. With `keep_raw`, the unfactored drift-free product is also
  /// carried for direct (short-run) exponent extraction.
  static EvolutionState identity(int dim, int beta, bool keep_raw = false);
  /// Wraps an explicitly prepared state (tests, restarts).
  explicit EvolutionState(std::variant<Real, Cplx> v) : v_(std::move(v)) {}

  int dim() const noexcept;
  int beta() const noexcept { return std::holds_alternative<Real>(v_) ? 1 : 2; }
  double time() const noexcept;
  std::int64_t step() const noexcept;
  double drift_log() const noexcept;
  bool pending() const noexcept;
  const std::vector<double>& log_r_diag() const noexcept;
  bool has_raw() const noexcept;

  /// Working factor; orthonormal whenever `pending()` is false.
  ComplexMatrix q_factor() const;
  /// Unfactored product including the drift factor. Requires has_raw().
  ComplexMatrix raw_matrix() const;
  /// Π reassembled from its factors (may overflow for long runs).
  ComplexMatrix product() const;

  template <class F> decltype(auto) visit(F&& f) { return std::visit(std::forward<F>(f), v_); }
  template <class F> decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), v_);
  }

private:
  std::variant<Real, Cplx> v_;
};

/// Scalar c with ½σ² E[dB dB] = c·1·dt: ½σ²(1+τN) for β = 1, ½σ²τN for β = 2.
double ito_correction(const FlowParams& params);

/// Drift-free one-step multiplier: 1 + c dt + σ√dt X (Itô) or
/// 1 + Y + Y²/2 with Y = σ√dt X (Stratonovich, Heun predictor-corrector).
template <class Scalar>
void increment_into(Matrix<Scalar>& out, Matrix<Scalar>& noise, const FlowParams& params,
                    double dt, Scheme scheme, RandomStream& rng);

/// Left-multiplies the state by one increment and advances the time by dt.
void step_ito(EvolutionState& state, const FlowParams& params, double dt, RandomStream& rng);
void step_stratonovich(EvolutionState& state, const FlowParams& params, double dt,
                       RandomStream& rng);
void step(EvolutionState& state, const FlowParams& params, double dt, Scheme scheme,
          RandomStream& rng);

/// QR-factorizes the working matrix and folds R into (log_r_diag, T).
/// Exact: the represented product is unchanged. Throws
/// DegenerateTrajectoryError on a vanishing R diagonal and
/// NumericalOverflowError on non-finite entries.
void renormalize_qr(EvolutionState& state);

/// Finite-time exponents from the accumulated factors (pending increments
/// are folded into a copy; the state is not modified).
ExponentSpectrum exponents(const EvolutionState& state);

/// Exponents from ½ log eig(Π^† Π) of the raw product. Requires has_raw().
ExponentSpectrum direct_exponents(const EvolutionState& state);

/// Sorted ℓ_k + drift_log, the classical Benettin estimate. Its rates
/// ℓ_k / t converge to the Lyapunov exponents but differ from the exact
/// finite-time exponents by O(1) at finite t.
ExponentSpectrum benettin_exponents(const EvolutionState& state);

/// Renormalize once the expected per-interval growth κ·dt·N·period reaches
/// 0.01: period = max(1, floor(0.01 / (κ dt N))), capped at 10^6.
std::int64_t default_qr_period(const FlowParams& params, double dt);

/// Advances `n_steps` steps. Step number s draws its noise from
/// key.child(s) and a renormalization follows every step s with
/// s % qr_period == 0, so splitting a run into pieces is bit-identical to
/// one pass.
void advance(EvolutionState& state, const FlowParams& params, double dt, std::int64_t n_steps,
             Scheme scheme, std::int64_t qr_period, const StreamKey& key);

struct RunOptions {
  double t_final = 1.0;
  std::int64_t n_steps = 1000;
  Scheme scheme = Scheme::ito;
  /// 0 selects default_qr_period.
  std::int64_t qr_period = 0;
  /// Times in (0, t_final], strictly increasing, each rounded to the nearest
  /// step. Empty means the final time only.
  std::vector<double> checkpoints;
};

/// One trajectory from Π(0) = 1. Errors are rethrown as TrajectoryError
/// carrying `trajectory_id` and the failing step.
std::vector<ExponentSpectrum> run_trajectory(const FlowParams& params, const RunOptions& options,
                                             const StreamKey& key, long trajectory_id = 0);

} // namespace isoflow
