#include "isoflow/flow_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isoflow/errors.hpp"

namespace isoflow {

void FlowParams::validate() const {
  ensemble.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("flow: sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  if (!std::isfinite(mu)) throw ParameterError("flow: mu must be finite");
}

Scheme parse_scheme(std::string_view name) {
  if (name == "ito") return Scheme::ito;
  if (name == "stratonovich") return Scheme::stratonovich;
  throw ParameterError("unknown scheme '" + std::string(name) + "' (expected ito|stratonovich)");
}

std::string_view to_string(Scheme scheme) noexcept {
  return scheme == Scheme::ito ? "ito" : "stratonovich";
}

template <class Scalar>
BasicEvolution<Scalar>::BasicEvolution(int dim, bool keep_raw)
    : working(Matrix<Scalar>::Identity(dim, dim)),
      log_r_diag(static_cast<std::size_t>(dim), 0.0),
      triangular(Matrix<Scalar>::Identity(dim, dim)) {
  if (keep_raw) raw = Matrix<Scalar>::Identity(dim, dim);
}

template struct BasicEvolution<double>;
template struct BasicEvolution<Complex>;

EvolutionState EvolutionState::identity(int dim, int beta, bool keep_raw) {
  if (dim < 1) throw ParameterError("evolution: dim must be >= 1");
  if (beta == 1) return EvolutionState(Real(dim, keep_raw));
  if (beta == 2) return EvolutionState(Cplx(dim, keep_raw));
  throw ParameterError("evolution: beta must be 1 or 2");
}

int EvolutionState::dim() const noexcept {
  return visit([](const auto& s) { return static_cast<int>(s.working.rows()); });
}
double EvolutionState::time() const noexcept {
  return visit([](const auto& s) { return s.time; });
}
std::int64_t EvolutionState::step() const noexcept {
  return visit([](const auto& s) { return s.step; });
}
double EvolutionState::drift_log() const noexcept {
  return visit([](const auto& s) { return s.drift_log; });
}
bool EvolutionState::pending() const noexcept {
  return visit([](const auto& s) { return s.pending; });
}
const std::vector<double>& EvolutionState::log_r_diag() const noexcept {
  return visit([](const auto& s) -> const std::vector<double>& { return s.log_r_diag; });
}
bool EvolutionState::has_raw() const noexcept {
  return visit([](const auto& s) { return s.raw.has_value(); });
}

ComplexMatrix EvolutionState::q_factor() const {
  return visit([](const auto& s) -> ComplexMatrix { return s.working.template cast<Complex>(); });
}

ComplexMatrix EvolutionState::raw_matrix() const {
  return visit([](const auto& s) -> ComplexMatrix {
    if (!s.raw) throw ParameterError("raw_matrix: state was created without keep_raw");
    return std::exp(s.drift_log) * s.raw->template cast<Complex>();
  });
}

ComplexMatrix EvolutionState::product() const {
  return visit([](const auto& s) -> ComplexMatrix {
    ComplexMatrix r = s.triangular.template cast<Complex>();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      r.row(i) *= std::exp(s.log_r_diag[static_cast<std::size_t>(i)]);
    }
    return std::exp(s.drift_log) * (s.working.template cast<Complex>() * r);
  });
}

double ito_correction(const FlowParams& params) {
  const double n = params.dim();
  const double tau = params.ensemble.tau;
  const double half_s2 = 0.5 * params.sigma * params.sigma;
  return params.beta() == 1 ? half_s2 * (1.0 + tau * n) : half_s2 * tau * n;
}

template <class Scalar>
void increment_into(Matrix<Scalar>& out, Matrix<Scalar>& noise, const FlowParams& params,
                    double dt, Scheme scheme, RandomStream& rng) {
  sample_into(noise, params.ensemble, rng);
  const double amp = params.sigma * std::sqrt(dt);
  if (scheme == Scheme::ito) {
    out = amp * noise;
    out.diagonal().array() += 1.0 + ito_correction(params) * dt;
    return;
  }
  out.noalias() = (0.5 * amp * amp) * (noise * noise);
  out += amp * noise;
  out.diagonal().array() += 1.0;
}

template void increment_into<double>(RealMatrix&, RealMatrix&, const FlowParams&, double, Scheme,
                                     RandomStream&);
template void increment_into<Complex>(ComplexMatrix&, ComplexMatrix&, const FlowParams&, double,
                                      Scheme, RandomStream&);

namespace {

template <class Scalar>
void check_compatible(const BasicEvolution<Scalar>& s, const FlowParams& params) {
  constexpr int field = std::is_same_v<Scalar, double> ? 1 : 2;
  if (params.beta() != field) throw ParameterError("step: state field does not match beta");
  if (s.working.rows() != params.dim()) throw ParameterError("step: state dim does not match N");
}

template <class Scalar>
void step_impl(BasicEvolution<Scalar>& s, const FlowParams& params, double dt, Scheme scheme,
               RandomStream& rng) {
  increment_into(s.increment, s.noise, params, dt, scheme, rng);
  s.product.noalias() = s.increment * s.working;
  s.working.swap(s.product);
  if (s.raw) {
    s.product.noalias() = s.increment * *s.raw;
    s.raw->swap(s.product);
  }
  if (!s.working.allFinite()) {
    throw NumericalOverflowError(
        "evolution matrix overflowed; renormalize by QR more often (smaller qr_period)");
  }
  s.pending = true;
  s.time += dt;
  ++s.step;
  s.drift_log = -params.mu * s.time;
}

// Folds W = Q R into the accumulated factors: ℓ_i += log|R_ii| and
// T'_ik = Σ_{m>=i} R_im exp(ℓ_m - ℓ'_i) T_mk, leaving T' with unit-modulus
// diagonal. Returns Q through `working`.
template <class Scalar>
void fold_qr(Matrix<Scalar>& working, std::vector<double>& ell, Matrix<Scalar>& tri) {
  if (!working.allFinite()) {
    throw NumericalOverflowError("QR renormalization: non-finite working matrix");
  }
  const Eigen::Index n = working.rows();
  Eigen::HouseholderQR<Matrix<Scalar>> qr(working);
  const Matrix<Scalar>& f = qr.matrixQR();
  std::vector<double> new_ell(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(f(i, i));
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DegenerateTrajectoryError("QR renormalization: R diagonal vanished at index " +
                                      std::to_string(i));
    }
    new_ell[static_cast<std::size_t>(i)] = ell[static_cast<std::size_t>(i)] + std::log(a);
  }
  Matrix<Scalar> next = Matrix<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = new_ell[static_cast<std::size_t>(i)];
    for (Eigen::Index m = i; m < n; ++m) {
      const Scalar coef = f(i, m) * std::exp(ell[static_cast<std::size_t>(m)] - li);
      next.row(i).tail(n - m) += coef * tri.row(m).tail(n - m);
    }
  }
  if (!next.allFinite()) {
    throw NumericalOverflowError("QR renormalization: triangular accumulator overflowed");
  }
  tri.swap(next);
  ell.swap(new_ell);
  working = qr.householderQ();
}

template <class Scalar>
void renormalize_impl(BasicEvolution<Scalar>& s) {
  if (!s.pending) return;
  fold_qr(s.working, s.log_r_diag, s.triangular);
  s.pending = false;
}

template <class Scalar>
std::vector<double> exponents_impl(const BasicEvolution<Scalar>& s) {
  std::vector<double> lam;
  if (s.pending) {
    Matrix<Scalar> w = s.working;
    std::vector<double> ell = s.log_r_diag;
    Matrix<Scalar> tri = s.triangular;
    fold_qr(w, ell, tri);
    lam = graded_log_singular_values<Scalar>(ell, tri);
  } else {
    lam = graded_log_singular_values<Scalar>(s.log_r_diag, s.triangular);
  }
  for (double& v : lam) {
    v += s.drift_log;
    if (!std::isfinite(v)) throw NumericalOverflowError("exponents: non-finite value");
  }
  return lam;
}

template <class Scalar>
void advance_impl(BasicEvolution<Scalar>& s, const FlowParams& params, double dt,
                  std::int64_t n_steps, Scheme scheme, std::int64_t qr_period,
                  const StreamKey& key, long trajectory_id) {
  check_compatible(s, params);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const std::int64_t index = s.step + 1;
    try {
      RandomStream rng(key.child(static_cast<std::uint64_t>(s.step)));
      step_impl(s, params, dt, scheme, rng);
      if (s.step % qr_period == 0) renormalize_impl(s);
    } catch (const TrajectoryError&) {
      throw;
    } catch (const Error& e) {
      throw TrajectoryError(trajectory_id, index, e.what());
    }
  }
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("step: dt must be > 0");
}

} // namespace

void step(EvolutionState& state, const FlowParams& params, double dt, Scheme scheme,
          RandomStream& rng) {
  check_dt(dt);
  state.visit([&](auto& s) {
    check_compatible(s, params);
    step_impl(s, params, dt, scheme, rng);
  });
}

void step_ito(EvolutionState& state, const FlowParams& params, double dt, RandomStream& rng) {
  step(state, params, dt, Scheme::ito, rng);
}

void step_stratonovich(EvolutionState& state, const FlowParams& params, double dt,
                       RandomStream& rng) {
  step(state, params, dt, Scheme::stratonovich, rng);
}

void renormalize_qr(EvolutionState& state) {
  state.visit([](auto& s) { renormalize_impl(s); });
}

ExponentSpectrum exponents(const EvolutionState& state) {
  return {state.time(), state.visit([](const auto& s) { return exponents_impl(s); })};
}

ExponentSpectrum direct_exponents(const EvolutionState& state) {
  return {state.time(), state.visit([](const auto& s) {
            if (!s.raw) throw ParameterError("direct_exponents: state has no raw product");
            std::vector<double> lam = half_log_gram_eigenvalues(*s.raw);
            for (double& v : lam) v += s.drift_log;
            return lam;
          })};
}

ExponentSpectrum benettin_exponents(const EvolutionState& state) {
  std::vector<double> lam = state.log_r_diag();
  std::sort(lam.begin(), lam.end());
  for (double& v : lam) v += state.drift_log();
  return {state.time(), lam};
}

std::int64_t default_qr_period(const FlowParams& params, double dt) {
  constexpr std::int64_t kCap = 1000000;
  const double growth = params.kappa() * dt * params.dim();
  if (!(growth > 0.0)) return kCap;
  const double p = std::floor(0.01 / growth);
  if (p >= static_cast<double>(kCap)) return kCap;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(p));
}

void advance(EvolutionState& state, const FlowParams& params, double dt, std::int64_t n_steps,
             Scheme scheme, std::int64_t qr_period, const StreamKey& key) {
  check_dt(dt);
  if (qr_period < 1) throw ParameterError("advance: qr_period must be >= 1");
  state.visit(
      [&](auto& s) { advance_impl(s, params, dt, n_steps, scheme, qr_period, key, 0); });
}

std::vector<ExponentSpectrum> run_trajectory(const FlowParams& params, const RunOptions& options,
                                             const StreamKey& key, long trajectory_id) {
  params.validate();
  if (!(options.t_final > 0.0) || !std::isfinite(options.t_final)) {
    throw ParameterError("run_trajectory: t_final must be > 0");
  }
  if (options.n_steps < 1) throw ParameterError("run_trajectory: n_steps must be >= 1");
  if (options.qr_period < 0) throw ParameterError("run_trajectory: qr_period must be >= 0");
  const double dt = options.t_final / static_cast<double>(options.n_steps);
  const std::int64_t period =
      options.qr_period > 0 ? options.qr_period : default_qr_period(params, dt);

  std::vector<std::int64_t> marks;
  for (double c : options.checkpoints) {
    if (!(c > 0.0) || c > options.t_final * (1.0 + 1e-12)) {
      throw ParameterError("run_trajectory: checkpoint outside (0, t_final]");
    }
    const auto s = std::clamp<std::int64_t>(std::llround(c / dt), 1, options.n_steps);
    if (!marks.empty() && s <= marks.back()) {
      throw ParameterError("run_trajectory: checkpoints must be increasing and a step apart");
    }
    marks.push_back(s);
  }
  if (marks.empty()) marks.push_back(options.n_steps);

  auto state = EvolutionState::identity(params.dim(), params.beta());
  std::vector<ExponentSpectrum> out;
  out.reserve(marks.size());
  state.visit([&](auto& s) {
    for (std::int64_t mark : marks) {
      advance_impl(s, params, dt, mark - s.step, options.scheme, period, key, trajectory_id);
      try {
        out.push_back({s.time, exponents_impl(s)});
      } catch (const Error& e) {
        throw TrajectoryError(trajectory_id, s.step, e.what());
      }
    }
  });
  return out;
}

} // namespace isoflow
