#include "isoflow/spectral_theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isoflow/errors.hpp"

namespace isoflow {

std::vector<double> lyapunov_infinite(int dim, double kappa, double mu) {
  if (dim < 1) throw ParameterError("lyapunov_infinite: dim must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int k = 1; k <= dim; ++k) out[k - 1] = kappa * (2.0 * k - 1.0 - dim) - mu;
  return out;
}

std::vector<double> lyapunov_infinite(const FlowParams& params) {
  params.validate();
  return lyapunov_infinite(params.dim(), params.kappa(), params.mu);
}

namespace {
void check_square_law(double tau) {
  if (!(tau > -1.0 && tau <= 1.0)) {
    if (tau == -1.0) throw ParameterError("square law: tau = -1 collapses to a point mass at -mu");
    throw ParameterError("square law: tau must lie in (-1, 1]");
  }
}
} // namespace

double square_law_density(double x, double tau, double mu) {
  check_square_law(tau);
  const double half = 0.5 * (1.0 + tau);
  return std::abs(x + mu) <= half ? 1.0 / (1.0 + tau) : 0.0;
}

double square_law_cdf(double x, double tau, double mu) {
  check_square_law(tau);
  const double lo = -mu - 0.5 * (1.0 + tau);
  return std::clamp((x - lo) / (1.0 + tau), 0.0, 1.0);
}

double square_law_sup_distance(std::span<const double> values, double tau, double mu) {
  if (values.empty()) throw ParameterError("square_law_sup_distance: no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = square_law_cdf(v[i], tau, mu);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f),
                  std::abs(static_cast<double>(i) / n - f)});
  }
  return d;
}

std::string_view to_string(Stability s) noexcept {
  switch (s) {
  case Stability::stable: return "stable";
  case Stability::unstable: return "unstable";
  default: return "critical";
  }
}

Stability classify(const PhasePoint& p) noexcept {
  const double margin = p.mu - 0.5 * (1.0 + p.tau);
  if (margin > 0) return Stability::stable;
  if (margin < 0) return Stability::unstable;
  return Stability::critical;
}

namespace {

void check_distinct(std::span<const double> lambda, double min_gap, const char* who) {
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    for (std::size_t j = i + 1; j < lambda.size(); ++j) {
      const double gap = std::abs(lambda[i] - lambda[j]);
      if (!(gap >= min_gap) || gap == 0.0) {
        throw SingularityError(std::string(who) + ": exponents " + std::to_string(i) + " and " +
                               std::to_string(j) + " (nearly) coincide");
      }
    }
  }
}

} // namespace

FpResidual fp_generator_apply(const DensityFn& density, std::span<const double> point, double t,
                              const FlowParams& params, double h) {
  if (!(h > 0.0)) throw ParameterError("fp_generator_apply: h must be > 0");
  if (!(t > h)) throw ParameterError("fp_generator_apply: need t > h");
  const auto n = point.size();
  if (n != static_cast<std::size_t>(params.dim())) {
    throw ParameterError("fp_generator_apply: point has wrong length");
  }
  check_distinct(point, 10.0 * h, "fp_generator_apply");

  const double kappa = params.kappa();
  const double beta = params.beta();
  const double diff = kappa / beta;
  std::vector<double> x(point.begin(), point.end());

  const double rho0 = density(x, t);
  const double dt_term = (density(x, t + h) - density(x, t - h)) / (2.0 * h);

  FpResidual out;
  out.residual = dt_term;
  out.scale = std::abs(dt_term);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double rp = density(x, t);
    x[i] = xi - h;
    const double rm = density(x, t);
    x[i] = xi;
    const double d1 = (rp - rm) / (2.0 * h);
    const double d2 = (rp - 2.0 * rho0 + rm) / (h * h);

    double omega1 = 0.0; // ∂_i Ω
    double omega2 = 0.0; // ∂_i² Ω
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = xi - x[j];
      const double s = std::sinh(d);
      omega1 -= std::cosh(d) / s;
      omega2 += 1.0 / (s * s);
    }
    const double terms[] = {diff * d2, kappa * omega2 * rho0, kappa * omega1 * d1,
                            params.mu * d1};
    for (double v : terms) {
      out.residual -= v;
      out.scale += std::abs(v);
    }
  }
  return out;
}

RichardsonReport fp_residual_richardson(const DensityFn& density, std::span<const double> point,
                                        double t, const FlowParams& params, double h) {
  const FpResidual a = fp_generator_apply(density, point, t, params, h);
  const FpResidual b = fp_generator_apply(density, point, t, params, 0.5 * h);
  RichardsonReport r;
  r.r_h = a.residual;
  r.r_h2 = b.residual;
  r.observed_order = std::log2(std::abs(a.residual) / std::abs(b.residual));
  r.truncation_estimate = std::abs(a.residual - b.residual) / 3.0;
  r.scale = b.scale;
  r.warning = r.truncation_estimate > 1e-3 * r.scale;
  return r;
}

double cyclic_coth_sum(double a, double b, double c) {
  check_distinct(std::vector<double>{a, b, c}, 0.0, "cyclic_coth_sum");
  auto coth = [](double x) { return 1.0 / std::tanh(x); };
  return coth(a - b) * coth(c - b) + coth(b - c) * coth(a - c) + coth(c - a) * coth(b - a);
}

double ground_state_energy(int dim, double kappa) {
  const double n = dim;
  return kappa * n * (n * n - 1.0) / 6.0;
}

double potential_energy(std::span<const double> lambda, const FlowParams& params) {
  const int dim = params.dim();
  if (lambda.size() != static_cast<std::size_t>(dim)) {
    throw ParameterError("potential_energy: lambda has wrong length");
  }
  const double kappa = params.kappa();
  const double beta = params.beta();
  const double n = dim;
  check_distinct(lambda, 0.0, "potential_energy");
  double pair = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const double c = 1.0 / std::tanh(lambda[i] - lambda[j]);
      pair += c * c;
    }
  }
  return kappa * (beta - 2.0) / 2.0 * pair + kappa * beta * n * (n - 1.0) * (n - 2.0) / 12.0 +
         kappa * n * (n - 1.0) / 2.0;
}

double constant_U(int dim, double kappa) {
  const double n = dim;
  return kappa * (n + 1.0) * n * (n - 1.0) / 3.0;
}

double constant_U(const FlowParams& params) { return constant_U(params.dim(), params.kappa()); }

} // namespace isoflow
