#include "isoflow/exact_solution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "isoflow/elliptic_ensemble.hpp"
#include "isoflow/errors.hpp"
#include "isoflow/spectral_theory.hpp"

namespace isoflow {

double SignedLog::value() const noexcept {
  return sign == 0 ? 0.0 : sign * std::exp(log_abs);
}

ExactModel::ExactModel(int dim, double kappa, double mu, double t)
    : dim_(dim), kappa_(kappa), mu_(mu), t_(t) {
  if (dim < 1) throw ParameterError("exact model: dim must be >= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ParameterError("exact model: kappa must be > 0 (the tau = -1 limit is degenerate)");
  }
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("exact model: t must be > 0");
  if (!std::isfinite(mu)) throw ParameterError("exact model: mu must be finite");
  rates_ = lyapunov_infinite(dim, kappa, mu);
}

double ExactModel::weight(int k, double x) const {
  const double v = variance();
  const double d = x - mean(k);
  return std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

double ExactModel::monomial(int j, double x) const {
  return std::pow(x / (2.0 * variance()), j);
}

namespace {

double log_factorial_product(int n) {
  double s = 0.0;
  for (int k = 2; k <= n; ++k) s += std::lgamma(k + 1.0);
  return s;
}

// log|det[N(x_i; m_j, v)]| with its sign. Rows are rescaled by their largest
// exponent before the pivoted LU so that far-out points do not underflow.
SignedLog gaussian_determinant(std::span<const double> x, std::span<const double> means,
                               double v) {
  const auto n = static_cast<Eigen::Index>(x.size());
  RealMatrix a(n, n);
  double shift = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * v);
  for (Eigen::Index i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x[i] - means[j];
      a(i, j) = -0.5 * d * d / v;
      top = std::max(top, a(i, j));
    }
    a.row(i) = (a.row(i).array() - top).exp();
    shift += top;
  }
  const LogDet ld = log_determinant(a);
  if (ld.sign == 0) return {-std::numeric_limits<double>::infinity(), 0};
  return {ld.log_abs + shift, ld.sign};
}

} // namespace

SignedLog jpdf_log(std::span<const double> lambda, const ExactModel& model) {
  const int n = model.dim();
  if (lambda.size() != static_cast<std::size_t>(n)) {
    throw ParameterError("jpdf_log: lambda has wrong length");
  }
  const double scale = 2.0 * model.variance();
  SignedLog out{-log_factorial_product(n), 1};
  // det[(λ_i / 2κt)^{j-1}] = Π_{i<j} (λ_j - λ_i) / 2κt
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (lambda[j] - lambda[i]) / scale;
      if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
      if (d < 0) out.sign = -out.sign;
      out.log_abs += std::log(std::abs(d));
    }
  }
  std::vector<double> means(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) means[k] = model.mean(k);
  const SignedLog g = gaussian_determinant(lambda, means, model.variance());
  if (g.sign == 0) return g;
  out.log_abs += g.log_abs;
  out.sign *= g.sign;
  return out;
}

SignedLog jpdf_general_log(std::span<const double> lambda, std::span<const double> nu,
                           const ExactModel& model) {
  const int n = model.dim();
  if (lambda.size() != static_cast<std::size_t>(n) || nu.size() != static_cast<std::size_t>(n)) {
    throw ParameterError("jpdf_general_log: lambda and nu must have length N");
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(nu[i] < nu[i + 1])) {
      throw ParameterError(
          "jpdf_general_log: nu must be strictly increasing; use jpdf_log for nu = 0");
    }
  }
  const double shift = model.mu() * model.t();
  std::vector<double> y(lambda.begin(), lambda.end());
  for (double& v : y) v += shift;

  SignedLog out{-ground_state_energy(n, model.kappa()) * model.t() - std::lgamma(n + 1.0), 1};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = lambda[j] - lambda[i];
      if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
      if (d < 0) out.sign = -out.sign;
      out.log_abs += log_abs_sinh(d) - log_abs_sinh(nu[j] - nu[i]);
    }
  }
  const SignedLog g = gaussian_determinant(y, nu, model.variance());
  if (g.sign == 0) return g;
  out.log_abs += g.log_abs;
  out.sign *= g.sign;
  return out;
}

double gaussian_moment(int n, double mean, double variance) {
  if (n < 0) throw ParameterError("gaussian_moment: n must be >= 0");
  if (!(variance >= 0.0)) throw ParameterError("gaussian_moment: variance must be >= 0");
  double prev = 1.0; // m_0
  if (n == 0) return prev;
  double cur = mean; // m_1
  for (int k = 2; k <= n; ++k) {
    const double next = mean * cur + (k - 1) * variance * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

GramKernel build_kernel(const ExactModel& model) {
  const int n = model.dim();
  const double s = 2.0 * model.variance();
  // Moments of the scaled variable x / 2κt under each weight.
  const double var = model.variance() / (s * s);
  GramKernel k(model);
  k.gram_.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < n; ++c) k.gram_(j, c) = gaussian_moment(j, model.mean(c) / s, var);
  }
  Eigen::PartialPivLU<RealMatrix> lu(k.gram_);
  k.rcond_ = lu.rcond();
  if (!(k.rcond_ >= 1e-14)) {
    throw ConditioningError("build_kernel: Gram matrix is numerically singular (rcond " +
                            std::to_string(k.rcond_) + "); reduce kappa*t*N");
  }
  k.inverse_.resize(n, n);
  for (int c = 0; c < n; ++c) {
    k.inverse_.col(c) = lu.solve(RealMatrix::Identity(n, n).col(c));
  }
  return k;
}

double GramKernel::operator()(double x, double y) const {
  const int n = model_.dim();
  Eigen::VectorXd p(n), w(n);
  for (int j = 0; j < n; ++j) {
    p(j) = model_.monomial(j, x);
    w(j) = model_.weight(j, y);
  }
  return w.dot(inverse_ * p);
}

double level_density(double x, const GramKernel& kernel) { return kernel(x, x); }

namespace {

// Lower and upper truncated moments ∫ u^j N(u; m, v) over u <= x and u > x.
void truncated_moments(int n, double m, double v, double x, std::vector<double>& lower,
                       std::vector<double>& upper) {
  lower.assign(static_cast<std::size_t>(n), 0.0);
  upper.assign(static_cast<std::size_t>(n), 0.0);
  const double sd = std::sqrt(v);
  const double z = (x - m) / sd;
  const double phi = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  lower[0] = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  upper[0] = 0.5 * std::erfc(z / std::numbers::sqrt2);
  double xpow = 1.0; // x^{j-1}
  for (int j = 1; j < n; ++j) {
    const double lo2 = j >= 2 ? lower[j - 2] : 0.0;
    const double up2 = j >= 2 ? upper[j - 2] : 0.0;
    lower[j] = m * lower[j - 1] + (j - 1) * v * lo2 - v * xpow * phi;
    upper[j] = m * upper[j - 1] + (j - 1) * v * up2 + v * xpow * phi;
    xpow *= x;
  }
}

} // namespace

std::vector<double> ordered_cdf(double x, const GramKernel& kernel) {
  const ExactModel& model = kernel.model();
  const int n = model.dim();
  const double s = 2.0 * model.variance();
  const double var = model.variance() / (s * s);
  RealMatrix lower(n, n), upper(n, n);
  std::vector<double> lo, up;
  for (int c = 0; c < n; ++c) {
    truncated_moments(n, model.mean(c) / s, var, x / s, lo, up);
    for (int j = 0; j < n; ++j) {
      lower(j, c) = lo[j];
      upper(j, c) = up[j];
    }
  }
  const double det_g = kernel.gram().determinant();
  // Coefficients of the degree-N polynomial z -> det(z G(x) + G^c(x)) / det G
  // from its values at the (N+1)-th roots of unity.
  const int m = n + 1;
  std::vector<Complex> values(static_cast<std::size_t>(m));
  for (int q = 0; q < m; ++q) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * q / m);
    const ComplexMatrix a = z * lower.cast<Complex>() + upper.cast<Complex>();
    values[q] = a.determinant() / det_g;
  }
  std::vector<double> exactly(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    Complex acc = 0.0;
    for (int q = 0; q < m; ++q) acc += values[q] * std::polar(1.0, -2.0 * std::numbers::pi * q * r / m);
    exactly[r] = acc.real() / m;
  }
  // P(λ_(k) <= x) = P(at least k exponents <= x)
  std::vector<double> cdf(static_cast<std::size_t>(n));
  double tail = 0.0;
  for (int k = n; k >= 1; --k) {
    tail += exactly[k];
    cdf[k - 1] = std::clamp(tail, 0.0, 1.0);
  }
  return cdf;
}

std::vector<double> sample_gue_external_source(const ExactModel& model, RandomStream& rng) {
  const int n = model.dim();
  for (int k = 0; k + 1 < n; ++k) {
    if (!(model.rates()[k] < model.rates()[k + 1])) {
      throw ParameterError("gue source: source eigenvalues must be distinct");
    }
  }
  ComplexMatrix h;
  sample_into(h, EnsembleParams{n, 2, 1.0}, rng);
  h *= std::sqrt(model.variance());
  for (int k = 0; k < n; ++k) h(k, k) += model.mean(k);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

} // namespace isoflow
