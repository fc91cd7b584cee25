#include "isoflow/elliptic_ensemble.hpp"

#include <cmath>
#include <string>

#include "isoflow/errors.hpp"

namespace isoflow {

void EnsembleParams::validate() const {
  if (dim < 1) throw ParameterError("ensemble: dim must be >= 1, got " + std::to_string(dim));
  if (beta != 1 && beta != 2) {
    throw ParameterError("ensemble: beta must be 1 (real) or 2 (complex), got " +
                         std::to_string(beta));
  }
  if (!(tau >= -1.0 && tau <= 1.0)) {
    throw ParameterError("ensemble: tau must lie in [-1, 1], got " + std::to_string(tau));
  }
}

IsotropyDecomposition IsotropyDecomposition::from_elliptic(int beta, double tau) {
  if (beta == 1) return {1, 0.0, 1.0, tau, 0.0};
  return {2, 0.0, tau, 0.0, 1.0};
}

bool IsotropyDecomposition::admissible() const {
  if (beta == 1) return a + b + c >= 0 && b + c >= 0 && b - c >= 0;
  return c + d + (a + b) >= 0 && c + d - (a + b) >= 0 && d + b >= 0 && d - b >= 0;
}

bool IsotropyDecomposition::samplable() const {
  if (!admissible()) return false;
  return beta == 1 ? a >= 0 : c >= std::abs(a);
}

GaussianMatrix::GaussianMatrix(EnsembleParams params, RealMatrix entries)
    : params_(params), entries_(std::move(entries)) {}

GaussianMatrix::GaussianMatrix(EnsembleParams params, ComplexMatrix entries)
    : params_(params), entries_(std::move(entries)) {}

Complex GaussianMatrix::operator()(int i, int j) const {
  if (const auto* r = std::get_if<RealMatrix>(&entries_)) return {(*r)(i, j), 0.0};
  return std::get<ComplexMatrix>(entries_)(i, j);
}

ComplexMatrix GaussianMatrix::as_complex() const {
  if (const auto* r = std::get_if<RealMatrix>(&entries_)) return r->cast<Complex>();
  return std::get<ComplexMatrix>(entries_);
}

namespace {

// out = h_coef * H + a_coef * A with H (skew-)GOE/GUE in the standard
// normalization: off-diagonal E|H_ij|^2 = 1; diagonal variance 2 (GOE) or 1
// (GUE); skew parts have zero (real) or imaginary (complex) diagonal.
void fill_decomposition(RealMatrix& out, int n, double h_coef, double a_coef,
                        RandomStream& rng) {
  out.resize(n, n);
  const double diag_coef = h_coef * std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    out(i, i) = diag_coef * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      const double h = rng.normal();
      const double a = rng.normal();
      out(i, j) = h_coef * h + a_coef * a;
      out(j, i) = h_coef * h - a_coef * a;
    }
  }
}

void fill_decomposition(ComplexMatrix& out, int n, double h_coef, double a_coef,
                        RandomStream& rng) {
  out.resize(n, n);
  const double half = std::sqrt(0.5);
  for (int i = 0; i < n; ++i) {
    const double h = rng.normal();
    const double a = rng.normal();
    out(i, i) = Complex(h_coef * h, a_coef * a);
    for (int j = i + 1; j < n; ++j) {
      const Complex hij(half * rng.normal(), half * rng.normal());
      const Complex aij(half * rng.normal(), half * rng.normal());
      out(i, j) = h_coef * hij + a_coef * aij;
      out(j, i) = h_coef * std::conj(hij) - a_coef * std::conj(aij);
    }
  }
}

double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

void check_indices(const IndexQuad& q, int dim) {
  for (int v : {q.i, q.j, q.k, q.l}) {
    if (v < 0 || v >= dim) {
      throw ParameterError("covariance: index " + std::to_string(v) + " out of range for dim " +
                           std::to_string(dim));
    }
  }
}

} // namespace

template <class Scalar>
void sample_into(Matrix<Scalar>& out, const EnsembleParams& params, RandomStream& rng) {
  constexpr int field = std::is_same_v<Scalar, double> ? 1 : 2;
  if (params.beta != field) throw ParameterError("sample_into: scalar type does not match beta");
  const double tau = params.tau;
  fill_decomposition(out, params.dim, std::sqrt(0.5 * (1.0 + tau)), std::sqrt(0.5 * (1.0 - tau)),
                     rng);
}

template void sample_into<double>(RealMatrix&, const EnsembleParams&, RandomStream&);
template void sample_into<Complex>(ComplexMatrix&, const EnsembleParams&, RandomStream&);

GaussianMatrix sample(const EnsembleParams& params, RandomStream& rng) {
  params.validate();
  if (params.beta == 1) {
    RealMatrix m;
    sample_into(m, params, rng);
    return {params, std::move(m)};
  }
  ComplexMatrix m;
  sample_into(m, params, rng);
  return {params, std::move(m)};
}

GaussianMatrix sample(const IsotropyDecomposition& dec, int dim, RandomStream& rng) {
  if (dim < 1) throw ParameterError("sample: dim must be >= 1");
  if (dec.beta != 1 && dec.beta != 2) throw ParameterError("sample: beta must be 1 or 2");
  if (!dec.samplable()) {
    throw ParameterError("sample: covariance coefficients are not a nonnegative combination");
  }
  // Reported params carry the tau of the equivalent elliptic ensemble when
  // one exists; for general tensors only dim and beta are meaningful.
  EnsembleParams params{dim, dec.beta, dec.beta == 1 ? dec.c : dec.b};
  if (dec.beta == 1) {
    RealMatrix m;
    fill_decomposition(m, dim, std::sqrt(0.5 * (dec.b + dec.c)), std::sqrt(0.5 * (dec.b - dec.c)),
                       rng);
    if (dec.a > 0) m.diagonal().array() += std::sqrt(dec.a) * rng.normal();
    return {params, std::move(m)};
  }
  ComplexMatrix m;
  fill_decomposition(m, dim, std::sqrt(0.5 * (dec.d + dec.b)), std::sqrt(0.5 * (dec.d - dec.b)),
                     rng);
  // Scalar part z with E|z|^2 = c and E z^2 = a.
  const double re = std::sqrt(0.5 * (dec.c + dec.a));
  const double im = std::sqrt(0.5 * (dec.c - dec.a));
  const Complex z(re * rng.normal(), im * rng.normal());
  m.diagonal().array() += z;
  return {params, std::move(m)};
}

double covariance(const EnsembleParams& params, const IndexQuad& q, bool conjugate_first) {
  params.validate();
  check_indices(q, params.dim);
  if (params.beta == 1 || !conjugate_first) {
    const double transposed = params.tau * delta(q.i, q.l) * delta(q.j, q.k);
    if (params.beta == 2) return transposed;
    return delta(q.i, q.k) * delta(q.j, q.l) + transposed;
  }
  return delta(q.i, q.k) * delta(q.j, q.l);
}

double covariance(const IsotropyDecomposition& dec, const IndexQuad& q, bool conjugate_first) {
  const double trace = delta(q.i, q.j) * delta(q.k, q.l);
  const double same = delta(q.i, q.k) * delta(q.j, q.l);
  const double transposed = delta(q.i, q.l) * delta(q.j, q.k);
  if (dec.beta == 1) return dec.a * trace + dec.b * same + dec.c * transposed;
  if (conjugate_first) return dec.c * trace + dec.d * same;
  return dec.a * trace + dec.b * transposed;
}

CovarianceEstimate estimate_covariance(std::span<const GaussianMatrix> samples,
                                       const IndexQuad& idx, bool conjugate_first) {
  return estimate_covariance(samples, std::span<const IndexQuad>(&idx, 1), conjugate_first);
}

CovarianceEstimate estimate_covariance(std::span<const GaussianMatrix> samples,
                                       std::span<const IndexQuad> indices,
                                       bool conjugate_first) {
  if (samples.size() < 2) throw ParameterError("estimate_covariance: need at least 2 samples");
  if (indices.empty()) throw ParameterError("estimate_covariance: no index quadruples");
  const int dim = samples.front().dim();
  for (const auto& q : indices) check_indices(q, dim);

  // Welford accumulation for the real and imaginary parts.
  double mean_re = 0, mean_im = 0, m2_re = 0, m2_im = 0;
  std::size_t n = 0;
  for (const auto& x : samples) {
    if (x.dim() != dim) throw ParameterError("estimate_covariance: samples differ in shape");
    Complex acc = 0;
    for (const auto& q : indices) {
      const Complex first = conjugate_first ? std::conj(x(q.i, q.j)) : x(q.i, q.j);
      acc += first * x(q.k, q.l);
    }
    acc /= static_cast<double>(indices.size());
    ++n;
    const double dr = acc.real() - mean_re;
    const double di = acc.imag() - mean_im;
    mean_re += dr / static_cast<double>(n);
    mean_im += di / static_cast<double>(n);
    m2_re += dr * (acc.real() - mean_re);
    m2_im += di * (acc.imag() - mean_im);
  }
  const double nn = static_cast<double>(n);
  CovarianceEstimate out;
  out.value = mean_re;
  out.imag = mean_im;
  out.std_error = std::sqrt(m2_re / (nn - 1.0) / nn);
  out.imag_std_error = std::sqrt(m2_im / (nn - 1.0) / nn);
  out.samples = n;
  return out;
}

ComplexMatrix haar_matrix(int dim, int beta, RandomStream& rng) {
  if (dim < 1) throw ParameterError("haar_matrix: dim must be >= 1");
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = beta == 1 ? Complex(rng.normal(), 0.0) : Complex(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix& r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  if (beta == 1) q = q.real().cast<Complex>();
  return q;
}

GaussianMatrix conjugate_by(const GaussianMatrix& x, const ComplexMatrix& u) {
  const ComplexMatrix y = u.adjoint() * x.as_complex() * u;
  if (x.is_real()) return {x.params(), RealMatrix(y.real())};
  return {x.params(), y};
}

} // namespace isoflow
