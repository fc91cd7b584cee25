#include "isoflow/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isoflow/errors.hpp"

namespace isoflow {

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ParameterError("ks_statistic: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  // For small λ the alternating series converges slowly; use the dual form
  // 1 - sqrt(2π)/λ Σ exp(-(2k-1)²π²/(8λ²)).
  if (lambda < 1.0) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double a = 2.0 * k - 1.0;
      s += std::exp(-a * a * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue(double d, double n) {
  const double rn = std::sqrt(n);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double ks_pvalue_two_sample(double d, std::size_t n1, std::size_t n2) {
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  return ks_pvalue(d, a * b / (a + b));
}

void Moments::add(double x) noexcept {
  Moments one;
  one.n_ = 1;
  one.mean_ = x;
  merge(one);
}

void Moments::merge(const Moments& o) noexcept {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double d = o.mean_ - mean_;
  const double d2 = d * d;
  const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
  const double m3 = m3_ + o.m3_ + d * d2 * na * nb * (na - nb) / (n * n) +
                    3.0 * d * (na * o.m2_ - nb * m2_) / n;
  const double m4 = m4_ + o.m4_ + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                    4.0 * d * (na * o.m3_ - nb * m3_) / n;
  mean_ += d * nb / n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  n_ += o.n_;
}

double Moments::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double Moments::std_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double Moments::skewness() const noexcept {
  if (n_ < 2 || m2_ <= 0) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
}

double Moments::kurtosis() const noexcept {
  if (n_ < 2 || m2_ <= 0) return 0.0;
  const double n = static_cast<double>(n_);
  return n * m4_ / (m2_ * m2_) - 3.0;
}

double jarque_bera_pvalue(const Moments& m) {
  const double n = static_cast<double>(m.count());
  const double s = m.skewness();
  const double k = m.kurtosis();
  const double jb = n / 6.0 * (s * s + 0.25 * k * k);
  return std::exp(-0.5 * jb);
}

Histogram::Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins) {
  if (!(hi_ > lo_) || bins == 0) throw ParameterError("histogram: need lo < hi and bins > 0");
}

void Histogram::add(double x) noexcept {
  if (!(x >= lo)) {
    ++below;
    return;
  }
  if (!(x < hi)) {
    ++above;
    return;
  }
  auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(counts.size()));
  ++counts[std::min(b, counts.size() - 1)];
}

void Histogram::merge(const Histogram& o) {
  if (o.lo != lo || o.hi != hi || o.counts.size() != counts.size()) {
    throw ParameterError("histogram: cannot merge different binnings");
  }
  for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += o.counts[b];
  below += o.below;
  above += o.above;
}

double Histogram::bin_lo(std::size_t b) const noexcept {
  return lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(counts.size());
}

double Histogram::bin_hi(std::size_t b) const noexcept {
  return lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(counts.size());
}

} // namespace isoflow
