#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace isoflow {

/// Sup distance between the empirical CDF of `sample` and `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2k²λ²), the Kolmogorov survival function.
double kolmogorov_survival(double lambda);

/// Asymptotic p-value with Stephens' small-sample correction,
/// Q((sqrt(n) + 0.12 + 0.11/sqrt(n)) d), n the (effective) sample size.
double ks_pvalue(double d, double n);
double ks_pvalue_two_sample(double d, std::size_t n1, std::size_t n2);

/// Streaming central moments (Welford / Pébay); `merge` is exact, so partial
/// accumulators from independent workers can be combined in any grouping.
class Moments {
public:
  void add(double x) noexcept;
  void merge(const Moments& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance.
  double variance() const noexcept;
  double std_error() const noexcept;
  double skewness() const noexcept;
  /// Excess kurtosis.
  double kurtosis() const noexcept;

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

/// Jarque-Bera normality test p-value (χ² with two degrees of freedom).
double jarque_bera_pvalue(const Moments& m);

/// Fixed-range histogram; out-of-range values are counted separately.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t below = 0;
  std::size_t above = 0;

  Histogram(double lo, double hi, std::size_t bins);
  void add(double x) noexcept;
  void merge(const Histogram& other);
  double bin_lo(std::size_t b) const noexcept;
  double bin_hi(std::size_t b) const noexcept;
};

} // namespace isoflow
