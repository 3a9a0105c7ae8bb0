#pragma once

// Goodness-of-fit kernels: chi-squared, Kolmogorov-Smirnov, and the
// critical values they are compared against.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mpiso::stats {

/// Counts over a grid of bins. shape lists the extent of each axis
/// (one entry for a flat histogram, two for a contingency table).
struct BinnedCounts {
  std::vector<std::size_t> shape;
  std::vector<std::uint64_t> counts;  // row-major
  std::uint64_t total = 0;

  static BinnedCounts flat(std::vector<std::uint64_t> counts);
  static BinnedCounts table(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts);

  std::size_t bins() const { return counts.size(); }
  /// Throws std::invalid_argument if counts do not sum to total or the
  /// shape does not match.
  void validate() const;
};

struct ChiSquared {
  double statistic = 0.0;
  unsigned dof = 0;
};

/// Goodness of fit: sum (obs - exp)^2 / exp with bins - 1 degrees of
/// freedom. Rejects a non-positive expected bin or mismatched totals.
ChiSquared chi_squared(const BinnedCounts& observed, std::span<const double> expected);

/// Independence test on an r x c table; expected counts come from the
/// margins and dof = (r - 1)(c - 1).
ChiSquared chi_squared_contingency(const BinnedCounts& table);

/// Two-sided sup |F_n - F| for sorted samples.
double ks_statistic(std::span<const double> sorted_samples, const std::function<double(double)>& cdf);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi2_cdf(double x, unsigned dof);

/// Upper critical value: the confidence-quantile of chi^2(dof). Solved
/// from the incomplete gamma function to ~1e-10 relative accuracy,
/// starting from the Wilson-Hilferty approximation.
double chi2_threshold(unsigned dof, double confidence);

/// P(K <= x) for the asymptotic Kolmogorov distribution.
double kolmogorov_cdf(double x);

/// Critical D for sample size n, using Stephens' finite-n correction
/// K / (sqrt(n) + 0.12 + 0.11 / sqrt(n)).
double ks_threshold(std::size_t n, double confidence);

}  // namespace mpiso::stats
