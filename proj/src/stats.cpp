#include "mpiso/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mpiso::stats {

BinnedCounts BinnedCounts::flat(std::vector<std::uint64_t> counts) {
  BinnedCounts b;
  b.shape = {counts.size()};
  b.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  b.counts = std::move(counts);
  return b;
}

BinnedCounts BinnedCounts::table(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts) {
  BinnedCounts b;
  b.shape = {rows, cols};
  b.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  b.counts = std::move(counts);
  b.validate();
  return b;
}

void BinnedCounts::validate() const {
  const std::size_t cells =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
  if (shape.empty() || cells != counts.size()) throw std::invalid_argument("bin shape does not match counts");
  if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) != total) {
    throw std::invalid_argument("bin counts do not sum to total");
  }
}

ChiSquared chi_squared(const BinnedCounts& observed, std::span<const double> expected) {
  observed.validate();
  if (expected.size() != observed.bins()) throw std::invalid_argument("expected/observed bin count mismatch");
  double expected_total = 0.0;
  for (double e : expected) {
    if (!(e > 0.0)) throw std::invalid_argument("chi_squared: expected count must be positive in every bin");
    expected_total += e;
  }
  const auto n = static_cast<double>(observed.total);
  if (std::abs(expected_total - n) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("chi_squared: expected counts sum to " + std::to_string(expected_total) +
                                ", observed total is " + std::to_string(observed.total));
  }
  ChiSquared r;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = static_cast<double>(observed.counts[i]) - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.dof = static_cast<unsigned>(observed.bins() - 1);
  return r;
}

ChiSquared chi_squared_contingency(const BinnedCounts& table) {
  table.validate();
  if (table.shape.size() != 2) throw std::invalid_argument("contingency test needs a two-axis table");
  const std::size_t rows = table.shape[0];
  const std::size_t cols = table.shape[1];
  if (rows < 2 || cols < 2) throw std::invalid_argument("contingency table must be at least 2x2");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      row_sum[r] += static_cast<double>(table.counts[r * cols + c]);
      col_sum[c] += static_cast<double>(table.counts[r * cols + c]);
    }
  }
  const auto n = static_cast<double>(table.total);
  std::vector<double> expected(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) expected[r * cols + c] = row_sum[r] * col_sum[c] / n;
  }
  auto result = chi_squared(table, expected);
  result.dof = static_cast<unsigned>((rows - 1) * (cols - 1));
  return result;
}

double ks_statistic(std::span<const double> sorted_samples, const std::function<double(double)>& cdf) {
  if (sorted_samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  const auto n = static_cast<double>(sorted_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    // F_n jumps from i/n to (i+1)/n at the i-th sample; ties collapse
    // onto the last copy.
    const bool last_of_ties = i + 1 == sorted_samples.size() || sorted_samples[i + 1] != sorted_samples[i];
    if (last_of_ties) d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return std::clamp(d, 0.0, 1.0);
}

namespace {

// Series for P(a, x), convergent for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction (modified Lentz) for Q(a, x), used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double normal_quantile(double p) {
  // Acklam's rational approximation, refined by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double lo = 0.02425;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - lo) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double chi2_cdf(double x, unsigned dof) {
  if (dof == 0) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_threshold(unsigned dof, double confidence) {
  if (dof == 0) throw std::invalid_argument("chi2_threshold: dof must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("chi2_threshold: confidence must lie in (0,1)");

  const double k = dof;
  const double z = normal_quantile(confidence);
  const double w = 2.0 / (9.0 * k);
  double guess = k * std::pow(std::max(1.0 - w + z * std::sqrt(w), 1e-3), 3.0);

  // Bracket, then bisect; the cdf is monotone so this cannot fail.
  double lo = 0.0;
  double hi = std::max(guess, 1.0);
  while (chi2_cdf(hi, dof) < confidence) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < confidence ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) {
    // Small-x form: sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))
    double sum = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double t = (2.0 * k - 1.0) * M_PI / x;
      sum += std::exp(-t * t / 8.0);
    }
    return std::sqrt(2.0 * M_PI) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

double ks_threshold(std::size_t n, double confidence) {
  if (n == 0) throw std::invalid_argument("ks_threshold: n must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("ks_threshold: confidence must lie in (0,1)");
  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < confidence ? lo : hi) = mid;
  }
  const double k = 0.5 * (lo + hi);
  const double sn = std::sqrt(static_cast<double>(n));
  return k / (sn + 0.12 + 0.11 / sn);
}

}  // namespace mpiso::stats
