// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mpiso/curve.hpp"
#include "mpiso/measure.hpp"
#include "mpiso/sampling.hpp"
#include "mpiso/stats.hpp"
#include "oracles.hpp"

using namespace mpiso;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CubePoint grid_point(std::uint64_t x, std::uint64_t y, unsigned level) { return CubePoint::from_grid({x, y}, level); }

// 1. address <-> interval bijection over all 4^n cells, n <= 6, < 10 s.
Outcome cell_bijection() {
  const auto start = Clock::now();
  std::uint64_t failures = 0, checked = 0;
  for (unsigned n = 0; n <= 6; ++n) {
    const std::uint64_t side = std::uint64_t{1} << n;
    std::set<Natural> images;
    for (std::uint64_t x = 0; x < side; ++x) {
      for (std::uint64_t y = 0; y < side; ++y) {
        const auto a = point_to_address(grid_point(x, y, n), n);
        const auto iv = address_to_interval(a);
        images.insert(iv.index());
        failures += interval_to_address(iv) != a;
        ++checked;
      }
    }
    failures += images.size() != side * side;
    for (std::uint64_t q = 0; q < side * side; ++q) {
      const SegmentInterval iv(2, n, q);
      failures += address_to_interval(interval_to_address(iv)) != iv;
    }
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 10.0, std::to_string(checked) + " cells, " + std::to_string(failures) +
                                            " failures, " + std::to_string(secs) + " s"};
}

// 2. cell volume == image length exactly for n <= 6; 1000 random unions at n = 8.
Outcome exact_measure() {
  std::uint64_t failures = 0;
  for (unsigned n = 0; n <= 6; ++n) {
    const std::uint64_t side = std::uint64_t{1} << n;
    for (std::uint64_t x = 0; x < side; ++x) {
      for (std::uint64_t y = 0; y < side; ++y) {
        const auto a = point_to_address(grid_point(x, y, n), n);
        failures += address_to_rect(a).volume() != address_to_interval(a).length();
      }
    }
  }
  std::mt19937_64 gen(2024);
  for (int u = 0; u < 1000; ++u) {
    const std::size_t size = 1 + gen() % 4096;
    std::vector<CubePoint> cells;
    for (std::size_t i = 0; i < size; ++i) cells.push_back(grid_point(gen() % 256, gen() % 256, 8));
    const CubeCellUnion cu(2, 8, std::move(cells));
    try {
      const auto image = pushforward(cu);
      failures += image.measure() != cu.measure();
      failures += image.size() != cu.size();
    } catch (const std::logic_error&) {
      ++failures;
    }
  }
  return {failures == 0, std::to_string(failures) + " failures (seed 2024)"};
}

// 3. |f_m(x) - f_n(x)| < 4^-n for corners and an interior point of every
// cell, n <= 6, m in (n, 10].
Outcome cauchy_bound() {
  constexpr unsigned kMax = 10;
  std::mt19937_64 gen(3);
  std::uint64_t failures = 0, checked = 0;
  for (unsigned n = 0; n <= 6; ++n) {
    const std::uint64_t side = std::uint64_t{1} << n;
    const Rational bound(1, pow2(2 * n));
    for (std::uint64_t x = 0; x < side; ++x) {
      for (std::uint64_t y = 0; y < side; ++y) {
        const std::uint64_t shift = kMax - n, mask = (std::uint64_t{1} << shift) - 1;
        const CubePoint reps[] = {grid_point(x << shift, y << shift, kMax),
                                  grid_point((x << shift) | (gen() & mask), (y << shift) | (gen() & mask), kMax)};
        for (const auto& pt : reps) {
          const Rational fn = forward_map(pt, n).to_rational();
          for (unsigned m = n + 1; m <= kMax; ++m) {
            Rational diff = forward_map(pt, m).to_rational() - fn;
            if (diff < 0) diff = -diff;
            failures += !(diff < bound);
            ++checked;
          }
        }
      }
    }
  }
  return {failures == 0, std::to_string(checked) + " (point, n, m) triples, " + std::to_string(failures) + " failures"};
}

// 4. consecutive intervals map to edge-adjacent squares, n <= 8.
Outcome adjacency() {
  std::uint64_t failures = 0, checked = 0;
  for (unsigned n = 1; n <= 8; ++n) {
    const std::uint64_t cells = std::uint64_t{1} << (2 * n);
    DyadicRect prev = address_to_rect(interval_to_address(SegmentInterval(2, n, 0)));
    for (std::uint64_t q = 1; q < cells; ++q) {
      DyadicRect next = address_to_rect(interval_to_address(SegmentInterval(2, n, q)));
      failures += !share_facet(prev, next);
      ++checked;
      prev = std::move(next);
    }
  }
  return {failures == 0, std::to_string(checked) + " pairs, " + std::to_string(failures) + " failures"};
}

// 5. N = 10^6, 16x16 grid, chi-squared below the 99.9% chi2(255) quantile, < 30 s.
Outcome uniformity() {
  const auto start = Clock::now();
  UniformityOptions o;
  o.samples = 1'000'000;
  o.grid = 16;
  o.seed = 20240601;
  const auto r = monte_carlo_uniformity(o);
  const double secs = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof buf, "chi2=%.3f threshold=%.3f seed=%llu %.2f s", r.statistic, r.threshold,
                static_cast<unsigned long long>(o.seed), secs);
  return {r.pass && secs < 30.0, buf};
}

// 6. 2 -> 3 -> 2 round trip at matched depths, source depth <= 4. A depth-k
// square cell is cut into its depth-k' subcells, k' the least multiple of
// 3 with k' >= k, so that 2k' bits split evenly into 3-dimensional digits.
Outcome composition() {
  std::uint64_t failures = 0, checked = 0;
  for (unsigned k = 1; k <= 4; ++k) {
    const unsigned kk = (k + 2) / 3 * 3;
    const std::uint64_t side = std::uint64_t{1} << k, sub = std::uint64_t{1} << (kk - k);
    for (std::uint64_t x = 0; x < side; ++x) {
      for (std::uint64_t y = 0; y < side; ++y) {
        for (std::uint64_t i = 0; i < sub; ++i) {
          for (std::uint64_t j = 0; j < sub; ++j) {
            const CubePoint pt = grid_point(x * sub + i, y * sub + j, kk);
            const CubePoint cube3 = compose_n_to_m(pt, kk, 3);
            const CubePoint back = compose_n_to_m(cube3, 2 * kk / 3, 2);
            failures += !(back == pt) || back.truncate(k) != grid_point(x, y, k);
            ++checked;
          }
        }
      }
    }
  }
  return {failures == 0, std::to_string(checked) + " subcells, " + std::to_string(failures) + " failures"};
}

// 7. for n = 2, depth k <= 5: the segment preimage of every product of dyadic
// coordinate intervals has length equal to the product of side lengths.
Outcome exact_independence() {
  std::uint64_t failures = 0, products = 0;
  for (unsigned k = 1; k <= 5; ++k) {
    const std::uint64_t cells = std::uint64_t{1} << (2 * k);
    // count[i][j][a][b]: segment cells landing in I_i(a) x I_j(b).
    std::vector<std::vector<std::vector<std::uint64_t>>> count(k + 1, std::vector<std::vector<std::uint64_t>>(k + 1));
    for (unsigned i = 0; i <= k; ++i) {
      for (unsigned j = 0; j <= k; ++j) count[i][j].assign(std::size_t{1} << (i + j), 0);
    }
    for (std::uint64_t q = 0; q < cells; ++q) {
      const auto g = split_uniform(make_scalar(q, 2 * k), 2, k).grid_coords(k);
      const auto x = static_cast<std::uint64_t>(g[0]), y = static_cast<std::uint64_t>(g[1]);
      for (unsigned i = 0; i <= k; ++i) {
        for (unsigned j = 0; j <= k; ++j) ++count[i][j][((x >> (k - i)) << j) | (y >> (k - j))];
      }
    }
    for (unsigned i = 0; i <= k; ++i) {
      for (unsigned j = 0; j <= k; ++j) {
        for (auto c : count[i][j]) {
          failures += Rational(c, pow2(2 * k)) != Rational(1, pow2(i + j));
          ++products;
        }
      }
    }
  }
  return {failures == 0, std::to_string(products) + " products, " + std::to_string(failures) + " failures"};
}

// 8. two fair coins, N = 10^5: contingency chi-squared below the 99.9% chi2(1)
// quantile and each marginal within 4 sigma of 1/2.
Outcome coin_independence() {
  const DistributionSpec coin("coin", {{0, Rational(1, 2)}, {1, Rational(1, 2)}}, {});
  constexpr std::size_t kN = 100'000;
  const std::uint64_t seed = 8;
  const auto batch = sample_independent(seed, kN, {coin, coin});
  std::vector<std::uint64_t> table(4, 0);
  for (std::size_t i = 0; i < kN; ++i) {
    ++table[static_cast<std::size_t>(batch.columns[0][i] * 2 + batch.columns[1][i])];
  }
  const auto chi = stats::chi_squared_contingency(stats::BinnedCounts::table(2, 2, table));
  const double threshold = stats::chi2_threshold(1, 0.999);
  const double sigma = std::sqrt(0.25 / kN);
  const double f0 = static_cast<double>(table[2] + table[3]) / kN;
  const double f1 = static_cast<double>(table[1] + table[3]) / kN;
  const bool pass = chi.statistic <= threshold && std::abs(f0 - 0.5) <= 4 * sigma && std::abs(f1 - 0.5) <= 4 * sigma;
  char buf[200];
  std::snprintf(buf, sizeof buf, "chi2=%.4f threshold=%.4f p1=%.5f p2=%.5f 4sigma=%.5f seed=%llu", chi.statistic,
                threshold, f0, f1, 4 * sigma, static_cast<unsigned long long>(seed));
  return {pass, buf};
}

// 9. 200 random rational specs: quantile within one mesh step of the
// literal supremum over a 1e-6 mesh.
Outcome quantile_fidelity() {
  constexpr double kStep = 1e-6;
  constexpr std::uint64_t kDen = 1'000'003;  // prime, keeps u off every CDF level
  std::mt19937_64 gen(9);
  std::uint64_t failures = 0, checked = 0;
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const auto spec = oracle::random_spec(gen);
    std::vector<Rational> us;
    for (int i = 0; i < 25; ++i) us.emplace_back(1 + gen() % (kDen - 1), kDen);
    std::sort(us.begin(), us.end());
    std::vector<double> ud;
    for (const auto& u : us) ud.push_back(oracle::to_d(u));
    const double lo = oracle::to_d(spec.support_lower()) - 0.5, hi = oracle::to_d(spec.support_upper()) + 0.5;
    const auto sups = oracle::mesh_scan_sups(spec, ud, lo, hi, kStep);
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double err = std::abs(oracle::to_d(spec.quantile(us[i])) - sups[i]);
      worst = std::max(worst, err);
      failures += err > kStep * (1 + 1e-6);
      ++checked;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu quantiles, %llu failures, worst |diff| = %.3g (step %.0e)",
                static_cast<unsigned long long>(checked), static_cast<unsigned long long>(failures), worst, kStep);
  return {failures == 0, buf};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 cell bijection", cell_bijection},          {"2 exact measure", exact_measure},
      {"3 uniform Cauchy bound", cauchy_bound},      {"4 adjacency", adjacency},
      {"5 statistical uniformity", uniformity},      {"6 2-3-2 composition", composition},
      {"7 exact coordinate independence", exact_independence},
      {"8 fair-coin independence", coin_independence}, {"9 quantile fidelity", quantile_fidelity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
