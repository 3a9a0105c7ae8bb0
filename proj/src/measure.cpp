#include "mpiso/measure.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "mpiso/random.hpp"
#include "mpiso/stats.hpp"

namespace mpiso {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote_if_needed(const std::string& s) {
  if (!s.empty() && s.find_first_of(" \t\"=") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

// Cartesian product of per-axis [lo, lo + count) grid ranges.
template <typename Fn>
void for_each_grid_cell(const std::vector<Natural>& lo, const std::vector<Natural>& count, Fn&& fn) {
  const std::size_t d = lo.size();
  std::vector<Natural> offset(d, Natural{0});
  for (const auto& c : count) {
    if (c == 0) return;
  }
  while (true) {
    std::vector<Natural> cell(d);
    for (std::size_t i = 0; i < d; ++i) cell[i] = lo[i] + offset[i];
    fn(cell);
    std::size_t axis = d;
    while (axis > 0) {
      --axis;
      if (++offset[axis] < count[axis]) break;
      offset[axis] = 0;
      if (axis == 0) return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// VerificationReport

VerificationReport VerificationReport::make(std::string check, std::string scope, double statistic,
                                            double threshold, std::optional<std::uint64_t> seed,
                                            std::string detail) {
  VerificationReport r;
  r.check = std::move(check);
  r.scope = std::move(scope);
  r.statistic = statistic;
  r.threshold = threshold;
  r.pass = statistic <= threshold;
  r.seed = seed;
  r.detail = std::move(detail);
  return r;
}

std::string VerificationReport::to_record() const {
  std::string out = "check=" + quote_if_needed(check);
  out += " scope=" + quote_if_needed(scope);
  out += " statistic=" + format_double(statistic);
  out += " threshold=" + format_double(threshold);
  out += std::string(" pass=") + (pass ? "true" : "false");
  out += " seed=" + (seed ? std::to_string(*seed) : std::string("-"));
  if (!detail.empty()) out += " detail=" + quote_if_needed(detail);
  return out;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j = {{"check", check},         {"scope", scope}, {"statistic", statistic},
                      {"threshold", threshold}, {"pass", pass},   {"detail", detail}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

VerificationReport VerificationReport::from_json(const nlohmann::json& j) {
  std::optional<std::uint64_t> seed;
  if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
  auto r = make(j.at("check").get<std::string>(), j.at("scope").get<std::string>(),
                j.at("statistic").get<double>(), j.at("threshold").get<double>(), seed,
                j.value("detail", std::string{}));
  if (j.contains("pass") && j.at("pass").get<bool>() != r.pass) {
    throw std::invalid_argument("report pass flag disagrees with statistic and threshold");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cell unions

CubeCellUnion::CubeCellUnion(unsigned dimension, unsigned depth, std::vector<CubePoint> corners)
    : dimension_(dimension), depth_(depth), cells_(std::move(corners)) {
  check_dimension(dimension_);
  for (auto& c : cells_) {
    if (c.dimension() != dimension_) throw dimension_error("cell corner has the wrong dimension");
    if (c.precision() != depth_) {
      if (c.precision() < depth_ || c.truncate(depth_).refine(c.precision()) != c) {
        throw std::invalid_argument("cell corner " + c.to_string() + " is not on the depth-" +
                                    std::to_string(depth_) + " grid");
      }
      c = c.truncate(depth_);
    }
  }
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

CubeCellUnion CubeCellUnion::whole(unsigned dimension, unsigned depth) {
  check_dimension(dimension);
  return from_rect(DyadicRect{CubePoint(std::vector<UnitScalar>(dimension, UnitScalar::zero())),
                              std::vector<unsigned>(dimension, 0)},
                   depth);
}

CubeCellUnion CubeCellUnion::from_rect(const DyadicRect& r, unsigned depth) {
  if (!r.aligned_to(depth)) {
    throw std::invalid_argument("rectangle " + r.to_string() + " is not aligned to the depth-" +
                                std::to_string(depth) + " grid");
  }
  const unsigned d = r.dimension();
  const CubePoint lower = r.lower().precision() >= depth ? r.lower().truncate(depth) : r.lower().refine(depth);
  std::vector<Natural> lo = lower.grid_coords(depth);
  std::vector<Natural> count(d);
  for (unsigned i = 0; i < d; ++i) count[i] = pow2(depth - r.side_exponents()[i]);
  std::vector<CubePoint> cells;
  for_each_grid_cell(lo, count, [&](const std::vector<Natural>& g) { cells.push_back(CubePoint::from_grid(g, depth)); });
  return CubeCellUnion{d, depth, std::move(cells)};
}

Rational CubeCellUnion::measure() const {
  return Rational(Natural(cells_.size()), pow2(dimension_ * depth_));
}

CubeCellUnion CubeCellUnion::complement() const {
  const auto all = whole(dimension_, depth_);
  std::vector<CubePoint> rest;
  rest.reserve(all.size() - cells_.size());
  std::set_difference(all.cells_.begin(), all.cells_.end(), cells_.begin(), cells_.end(), std::back_inserter(rest));
  return CubeCellUnion{dimension_, depth_, std::move(rest)};
}

SegmentCellUnion::SegmentCellUnion(unsigned dimension, unsigned depth, std::vector<Natural> indices)
    : dimension_(dimension), depth_(depth), indices_(std::move(indices)) {
  check_dimension(dimension_);
  const Natural bound = pow2(dimension_ * depth_);
  for (const auto& q : indices_) {
    if (q < 0 || q >= bound) throw range_error("interval index " + q.str() + " out of range");
  }
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

Rational SegmentCellUnion::measure() const {
  return Rational(Natural(indices_.size()), pow2(dimension_ * depth_));
}

bool SegmentCellUnion::disjoint_from(const SegmentCellUnion& other) const {
  if (other.dimension_ != dimension_ || other.depth_ != depth_) {
    throw std::invalid_argument("disjoint_from: unions live on different grids");
  }
  auto a = indices_.begin();
  auto b = other.indices_.begin();
  while (a != indices_.end() && b != other.indices_.end()) {
    if (*a == *b) return false;
    (*a < *b) ? ++a : ++b;
  }
  return true;
}

SegmentCellUnion pushforward(const CubeCellUnion& cells) {
  std::vector<Natural> images;
  images.reserve(cells.size());
  for (const auto& corner : cells.cells()) images.push_back(forward_map(corner, cells.depth()).mantissa());
  SegmentCellUnion image{cells.dimension(), cells.depth(), std::move(images)};
  if (image.measure() != cells.measure()) {
    throw std::logic_error("pushforward changed measure: " + cells.measure().str() + " -> " + image.measure().str());
  }
  return image;
}

VerificationReport rect_measure_check(const DyadicRect& r, unsigned depth) {
  const auto cells = CubeCellUnion::from_rect(r, depth);
  std::vector<Natural> images;
  images.reserve(cells.size());
  for (const auto& corner : cells.cells()) images.push_back(forward_map(corner, depth).mantissa());
  const SegmentCellUnion image{cells.dimension(), depth, std::move(images)};
  const Rational area = r.volume();
  const Rational length = image.measure();
  return VerificationReport::make("rect_measure", r.to_string() + " depth=" + std::to_string(depth),
                                  area == length ? 0.0 : 1.0, 0.0, std::nullopt,
                                  "area=" + area.str() + " image_length=" + length.str());
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

unsigned bin_of(const UnitScalar& x, unsigned grid) {
  return static_cast<unsigned>(((x.mantissa() * grid) >> x.precision()).convert_to<std::uint64_t>());
}

VerificationReport uniformity_report(const std::vector<std::uint64_t>& counts, unsigned grid, std::string scope,
                                     double confidence, std::optional<std::uint64_t> seed) {
  auto observed = stats::BinnedCounts::flat(counts);
  const std::size_t bins = counts.size();
  if (bins == 1) return VerificationReport::make("uniformity", std::move(scope), 0.0, 0.0, seed, "single bin");
  const std::vector<double> expected(bins, static_cast<double>(observed.total) / static_cast<double>(bins));
  const auto chi = stats::chi_squared(observed, expected);
  const double threshold = stats::chi2_threshold(chi.dof, confidence);
  return VerificationReport::make("uniformity", std::move(scope), chi.statistic, threshold, seed,
                                  "dof=" + std::to_string(chi.dof) + " confidence=" + format_double(confidence) +
                                      " grid=" + std::to_string(grid) + "x" + std::to_string(grid));
}

void check_sample_size(std::uint64_t samples, unsigned grid) {
  if (grid == 0) throw std::invalid_argument("grid must be at least 1");
  const std::uint64_t minimum = 100ull * grid * grid;
  if (samples < minimum) {
    throw std::invalid_argument("uniformity check needs at least 100*k^2 = " + std::to_string(minimum) +
                                " samples for a " + std::to_string(grid) + "x" + std::to_string(grid) +
                                " grid, got " + std::to_string(samples));
  }
}

}  // namespace

std::vector<std::uint64_t> uniformity_histogram(const UniformityOptions& o) {
  if (o.grid == 0) throw std::invalid_argument("grid must be at least 1");
  const CounterRng rng(o.seed);
  unsigned workers = o.workers ? o.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, o.samples)));
  const std::size_t bins = std::size_t{o.grid} * o.grid;

  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(bins, 0));
  auto run = [&](unsigned w) {
    const std::uint64_t begin = o.samples * w / workers;
    const std::uint64_t end = o.samples * (w + 1) / workers;
    auto& counts = partial[w];
    for (std::uint64_t i = begin; i < end; ++i) {
      const CubePoint pt = inverse_map(rng.unit_scalar(i, 2 * o.depth), o.depth, 2);
      ++counts[std::size_t{bin_of(pt[0], o.grid)} * o.grid + bin_of(pt[1], o.grid)];
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();

  std::vector<std::uint64_t> total(bins, 0);
  for (const auto& p : partial) {
    for (std::size_t b = 0; b < bins; ++b) total[b] += p[b];
  }
  return total;
}

VerificationReport monte_carlo_uniformity(const UniformityOptions& o) {
  check_sample_size(o.samples, o.grid);
  const auto counts = uniformity_histogram(o);
  return uniformity_report(counts, o.grid,
                           "N=" + std::to_string(o.samples) + " grid=" + std::to_string(o.grid) +
                               " depth=" + std::to_string(o.depth),
                           o.confidence, o.seed);
}

VerificationReport monte_carlo_uniformity(std::span<const UnitScalar> draws, unsigned grid, unsigned depth,
                                          double confidence) {
  check_sample_size(draws.size(), grid);
  std::vector<std::uint64_t> counts(std::size_t{grid} * grid, 0);
  for (const auto& t : draws) {
    const CubePoint pt = inverse_map(t, depth, 2);
    ++counts[std::size_t{bin_of(pt[0], grid)} * grid + bin_of(pt[1], grid)];
  }
  return uniformity_report(counts, grid,
                           "N=" + std::to_string(draws.size()) + " grid=" + std::to_string(grid) +
                               " depth=" + std::to_string(depth) + " supplied draws",
                           confidence, std::nullopt);
}

// ---------------------------------------------------------------------------
// Audits

bool share_facet(const DyadicRect& a, const DyadicRect& b) {
  if (a.dimension() != b.dimension()) return false;
  const unsigned level = a.side_exponents().front();
  for (unsigned i = 0; i < a.dimension(); ++i) {
    if (a.side_exponents()[i] != level || b.side_exponents()[i] != level) return false;
  }
  const auto ga = a.lower().refine(std::max(a.lower().precision(), level)).grid_coords(level);
  const auto gb = b.lower().refine(std::max(b.lower().precision(), level)).grid_coords(level);
  unsigned differing = 0;
  for (unsigned i = 0; i < a.dimension(); ++i) {
    if (ga[i] == gb[i]) continue;
    const Natural diff = ga[i] > gb[i] ? Natural(ga[i] - gb[i]) : Natural(gb[i] - ga[i]);
    if (diff != 1) return false;
    ++differing;
  }
  return differing == 1;
}

VerificationReport audit_cells(unsigned d, unsigned depth) {
  check_dimension(d);
  std::uint64_t failures = 0;
  std::uint64_t checked = 0;
  for (unsigned n = 0; n <= depth; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (d * n);
    const Rational cell_measure(1, pow2(d * n));
    std::vector<bool> covered(count, false);
    for (std::uint64_t q = 0; q < count; ++q) {
      const SegmentInterval iv{d, n, Natural(q)};
      const CellAddress a = interval_to_address(iv);
      const DyadicRect rect = address_to_rect(a);
      bool ok = address_to_interval(a) == iv && a.depth() == n;
      ok = ok && rect.volume() == iv.length() && iv.length() == cell_measure;
      ok = ok && point_to_address(rect.lower(), n) == a;
      // Linear grid index of the cell; each must be hit exactly once.
      std::uint64_t linear = 0;
      for (const auto& g : rect.lower().grid_coords(n)) linear = (linear << n) | g.convert_to<std::uint64_t>();
      ok = ok && !covered[linear];
      covered[linear] = true;
      failures += ok ? 0 : 1;
      ++checked;
    }
  }
  return VerificationReport::make("cells", "d=" + std::to_string(d) + " depth<=" + std::to_string(depth) + " exhaustive",
                                  static_cast<double>(failures), 0.0, std::nullopt,
                                  std::to_string(checked) + " cells checked");
}

VerificationReport audit_adjacency(unsigned d, unsigned depth) {
  check_dimension(d);
  std::uint64_t failures = 0;
  std::uint64_t pairs = 0;
  for (unsigned n = 1; n <= depth; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (d * n);
    std::optional<DyadicRect> previous;
    for (std::uint64_t q = 0; q < count; ++q) {
      DyadicRect rect = address_to_rect(interval_to_address(SegmentInterval{d, n, Natural(q)}));
      if (previous) {
        ++pairs;
        if (!share_facet(*previous, rect)) ++failures;
      }
      previous = std::move(rect);
    }
  }
  return VerificationReport::make("adjacency",
                                  "d=" + std::to_string(d) + " depth 1.." + std::to_string(depth) + " exhaustive",
                                  static_cast<double>(failures), 0.0, std::nullopt,
                                  std::to_string(pairs) + " consecutive pairs");
}

VerificationReport audit_roundtrip(unsigned d, unsigned depth) {
  check_dimension(d);
  std::uint64_t failures = 0;
  std::uint64_t checked = 0;
  for (unsigned n = 0; n <= depth; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (d * n);
    for (std::uint64_t q = 0; q < count; ++q) {
      const SegmentInterval iv{d, n, Natural(q)};
      const CellAddress a = interval_to_address(iv);
      const CubePoint corner = inverse_map(iv.left(), n, d);
      bool ok = address_to_interval(a) == iv;
      ok = ok && point_to_address(corner, n) == a;
      ok = ok && forward_map(corner, n).identical(iv.left());
      failures += ok ? 0 : 1;
      ++checked;
    }
  }
  return VerificationReport::make("roundtrip", "d=" + std::to_string(d) + " depth<=" + std::to_string(depth) + " exhaustive",
                                  static_cast<double>(failures), 0.0, std::nullopt,
                                  std::to_string(checked) + " intervals checked");
}

VerificationReport audit_convergence(unsigned d, unsigned depth, unsigned max_depth, std::uint64_t seed) {
  check_dimension(d);
  const CounterRng rng(seed);
  std::uint64_t failures = 0;
  std::uint64_t checked = 0;
  std::uint64_t draw = 0;
  for (unsigned n = 0; n <= depth && n < max_depth; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (d * n);
    for (std::uint64_t q = 0; q < count; ++q) {
      const CubePoint corner = inverse_map(SegmentInterval{d, n, Natural(q)}.left(), n, d);
      std::vector<CubePoint> representatives{corner.refine(max_depth)};
      {
        // Random point in the same cell: keep the first n bits, randomise the rest.
        std::vector<UnitScalar> coords;
        for (unsigned i = 0; i < d; ++i) {
          const UnitScalar noise = rng.unit_scalar(draw++, max_depth - n);
          coords.push_back(UnitScalar::make((corner[i].mantissa() << (max_depth - n)) + noise.mantissa(), max_depth));
        }
        representatives.emplace_back(std::move(coords));
      }
      for (const auto& pt : representatives) {
        const UnitScalar coarse = forward_map(pt, n);
        for (unsigned m = n + 1; m <= max_depth; ++m) {
          const UnitScalar fine = forward_map(pt, m);
          // 0 <= f_m - f_n < (2^d)^-n, in units of (2^d)^-m.
          const Natural diff = fine.mantissa() - (coarse.mantissa() << (d * (m - n)));
          if (diff < 0 || diff >= pow2(d * (m - n))) ++failures;
          ++checked;
        }
      }
    }
  }
  return VerificationReport::make("convergence",
                                  "d=" + std::to_string(d) + " depth<=" + std::to_string(depth) +
                                      " m<=" + std::to_string(max_depth) + " exhaustive cells",
                                  static_cast<double>(failures), 0.0, seed,
                                  std::to_string(checked) + " (point, n, m) triples");
}

VerificationReport audit_unions(unsigned d, unsigned depth, unsigned unions, std::uint64_t seed) {
  check_dimension(d);
  const CounterRng rng(seed);
  const std::uint64_t total = std::uint64_t{1} << (d * depth);
  // Complements are full-grid sized; only check them where that is cheap.
  const unsigned complement_checks = total <= 4096 ? unions : std::min(unions, 16u);
  std::uint64_t failures = 0;
  std::uint64_t counter = 0;
  for (unsigned u = 0; u < unions; ++u) {
    const std::uint64_t size = total <= 256 ? rng.at(counter++) % (total + 1) : 1 + rng.at(counter++) % 256;
    std::vector<CubePoint> corners;
    corners.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) {
      const std::uint64_t q = rng.at(counter++) % total;
      corners.push_back(inverse_map(SegmentInterval{d, depth, Natural(q)}.left(), depth, d));
    }
    const CubeCellUnion cu{d, depth, std::move(corners)};
    try {
      const auto image = pushforward(cu);
      bool ok = image.measure() == cu.measure() && image.size() == cu.size();
      if (u < complement_checks) {
        const auto rest = pushforward(cu.complement());
        ok = ok && image.disjoint_from(rest);
        ok = ok && rest.measure() == Rational(1) - image.measure();
      }
      failures += ok ? 0 : 1;
    } catch (const std::logic_error&) {
      ++failures;
    }
  }
  return VerificationReport::make("unions",
                                  "d=" + std::to_string(d) + " depth=" + std::to_string(depth) + " unions=" +
                                      std::to_string(unions),
                                  static_cast<double>(failures), 0.0, seed,
                                  std::to_string(complement_checks) + " complement checks");
}

}  // namespace mpiso
