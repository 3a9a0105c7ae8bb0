#pragma once

// Measure preservation, checked exactly on cells and finite unions of
// cells and statistically by Monte Carlo.
//
// Cells form a pi-system generating the Borel sets, so agreement of the
// two measures on cells extends to the generated sigma-algebra by
// Dynkin's argument. Nothing beyond cells and their finite unions is
// checked here.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpiso/curve.hpp"
#include "mpiso/dyadic.hpp"

namespace mpiso {

/// Outcome of one check. pass is always statistic <= threshold.
struct VerificationReport {
  std::string check;
  std::string scope;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::optional<std::uint64_t> seed;
  std::string detail;

  static VerificationReport make(std::string check, std::string scope, double statistic, double threshold,
                                 std::optional<std::uint64_t> seed = std::nullopt, std::string detail = {});

  /// One line of space-separated key=value pairs; values containing
  /// spaces are double-quoted.
  std::string to_record() const;
  nlohmann::json to_json() const;
  static VerificationReport from_json(const nlohmann::json& j);
};

/// Finite union of depth-n cube cells, each named by its lower corner.
class CubeCellUnion {
public:
  CubeCellUnion(unsigned dimension, unsigned depth, std::vector<CubePoint> corners = {});

  static CubeCellUnion whole(unsigned dimension, unsigned depth);
  /// Every depth-n cell inside the rectangle; throws std::invalid_argument
  /// unless the rectangle is aligned to the depth-n grid.
  static CubeCellUnion from_rect(const DyadicRect& r, unsigned depth);

  unsigned dimension() const { return dimension_; }
  unsigned depth() const { return depth_; }
  const std::vector<CubePoint>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }

  Rational measure() const;
  CubeCellUnion complement() const;

private:
  unsigned dimension_;
  unsigned depth_;
  std::vector<CubePoint> cells_;  // sorted, unique
};

/// Finite union of depth-n segment intervals (base 2^d), by index.
class SegmentCellUnion {
public:
  SegmentCellUnion(unsigned dimension, unsigned depth, std::vector<Natural> indices = {});

  unsigned dimension() const { return dimension_; }
  unsigned depth() const { return depth_; }
  const std::vector<Natural>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }

  Rational measure() const;
  bool disjoint_from(const SegmentCellUnion& other) const;

private:
  unsigned dimension_;
  unsigned depth_;
  std::vector<Natural> indices_;  // sorted, unique
};

/// Image of a cube cell union under the map, cell by cell. Throws
/// std::logic_error if the image measure differs from the source measure.
SegmentCellUnion pushforward(const CubeCellUnion& cells);

/// Decomposes an aligned rectangle into depth-n cells, pushes them
/// forward and compares total image length with the rectangle volume.
VerificationReport rect_measure_check(const DyadicRect& r, unsigned depth);

struct UniformityOptions {
  std::uint64_t samples = 1'000'000;
  unsigned grid = 16;
  std::uint64_t seed = 0;
  unsigned depth = 32;
  unsigned workers = 0;  // 0 = hardware concurrency
  double confidence = 0.999;
};

/// Draws uniform segment values, maps them into [0,1)^2 and runs a
/// chi-squared test on a grid x grid histogram. Per-draw randomness is
/// counter based, so the result does not depend on the worker count.
/// Throws std::invalid_argument if samples < 100 * grid^2.
VerificationReport monte_carlo_uniformity(const UniformityOptions& options);

/// Same test over caller-supplied segment values.
VerificationReport monte_carlo_uniformity(std::span<const UnitScalar> draws, unsigned grid, unsigned depth,
                                          double confidence = 0.999);

/// Histogram of inverse_map(draw) on a grid x grid partition of [0,1)^2,
/// row-major by (x bin, y bin).
std::vector<std::uint64_t> uniformity_histogram(const UniformityOptions& options);

// Exhaustive audits ---------------------------------------------------------

/// Two cells share a (d-1)-face: their grid corners differ by one step
/// along exactly one axis.
bool share_facet(const DyadicRect& a, const DyadicRect& b);

/// address <-> interval bijection, point_to_address agreement and exact
/// cell measure, over every cell at depths 0..depth.
VerificationReport audit_cells(unsigned d, unsigned depth);
/// Consecutive intervals map to facet-adjacent cells, depths 1..depth.
VerificationReport audit_adjacency(unsigned d, unsigned depth);
/// interval -> address -> interval and t -> inverse_map -> cell round trips.
VerificationReport audit_roundtrip(unsigned d, unsigned depth);
/// |f_m(x) - f_n(x)| < (2^d)^-n for every depth-n cell corner (and a
/// random interior point of each cell) and every m in (n, max_depth].
VerificationReport audit_convergence(unsigned d, unsigned depth, unsigned max_depth, std::uint64_t seed);
/// Random cell unions: exact pushforward measure, disjointness and
/// complement consistency.
VerificationReport audit_unions(unsigned d, unsigned depth, unsigned unions, std::uint64_t seed);

}  // namespace mpiso
