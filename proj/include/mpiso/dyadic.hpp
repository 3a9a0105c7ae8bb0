#pragma once

// Exact fixed-precision values on the half-open unit interval and cube.
//
// A UnitScalar is m / 2^p with 0 <= m < 2^p. The value 1 is not
// representable; every cell of every subdivision is half-open, so the
// representable points are partitioned exactly at every depth.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mpiso {

using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Value outside [0,1), or an index outside its range.
class range_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Not enough bits to carry out the requested operation exactly.
class precision_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input.
class parse_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr unsigned kDefaultPrecision = 64;

/// 2^e as an arbitrary-size integer.
Natural pow2(unsigned e);

class UnitScalar {
public:
  UnitScalar() = default;

  /// Throws range_error unless 0 <= mantissa < 2^precision.
  static UnitScalar make(Natural mantissa, unsigned precision);
  static UnitScalar zero(unsigned precision = 0) { return UnitScalar{Natural{0}, precision}; }

  const Natural& mantissa() const { return mantissa_; }
  unsigned precision() const { return precision_; }

  /// Same value at a finer precision. Throws precision_error if
  /// new_precision < precision().
  UnitScalar refine(unsigned new_precision) const;

  /// Floor to a coarser precision (drops trailing bits).
  UnitScalar truncate(unsigned new_precision) const;

  /// Bit k after the binary point, k = 1 being the most significant.
  bool bit(unsigned k) const;

  Rational to_rational() const;
  double to_double() const;

  /// `m/2^p`
  std::string to_string() const;
  /// `0b0.b1b2...bp`, exactly p fraction digits (`0b0` when p = 0).
  std::string to_binary_string() const;

  /// Accepts `m/2^p`, `m/K^e` with K a power of two, and `0b0.bits`.
  /// The representation round-trips bit-exactly through to_string and
  /// to_binary_string.
  static UnitScalar parse(std::string_view text);

  friend bool operator==(const UnitScalar& a, const UnitScalar& b);
  friend std::strong_ordering operator<=>(const UnitScalar& a, const UnitScalar& b);

  /// Representation equality: same mantissa and same precision.
  bool identical(const UnitScalar& other) const {
    return precision_ == other.precision_ && mantissa_ == other.mantissa_;
  }

private:
  UnitScalar(Natural m, unsigned p) : mantissa_(std::move(m)), precision_(p) {}

  Natural mantissa_{0};
  unsigned precision_ = 0;
};

UnitScalar make_scalar(Natural mantissa, unsigned precision);
UnitScalar refine(const UnitScalar& s, unsigned new_precision);

/// A point of [0,1)^d. All coordinates share one precision; the
/// constructor refines coarser coordinates to the finest one present.
class CubePoint {
public:
  CubePoint() = default;
  explicit CubePoint(std::vector<UnitScalar> coords);

  /// Point from integer grid coordinates at the given precision.
  static CubePoint from_grid(const std::vector<Natural>& grid, unsigned precision);

  unsigned dimension() const { return static_cast<unsigned>(coords_.size()); }
  unsigned precision() const { return coords_.empty() ? 0 : coords_.front().precision(); }
  const std::vector<UnitScalar>& coords() const { return coords_; }
  const UnitScalar& operator[](std::size_t i) const { return coords_[i]; }

  CubePoint refine(unsigned new_precision) const;
  CubePoint truncate(unsigned new_precision) const;

  /// floor(x_i * 2^level) per axis. Requires level <= precision().
  std::vector<Natural> grid_coords(unsigned level) const;

  std::string to_string() const;

  friend bool operator==(const CubePoint& a, const CubePoint& b) = default;
  /// Lexicographic by coordinate value.
  friend std::strong_ordering operator<=>(const CubePoint& a, const CubePoint& b);

private:
  std::vector<UnitScalar> coords_;
};

/// True iff some coordinate equals a/2^level exactly (the grid set at
/// that level). Throws precision_error if level > pt.precision().
bool is_on_grid(const CubePoint& pt, unsigned level);

/// Half-open box prod [x_i, x_i + 2^{-k_i}) inside [0,1)^d.
class DyadicRect {
public:
  /// Throws range_error if the box leaves [0,1)^d or the arities differ.
  DyadicRect(CubePoint lower, std::vector<unsigned> side_exponents);

  unsigned dimension() const { return lower_.dimension(); }
  const CubePoint& lower() const { return lower_; }
  const std::vector<unsigned>& side_exponents() const { return sides_; }

  /// prod 2^{-k_i}, exact.
  Rational volume() const;
  bool contains(const CubePoint& pt) const;
  /// True iff the box is a union of level-n grid cells.
  bool aligned_to(unsigned level) const;

  std::string to_string() const;

  friend bool operator==(const DyadicRect&, const DyadicRect&) = default;

private:
  CubePoint lower_;
  std::vector<unsigned> sides_;
};

}  // namespace mpiso
