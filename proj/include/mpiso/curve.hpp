#pragma once

// Recursive 2^d-way subdivision of [0,1)^d with a Hilbert numbering.
//
// At every depth n the cube is cut into (2^d)^n half-open cells and the
// segment into (2^d)^n half-open intervals of length (2^d)^-n. A cell
// address j_1..j_n names both: the cell reached by descending through
// children j_1, j_2, ... and the interval sum (j_k - 1) (2^d)^(n-k).
// Consecutive intervals always correspond to cells sharing a facet.
//
// Octants are encoded as d-bit integers with axis 0 in the most
// significant bit, so for d = 2 the code is (x_bit << 1) | y_bit.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mpiso/dyadic.hpp"

namespace mpiso {

inline constexpr unsigned kMaxDimension = 8;

/// Dimension outside [1, kMaxDimension].
class dimension_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

void check_dimension(unsigned d);

/// Signed axis permutation of the d-cube: maps a local octant/point to the
/// parent frame by sending local axis i to parent axis perm[i], reflecting
/// it when flip bit i is set.
class OrientationState {
public:
  static OrientationState identity(unsigned d);
  /// Throws std::invalid_argument unless perm is a permutation of 0..d-1.
  OrientationState(std::vector<std::uint8_t> perm, std::uint32_t flips);

  unsigned dimension() const { return static_cast<unsigned>(perm_.size()); }
  const std::vector<std::uint8_t>& perm() const { return perm_; }
  std::uint32_t flips() const { return flips_; }

  /// Image of a local octant code in the parent frame.
  std::uint32_t apply(std::uint32_t octant) const;
  /// (*this)(other(x))
  OrientationState compose(const OrientationState& other) const;
  OrientationState inverse() const;

  std::string to_string() const;

  friend bool operator==(const OrientationState&, const OrientationState&) = default;
  friend auto operator<=>(const OrientationState&, const OrientationState&) = default;

private:
  OrientationState() = default;
  std::vector<std::uint8_t> perm_;
  std::uint32_t flips_ = 0;
};

struct ChildCell {
  std::uint32_t octant;      // in the parent frame
  OrientationState state;    // used to subdivide this child
};

/// The 2^d children of a cell with the given state, in traversal order.
std::vector<ChildCell> child_order(const OrientationState& state, unsigned d);

/// Number of distinct states reachable from the identity in dimension d.
std::size_t reachable_state_count(unsigned d);

/// Digit string j_1..j_n, stored zero-based.
class CellAddress {
public:
  explicit CellAddress(unsigned dimension, std::vector<std::uint8_t> digits = {});

  unsigned dimension() const { return dimension_; }
  unsigned depth() const { return static_cast<unsigned>(digits_.size()); }
  const std::vector<std::uint8_t>& digits() const { return digits_; }

  CellAddress child(unsigned digit) const;
  CellAddress prefix(unsigned depth) const;
  bool is_prefix_of(const CellAddress& other) const;

  /// One-based, dot separated: `1.3.2.4`. The root renders as `` (empty).
  std::string to_string() const;
  static CellAddress parse(std::string_view text, unsigned dimension);

  friend bool operator==(const CellAddress&, const CellAddress&) = default;
  friend auto operator<=>(const CellAddress&, const CellAddress&) = default;

private:
  unsigned dimension_;
  std::vector<std::uint8_t> digits_;
};

/// [q (2^d)^-n, (q+1) (2^d)^-n)
class SegmentInterval {
public:
  /// Throws range_error unless 0 <= index < (2^d)^depth.
  SegmentInterval(unsigned dimension, unsigned depth, Natural index);

  unsigned dimension() const { return dimension_; }
  unsigned depth() const { return depth_; }
  const Natural& index() const { return index_; }

  UnitScalar left() const;
  Rational length() const;
  bool contains(const UnitScalar& t) const;
  bool contains(const SegmentInterval& inner) const;

  /// `q/4^n` for d = 2; generally `q/B^n` with B = 2^d.
  std::string to_string() const;

  friend bool operator==(const SegmentInterval&, const SegmentInterval&) = default;

private:
  unsigned dimension_;
  unsigned depth_;
  Natural index_;
};

/// The depth-n interval containing t. Requires t.precision() >= d*n.
SegmentInterval cell_of(const UnitScalar& t, unsigned depth, unsigned d);

CellAddress point_to_address(const CubePoint& pt, unsigned depth);
DyadicRect address_to_rect(const CellAddress& a);
SegmentInterval address_to_interval(const CellAddress& a);
CellAddress interval_to_address(const SegmentInterval& iv);

/// Left endpoint of the depth-n interval of pt's depth-n cell, with d*n
/// bits. Throws precision_error if pt.precision() < depth.
UnitScalar forward_map(const CubePoint& pt, unsigned depth);

/// Lower corner (precision n) of the cell whose interval contains t.
/// Throws precision_error if t.precision() < d*depth.
CubePoint inverse_map(const UnitScalar& t, unsigned depth, unsigned d);

/// [0,1)^n -> [0,1) -> [0,1)^m. The target depth is n*depth/m, which must
/// be a whole number (precision_error otherwise) so that source and target
/// cells have equal volume.
CubePoint compose_n_to_m(const CubePoint& pt, unsigned depth, unsigned target_dimension);

}  // namespace mpiso
