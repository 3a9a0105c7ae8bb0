#include "mpiso/curve.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <queue>
#include <sstream>

namespace mpiso {

namespace {

using boost::multiprecision::bit_set;
using boost::multiprecision::bit_test;

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

bool axis_bit(std::uint32_t code, unsigned axis, unsigned d) { return (code >> (d - 1 - axis)) & 1u; }

std::uint32_t axis_mask(unsigned axis, unsigned d) { return 1u << (d - 1 - axis); }

// Transform taking the canonical sub-curve (entry at the origin, exit at
// the corner one step along axis 0) to the sub-curve of child j. Entry
// corners follow Hamilton's e(j) = gc(2 floor((j-1)/2)); each exit is the
// next child's entry seen from across the shared facet.
std::vector<OrientationState> canonical_child_transforms(unsigned d) {
  const std::uint32_t count = 1u << d;
  std::vector<std::uint32_t> entry(count), exit(count);
  for (std::uint32_t j = 0; j < count; ++j) entry[j] = j == 0 ? 0 : gray(2 * ((j - 1) / 2));
  for (std::uint32_t j = 0; j + 1 < count; ++j) exit[j] = entry[j + 1] ^ gray(j) ^ gray(j + 1);
  exit[count - 1] = axis_mask(0, d);

  std::vector<OrientationState> out;
  out.reserve(count);
  for (std::uint32_t j = 0; j < count; ++j) {
    const std::uint32_t diff = entry[j] ^ exit[j];
    if (diff == 0 || (diff & (diff - 1)) != 0) {
      throw std::logic_error("child entry and exit corners are not adjacent");
    }
    unsigned lead = 0;
    while (diff != axis_mask(lead, d)) ++lead;

    std::vector<std::uint8_t> perm(d);
    std::uint32_t flips = 0;
    for (unsigned i = 0; i < d; ++i) {
      perm[i] = static_cast<std::uint8_t>((lead + i) % d);
      if (axis_bit(entry[j], perm[i], d)) flips |= 1u << i;
    }
    out.emplace_back(std::move(perm), flips);
  }
  return out;
}

struct CurveTables {
  unsigned d = 0;
  std::uint32_t fanout = 0;
  std::vector<OrientationState> states;  // states[0] is the identity
  std::vector<std::uint32_t> child_octant;  // [state * fanout + digit]
  std::vector<std::uint32_t> child_state;   // [state * fanout + digit]
  std::vector<std::uint8_t> digit_of;       // [state * fanout + octant]

  explicit CurveTables(unsigned dim) : d(dim), fanout(1u << dim) {
    const auto canonical = canonical_child_transforms(d);
    std::map<OrientationState, std::uint32_t> index;
    std::queue<std::uint32_t> pending;

    auto intern = [&](const OrientationState& s) {
      auto [it, inserted] = index.emplace(s, static_cast<std::uint32_t>(states.size()));
      if (inserted) {
        states.push_back(s);
        pending.push(it->second);
      }
      return it->second;
    };
    intern(OrientationState::identity(d));

    // Breadth-first closure; rows are filled as states are discovered.
    while (!pending.empty()) {
      const std::uint32_t s = pending.front();
      pending.pop();
      if (child_octant.size() < (s + 1) * std::size_t{fanout}) {
        child_octant.resize((s + 1) * std::size_t{fanout});
        child_state.resize((s + 1) * std::size_t{fanout});
        digit_of.resize((s + 1) * std::size_t{fanout});
      }
      for (std::uint32_t j = 0; j < fanout; ++j) {
        const OrientationState state = states[s];
        const std::uint32_t octant = state.apply(gray(j));
        const std::uint32_t next = intern(state.compose(canonical[j]));
        child_octant[s * fanout + j] = octant;
        child_state[s * fanout + j] = next;
        digit_of[s * fanout + octant] = static_cast<std::uint8_t>(j);
      }
    }
  }

  std::uint32_t id_of(const OrientationState& s) const {
    for (std::uint32_t i = 0; i < states.size(); ++i) {
      if (states[i] == s) return i;
    }
    return static_cast<std::uint32_t>(-1);
  }
};

const CurveTables& tables(unsigned d) {
  check_dimension(d);
  static std::array<std::unique_ptr<CurveTables>, kMaxDimension + 1> built;
  static std::array<std::once_flag, kMaxDimension + 1> once;
  std::call_once(once[d], [d] { built[d] = std::make_unique<CurveTables>(d); });
  return *built[d];
}

std::string dim_mismatch(unsigned a, unsigned b) {
  return "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b);
}

// Octant code of pt at subdivision level k (1-based).
std::uint32_t octant_at(const CubePoint& pt, unsigned k) {
  const unsigned d = pt.dimension();
  std::uint32_t code = 0;
  for (unsigned axis = 0; axis < d; ++axis) {
    if (pt[axis].bit(k)) code |= axis_mask(axis, d);
  }
  return code;
}

}  // namespace

void check_dimension(unsigned d) {
  if (d < 1 || d > kMaxDimension) {
    throw dimension_error("unsupported dimension " + std::to_string(d) + " (expected 1.." +
                          std::to_string(kMaxDimension) + ")");
  }
}

// ---------------------------------------------------------------------------
// OrientationState

OrientationState OrientationState::identity(unsigned d) {
  check_dimension(d);
  OrientationState s;
  s.perm_.resize(d);
  std::iota(s.perm_.begin(), s.perm_.end(), std::uint8_t{0});
  return s;
}

OrientationState::OrientationState(std::vector<std::uint8_t> perm, std::uint32_t flips)
    : perm_(std::move(perm)), flips_(flips) {
  const auto d = static_cast<unsigned>(perm_.size());
  check_dimension(d);
  std::uint32_t seen = 0;
  for (auto p : perm_) {
    if (p >= d || (seen >> p) & 1u) throw std::invalid_argument("OrientationState: not a permutation");
    seen |= 1u << p;
  }
  if (flips_ >> d) throw std::invalid_argument("OrientationState: flip mask wider than dimension");
}

std::uint32_t OrientationState::apply(std::uint32_t octant) const {
  const unsigned d = dimension();
  std::uint32_t out = 0;
  for (unsigned i = 0; i < d; ++i) {
    if (axis_bit(octant, i, d) != static_cast<bool>((flips_ >> i) & 1u)) out |= axis_mask(perm_[i], d);
  }
  return out;
}

OrientationState OrientationState::compose(const OrientationState& other) const {
  const unsigned d = dimension();
  if (other.dimension() != d) throw dimension_error(dim_mismatch(d, other.dimension()));
  OrientationState out;
  out.perm_.resize(d);
  for (unsigned i = 0; i < d; ++i) {
    const unsigned mid = other.perm_[i];
    out.perm_[i] = perm_[mid];
    if (((other.flips_ >> i) ^ (flips_ >> mid)) & 1u) out.flips_ |= 1u << i;
  }
  return out;
}

OrientationState OrientationState::inverse() const {
  const unsigned d = dimension();
  OrientationState out;
  out.perm_.resize(d);
  for (unsigned i = 0; i < d; ++i) out.perm_[perm_[i]] = static_cast<std::uint8_t>(i);
  for (unsigned j = 0; j < d; ++j) {
    if ((flips_ >> out.perm_[j]) & 1u) out.flips_ |= 1u << j;
  }
  return out;
}

std::string OrientationState::to_string() const {
  std::ostringstream os;
  os << "perm=[";
  for (std::size_t i = 0; i < perm_.size(); ++i) os << (i ? "," : "") << int(perm_[i]);
  os << "] flip=";
  for (std::size_t i = 0; i < perm_.size(); ++i) os << ((flips_ >> i) & 1u);
  return os.str();
}

std::vector<ChildCell> child_order(const OrientationState& state, unsigned d) {
  check_dimension(d);
  if (state.dimension() != d) throw dimension_error(dim_mismatch(state.dimension(), d));
  const auto& t = tables(d);
  std::vector<ChildCell> out;
  out.reserve(t.fanout);
  const std::uint32_t s = t.id_of(state);
  if (s != static_cast<std::uint32_t>(-1)) {
    for (std::uint32_t j = 0; j < t.fanout; ++j) {
      out.push_back({t.child_octant[s * t.fanout + j], t.states[t.child_state[s * t.fanout + j]]});
    }
    return out;
  }
  // States outside the reachable set are still valid frames.
  const auto canonical = canonical_child_transforms(d);
  for (std::uint32_t j = 0; j < t.fanout; ++j) {
    out.push_back({state.apply(gray(j)), state.compose(canonical[j])});
  }
  return out;
}

std::size_t reachable_state_count(unsigned d) { return tables(d).states.size(); }

// ---------------------------------------------------------------------------
// CellAddress

CellAddress::CellAddress(unsigned dimension, std::vector<std::uint8_t> digits)
    : dimension_(dimension), digits_(std::move(digits)) {
  check_dimension(dimension_);
  const unsigned fanout = 1u << dimension_;
  for (auto j : digits_) {
    if (j >= fanout) throw range_error("digit " + std::to_string(j + 1) + " exceeds " + std::to_string(fanout));
  }
}

CellAddress CellAddress::child(unsigned digit) const {
  auto digits = digits_;
  digits.push_back(static_cast<std::uint8_t>(digit));
  return CellAddress{dimension_, std::move(digits)};
}

CellAddress CellAddress::prefix(unsigned depth) const {
  if (depth > this->depth()) throw range_error("prefix longer than address");
  return CellAddress{dimension_, {digits_.begin(), digits_.begin() + depth}};
}

bool CellAddress::is_prefix_of(const CellAddress& other) const {
  return dimension_ == other.dimension_ && depth() <= other.depth() &&
         std::equal(digits_.begin(), digits_.end(), other.digits_.begin());
}

std::string CellAddress::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(digits_[i] + 1);
  }
  return out;
}

CellAddress CellAddress::parse(std::string_view text, unsigned dimension) {
  std::vector<std::uint8_t> digits;
  if (text.empty()) return CellAddress{dimension};
  const unsigned fanout = 1u << dimension;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto dot = std::min(text.find('.', pos), text.size());
    const auto piece = text.substr(pos, dot - pos);
    unsigned value = 0;
    if (piece.empty() || piece.size() > 3) throw parse_error("invalid address '" + std::string(text) + "'");
    for (char c : piece) {
      if (c < '0' || c > '9') throw parse_error("invalid address '" + std::string(text) + "'");
      value = value * 10 + static_cast<unsigned>(c - '0');
    }
    if (value < 1 || value > fanout) {
      throw parse_error("address digit " + std::string(piece) + " outside 1.." + std::to_string(fanout));
    }
    digits.push_back(static_cast<std::uint8_t>(value - 1));
    pos = dot + 1;
  }
  return CellAddress{dimension, std::move(digits)};
}

// ---------------------------------------------------------------------------
// SegmentInterval

SegmentInterval::SegmentInterval(unsigned dimension, unsigned depth, Natural index)
    : dimension_(dimension), depth_(depth), index_(std::move(index)) {
  check_dimension(dimension_);
  if (index_ < 0 || index_ >= pow2(dimension_ * depth_)) {
    throw range_error("interval index " + index_.str() + " out of range at depth " + std::to_string(depth_));
  }
}

UnitScalar SegmentInterval::left() const { return UnitScalar::make(index_, dimension_ * depth_); }

Rational SegmentInterval::length() const { return Rational(1, pow2(dimension_ * depth_)); }

bool SegmentInterval::contains(const UnitScalar& t) const {
  const unsigned bits = dimension_ * depth_;
  if (t.precision() < bits) return t.refine(bits).mantissa() == index_;
  return (t.mantissa() >> (t.precision() - bits)) == index_;
}

bool SegmentInterval::contains(const SegmentInterval& inner) const {
  if (inner.dimension_ != dimension_ || inner.depth_ < depth_) return false;
  return (inner.index_ >> (dimension_ * (inner.depth_ - depth_))) == index_;
}

std::string SegmentInterval::to_string() const {
  return index_.str() + "/" + std::to_string(1u << dimension_) + "^" + std::to_string(depth_);
}

// ---------------------------------------------------------------------------
// Maps

SegmentInterval cell_of(const UnitScalar& t, unsigned depth, unsigned d) {
  check_dimension(d);
  const unsigned bits = d * depth;
  if (t.precision() < bits) {
    throw precision_error("segment value has " + std::to_string(t.precision()) + " bits; depth " +
                          std::to_string(depth) + " in dimension " + std::to_string(d) + " needs " +
                          std::to_string(bits));
  }
  return SegmentInterval{d, depth, t.mantissa() >> (t.precision() - bits)};
}

CellAddress point_to_address(const CubePoint& pt, unsigned depth) {
  const unsigned d = pt.dimension();
  const auto& t = tables(d);
  if (pt.precision() < depth) {
    throw precision_error("point has precision " + std::to_string(pt.precision()) + " < depth " +
                          std::to_string(depth));
  }
  std::vector<std::uint8_t> digits(depth);
  std::uint32_t s = 0;
  for (unsigned k = 1; k <= depth; ++k) {
    const std::uint8_t j = t.digit_of[s * t.fanout + octant_at(pt, k)];
    digits[k - 1] = j;
    s = t.child_state[s * t.fanout + j];
  }
  return CellAddress{d, std::move(digits)};
}

DyadicRect address_to_rect(const CellAddress& a) {
  const unsigned d = a.dimension();
  const unsigned n = a.depth();
  const auto& t = tables(d);
  std::vector<Natural> grid(d, Natural{0});
  std::uint32_t s = 0;
  for (unsigned k = 1; k <= n; ++k) {
    const std::uint32_t j = a.digits()[k - 1];
    const std::uint32_t octant = t.child_octant[s * t.fanout + j];
    for (unsigned axis = 0; axis < d; ++axis) {
      if (axis_bit(octant, axis, d)) bit_set(grid[axis], n - k);
    }
    s = t.child_state[s * t.fanout + j];
  }
  return DyadicRect{CubePoint::from_grid(grid, n), std::vector<unsigned>(d, n)};
}

SegmentInterval address_to_interval(const CellAddress& a) {
  const unsigned d = a.dimension();
  Natural q{0};
  for (auto j : a.digits()) {
    q <<= d;
    q |= j;
  }
  return SegmentInterval{d, a.depth(), std::move(q)};
}

CellAddress interval_to_address(const SegmentInterval& iv) {
  const unsigned d = iv.dimension();
  const unsigned n = iv.depth();
  std::vector<std::uint8_t> digits(n);
  for (unsigned k = 1; k <= n; ++k) {
    std::uint8_t j = 0;
    const unsigned base = d * (n - k);
    for (unsigned b = 0; b < d; ++b) {
      if (bit_test(iv.index(), base + b)) j |= static_cast<std::uint8_t>(1u << b);
    }
    digits[k - 1] = j;
  }
  return CellAddress{d, std::move(digits)};
}

UnitScalar forward_map(const CubePoint& pt, unsigned depth) {
  const unsigned d = pt.dimension();
  const auto& t = tables(d);
  if (pt.precision() < depth) {
    throw precision_error("point has precision " + std::to_string(pt.precision()) + " < depth " +
                          std::to_string(depth));
  }
  Natural q{0};
  std::uint32_t s = 0;
  for (unsigned k = 1; k <= depth; ++k) {
    const std::uint32_t j = t.digit_of[s * t.fanout + octant_at(pt, k)];
    q <<= d;
    q |= j;
    s = t.child_state[s * t.fanout + j];
  }
  return UnitScalar::make(std::move(q), d * depth);
}

CubePoint inverse_map(const UnitScalar& value, unsigned depth, unsigned d) {
  const auto& t = tables(d);
  const unsigned bits = d * depth;
  if (value.precision() < bits) {
    throw precision_error("segment value has " + std::to_string(value.precision()) + " bits; depth " +
                          std::to_string(depth) + " in dimension " + std::to_string(d) + " needs " +
                          std::to_string(bits));
  }
  std::vector<Natural> grid(d, Natural{0});
  std::uint32_t s = 0;
  for (unsigned k = 1; k <= depth; ++k) {
    std::uint32_t j = 0;
    for (unsigned b = 0; b < d; ++b) j = (j << 1) | (value.bit(d * (k - 1) + b + 1) ? 1u : 0u);
    const std::uint32_t octant = t.child_octant[s * t.fanout + j];
    for (unsigned axis = 0; axis < d; ++axis) {
      if (axis_bit(octant, axis, d)) bit_set(grid[axis], depth - k);
    }
    s = t.child_state[s * t.fanout + j];
  }
  return CubePoint::from_grid(grid, depth);
}

CubePoint compose_n_to_m(const CubePoint& pt, unsigned depth, unsigned target_dimension) {
  check_dimension(target_dimension);
  const unsigned bits = pt.dimension() * depth;
  if (bits % target_dimension != 0) {
    throw precision_error(std::to_string(bits) + " segment bits do not form a whole number of " +
                          std::to_string(target_dimension) + "-dimensional digits");
  }
  return inverse_map(forward_map(pt, depth), bits / target_dimension, target_dimension);
}

}  // namespace mpiso
