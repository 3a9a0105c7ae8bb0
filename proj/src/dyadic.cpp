#include "mpiso/dyadic.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace mpiso {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

unsigned parse_small(std::string_view s, std::string_view what) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (!all_digits(s) || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw parse_error("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

// log2 of a power of two, or -1.
int exact_log2(unsigned k) {
  if (k == 0 || (k & (k - 1)) != 0) return -1;
  int e = 0;
  while (k > 1) {
    k >>= 1;
    ++e;
  }
  return e;
}

}  // namespace

Natural pow2(unsigned e) {
  Natural r{0};
  boost::multiprecision::bit_set(r, e);
  return r;
}

UnitScalar UnitScalar::make(Natural mantissa, unsigned precision) {
  if (mantissa < 0 || (mantissa != 0 && boost::multiprecision::msb(mantissa) >= precision)) {
    std::ostringstream os;
    os << "mantissa " << mantissa << " out of range for precision " << precision
       << " (value must lie in [0,1))";
    throw range_error(os.str());
  }
  return UnitScalar{std::move(mantissa), precision};
}

UnitScalar make_scalar(Natural mantissa, unsigned precision) {
  return UnitScalar::make(std::move(mantissa), precision);
}

UnitScalar UnitScalar::refine(unsigned new_precision) const {
  if (new_precision < precision_) {
    throw precision_error("refine: cannot lower precision from " + std::to_string(precision_) +
                          " to " + std::to_string(new_precision));
  }
  return UnitScalar{mantissa_ << (new_precision - precision_), new_precision};
}

UnitScalar refine(const UnitScalar& s, unsigned new_precision) { return s.refine(new_precision); }

UnitScalar UnitScalar::truncate(unsigned new_precision) const {
  if (new_precision >= precision_) return refine(new_precision);
  return UnitScalar{mantissa_ >> (precision_ - new_precision), new_precision};
}

bool UnitScalar::bit(unsigned k) const {
  if (k == 0 || k > precision_) return false;
  return boost::multiprecision::bit_test(mantissa_, precision_ - k);
}

Rational UnitScalar::to_rational() const { return Rational(mantissa_, pow2(precision_)); }

double UnitScalar::to_double() const { return static_cast<double>(to_rational()); }

std::string UnitScalar::to_string() const {
  return mantissa_.str() + "/2^" + std::to_string(precision_);
}

std::string UnitScalar::to_binary_string() const {
  std::string out = "0b0";
  if (precision_ == 0) return out;
  out += '.';
  for (unsigned k = 1; k <= precision_; ++k) out += bit(k) ? '1' : '0';
  return out;
}

UnitScalar UnitScalar::parse(std::string_view text) {
  const std::string original(text);
  if (text.starts_with("0b")) {
    auto rest = text.substr(2);
    if (rest == "0") return UnitScalar{Natural{0}, 0};
    if (!rest.starts_with("0.")) throw parse_error("binary fraction must start with 0b0.: '" + original + "'");
    auto bits = rest.substr(2);
    if (bits.empty()) throw parse_error("binary fraction has no digits: '" + original + "'");
    Natural m{0};
    for (char c : bits) {
      if (c != '0' && c != '1') throw parse_error("invalid binary digit in '" + original + "'");
      m <<= 1;
      if (c == '1') m |= 1;
    }
    return UnitScalar{std::move(m), static_cast<unsigned>(bits.size())};
  }

  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw parse_error("expected m/2^p or 0b0.bits: '" + original + "'");
  const auto num = text.substr(0, slash);
  const auto den = text.substr(slash + 1);
  const auto caret = den.find('^');
  if (caret == std::string_view::npos) throw parse_error("expected power denominator K^e: '" + original + "'");
  if (!all_digits(num)) throw parse_error("invalid numerator in '" + original + "'");

  const unsigned base = parse_small(den.substr(0, caret), "base");
  const unsigned exponent = parse_small(den.substr(caret + 1), "exponent");
  const int lg = exact_log2(base);
  if (lg < 1) throw parse_error("denominator base must be a power of two >= 2: '" + original + "'");

  // cpp_int would read a leading 0 as an octal prefix.
  const auto first = num.find_first_not_of('0');
  Natural m = first == std::string_view::npos ? Natural{0} : Natural{std::string(num.substr(first))};
  const unsigned p = static_cast<unsigned>(lg) * exponent;
  try {
    return make(std::move(m), p);
  } catch (const range_error& e) {
    throw range_error(std::string(e.what()) + " in '" + original + "'");
  }
}

bool operator==(const UnitScalar& a, const UnitScalar& b) {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const UnitScalar& a, const UnitScalar& b) {
  const unsigned p = std::max(a.precision_, b.precision_);
  const Natural lhs = a.mantissa_ << (p - a.precision_);
  const Natural rhs = b.mantissa_ << (p - b.precision_);
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------

CubePoint::CubePoint(std::vector<UnitScalar> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("CubePoint needs at least one coordinate");
  unsigned p = 0;
  for (const auto& c : coords_) p = std::max(p, c.precision());
  for (auto& c : coords_) {
    if (c.precision() != p) c = c.refine(p);
  }
}

CubePoint CubePoint::from_grid(const std::vector<Natural>& grid, unsigned precision) {
  std::vector<UnitScalar> coords;
  coords.reserve(grid.size());
  for (const auto& g : grid) coords.push_back(UnitScalar::make(g, precision));
  return CubePoint{std::move(coords)};
}

CubePoint CubePoint::refine(unsigned new_precision) const {
  CubePoint out = *this;
  for (auto& c : out.coords_) c = c.refine(new_precision);
  return out;
}

CubePoint CubePoint::truncate(unsigned new_precision) const {
  CubePoint out = *this;
  for (auto& c : out.coords_) c = c.truncate(new_precision);
  return out;
}

std::vector<Natural> CubePoint::grid_coords(unsigned level) const {
  if (level > precision()) {
    throw precision_error("grid_coords: level " + std::to_string(level) + " exceeds precision " +
                          std::to_string(precision()));
  }
  std::vector<Natural> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) out.push_back(c.mantissa() >> (c.precision() - level));
  return out;
}

std::string CubePoint::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out += ' ';
    out += coords_[i].to_string();
  }
  return out;
}

std::strong_ordering operator<=>(const CubePoint& a, const CubePoint& b) {
  const auto n = std::min(a.coords_.size(), b.coords_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a.coords_[i] <=> b.coords_[i]; c != 0) return c;
  }
  return a.coords_.size() <=> b.coords_.size();
}

bool is_on_grid(const CubePoint& pt, unsigned level) {
  if (level > pt.precision()) {
    throw precision_error("is_on_grid: level " + std::to_string(level) + " exceeds precision " +
                          std::to_string(pt.precision()));
  }
  const unsigned shift = pt.precision() - level;
  for (const auto& c : pt.coords()) {
    // m / 2^p = a / 2^level  <=>  2^(p-level) divides m
    if (c.mantissa() == 0 || boost::multiprecision::lsb(c.mantissa()) >= shift) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

DyadicRect::DyadicRect(CubePoint lower, std::vector<unsigned> side_exponents)
    : lower_(std::move(lower)), sides_(std::move(side_exponents)) {
  if (sides_.size() != lower_.dimension()) {
    throw range_error("DyadicRect: " + std::to_string(sides_.size()) + " side exponents for a " +
                      std::to_string(lower_.dimension()) + "-dimensional corner");
  }
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    // x + 2^-k <= 1
    if (lower_[i].to_rational() + Rational(1, pow2(sides_[i])) > 1) {
      throw range_error("DyadicRect: axis " + std::to_string(i) + " extends past 1");
    }
  }
}

Rational DyadicRect::volume() const {
  unsigned total = 0;
  for (unsigned k : sides_) total += k;
  return Rational(1, pow2(total));
}

bool DyadicRect::contains(const CubePoint& pt) const {
  if (pt.dimension() != dimension()) return false;
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    const Rational x = pt[i].to_rational();
    const Rational lo = lower_[i].to_rational();
    if (x < lo || x >= lo + Rational(1, pow2(sides_[i]))) return false;
  }
  return true;
}

bool DyadicRect::aligned_to(unsigned level) const {
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    if (sides_[i] > level) return false;
    const auto& c = lower_[i];
    if (c.precision() > level && c.mantissa() != 0 &&
        boost::multiprecision::lsb(c.mantissa()) < c.precision() - level) {
      return false;
    }
  }
  return true;
}

std::string DyadicRect::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    if (i) out += " x ";
    out += "[" + lower_[i].to_string() + ", +2^-" + std::to_string(sides_[i]) + ")";
  }
  return out;
}

}  // namespace mpiso
