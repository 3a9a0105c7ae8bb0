#pragma once

// Independent variates with prescribed distribution functions from one
// uniform draw: split the draw into n coordinates with the inverse map,
// then push each coordinate through its generalized inverse
// sup{t : F_i(t) < x_i}.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mpiso/dyadic.hpp"

namespace mpiso {

/// A distribution document failed validation. field() names the offending
/// entry, e.g. `atoms[1].mass`, `pieces[0].cdf_from` or `mass_sum`.
class validation_error : public std::invalid_argument {
public:
  validation_error(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

/// Exact decimal (`-1.25`, `3e-2`) or rational (`7/8`) text.
Rational parse_rational(std::string_view text);

struct Atom {
  Rational at;
  Rational mass;
};

/// Affine CDF from cdf_from at `from` to cdf_to at `to`. Values are
/// absolute CDF levels, not increments.
struct LinearPiece {
  Rational from;
  Rational to;
  Rational cdf_from;
  Rational cdf_to;
};

/// Distribution function built from point masses and affine pieces; flat
/// everywhere else. Validated on construction: non-decreasing,
/// right-continuous, total mass exactly 1.
class DistributionSpec {
public:
  DistributionSpec(std::string name, std::vector<Atom> atoms, std::vector<LinearPiece> pieces);

  static DistributionSpec uniform01(std::string name = "uniform");
  static DistributionSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<LinearPiece>& pieces() const { return pieces_; }
  const Rational& support_lower() const { return events_.front().start; }
  const Rational& support_upper() const { return events_.back().end; }

  /// F(t), exact.
  Rational cdf(const Rational& t) const;
  /// F(t) in double arithmetic.
  double cdf(double t) const;

  /// sup{t : F(t) < u} for u in (0,1), exact. Throws range_error for u
  /// outside the open interval.
  Rational quantile(const Rational& u) const;
  double quantile(double u) const;

private:
  // Atoms and pieces merged in increasing order; an atom sorts before a
  // piece starting at the same point. before/after are F just before the
  // event and just after it (the piece's end value for pieces).
  struct Event {
    bool is_atom;
    Rational start, end;
    Rational before, after;
    double start_d, end_d, before_d, after_d;
  };

  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<LinearPiece> pieces_;
  std::vector<Event> events_;
};

/// Reads a document holding one spec object, an array of them, or an
/// object with a "specs" array.
std::vector<DistributionSpec> parse_distribution_document(const nlohmann::json& doc);

/// inverse_map of u into [0,1)^n at the given depth. Throws
/// precision_error if u has fewer than n*depth bits.
CubePoint split_uniform(const UnitScalar& u, unsigned n, unsigned depth);

/// Largest depth with n*depth <= 64.
unsigned default_sampling_depth(unsigned n);

struct SampleBatch {
  std::uint64_t seed = 0;
  unsigned depth = 0;
  std::vector<DistributionSpec> specs;
  std::vector<std::vector<Rational>> columns;  // one per spec, equal lengths

  std::size_t size() const { return columns.empty() ? 0 : columns.front().size(); }
  std::vector<double> column_as_double(std::size_t i) const;

  /// Header row of spec names, then one row per draw. Values are decimal
  /// (17 significant digits) unless exact is set, in which case `p/q`.
  void write_csv(std::ostream& out, bool exact = false) const;
};

/// For draw i: u = n*depth random bits from the counter stream at i,
/// x = split_uniform(u), X_j = quantile(F_j, centre of x_j's depth cell).
SampleBatch sample_independent(std::uint64_t seed, std::size_t count, std::vector<DistributionSpec> specs,
                               unsigned depth = 0, unsigned workers = 1);

}  // namespace mpiso
