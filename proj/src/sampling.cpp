#include "mpiso/sampling.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <thread>

#include "mpiso/curve.hpp"
#include "mpiso/random.hpp"

namespace mpiso {

namespace {

bool digits_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Natural pow10(unsigned e) {
  Natural r{1};
  for (unsigned i = 0; i < e; ++i) r *= 10;
  return r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string indexed(std::string_view group, std::size_t i, std::string_view field) {
  return std::string(group) + "[" + std::to_string(i) + "]." + std::string(field);
}

// cpp_int reads a leading 0 as an octal prefix.
Natural decimal_natural(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Natural{0} : Natural{std::string(digits.substr(first))};
}

Rational json_rational(const nlohmann::json& j, const std::string& field) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_number_unsigned()) return Rational(Natural(j.get<std::uint64_t>()));
    // Shortest round-trip text of the double, read as an exact decimal.
    if (j.is_number_float()) return parse_rational(j.dump());
  } catch (const parse_error& e) {
    throw validation_error(field, e.what());
  }
  throw validation_error(field, "expected a number or an exact decimal/rational string");
}

const nlohmann::json& required(const nlohmann::json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) throw validation_error(field, "missing");
  return obj.at(key);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Rational { throw parse_error("invalid exact number '" + original + "'"); };
  if (text.empty()) return fail();

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (num.empty() || den.empty() || !digits_only(num) || !digits_only(den)) return fail();
    const Natural q = decimal_natural(den);
    if (q == 0) throw parse_error("zero denominator in '" + original + "'");
    value = Rational(decimal_natural(num), q);
  } else {
    std::string_view mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = text.substr(0, e);
      auto exp_text = text.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (exp_text.empty() || exp_text.size() > 6 || !digits_only(exp_text)) return fail();
      exponent = std::stol(std::string(exp_text));
      if (exp_negative) exponent = -exponent;
    }
    std::string_view int_part = mantissa;
    std::string_view frac_part;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
      int_part = mantissa.substr(0, dot);
      frac_part = mantissa.substr(dot + 1);
    }
    if ((int_part.empty() && frac_part.empty()) || !digits_only(int_part) || !digits_only(frac_part)) return fail();
    const Natural digits = decimal_natural(std::string(int_part) + std::string(frac_part));
    exponent -= static_cast<long>(frac_part.size());
    value = exponent >= 0 ? Rational(digits * pow10(static_cast<unsigned>(exponent)))
                          : Rational(digits, pow10(static_cast<unsigned>(-exponent)));
  }
  return negative ? Rational(-value) : value;
}

// ---------------------------------------------------------------------------
// DistributionSpec

DistributionSpec::DistributionSpec(std::string name, std::vector<Atom> atoms, std::vector<LinearPiece> pieces)
    : name_(std::move(name)), atoms_(std::move(atoms)), pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].mass <= 0) throw validation_error(indexed("atoms", i, "mass"), "must be positive");
    if (atoms_[i].mass > 1) throw validation_error(indexed("atoms", i, "mass"), "exceeds 1");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (!(p.from < p.to)) throw validation_error(indexed("pieces", i, "to"), "must be greater than from");
    if (p.cdf_from < 0 || p.cdf_from > 1) throw validation_error(indexed("pieces", i, "cdf_from"), "must lie in [0,1]");
    if (p.cdf_to < p.cdf_from) throw validation_error(indexed("pieces", i, "cdf_to"), "must be >= cdf_from");
    if (p.cdf_to > 1) throw validation_error(indexed("pieces", i, "cdf_to"), "must lie in [0,1]");
  }

  // Merge in order; remember original positions for error messages.
  struct Pending {
    Rational at;
    bool is_atom;
    std::size_t index;
  };
  std::vector<Pending> order;
  for (std::size_t i = 0; i < atoms_.size(); ++i) order.push_back({atoms_[i].at, true, i});
  for (std::size_t i = 0; i < pieces_.size(); ++i) order.push_back({pieces_[i].from, false, i});
  std::stable_sort(order.begin(), order.end(), [](const Pending& a, const Pending& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.is_atom && !b.is_atom;
  });

  Rational level{0};
  std::optional<Rational> last_atom;
  std::optional<Rational> covered_until;  // end of the previous piece
  std::optional<std::size_t> previous_piece;
  for (const auto& item : order) {
    Event e;
    e.is_atom = item.is_atom;
    if (item.is_atom) {
      const auto& a = atoms_[item.index];
      if (last_atom && *last_atom == a.at) {
        throw validation_error(indexed("atoms", item.index, "at"), "duplicate atom location " + a.at.str());
      }
      if (covered_until && a.at < *covered_until) {
        throw validation_error(indexed("atoms", item.index, "at"),
                               "lies strictly inside pieces[" + std::to_string(*previous_piece) + "]");
      }
      last_atom = a.at;
      e.start = e.end = a.at;
      e.before = level;
      level += a.mass;
      e.after = level;
    } else {
      const auto& p = pieces_[item.index];
      if (covered_until && p.from < *covered_until) {
        throw validation_error(indexed("pieces", item.index, "from"),
                               "overlaps pieces[" + std::to_string(*previous_piece) + "]");
      }
      if (p.cdf_from != level) {
        throw validation_error(indexed("pieces", item.index, "cdf_from"),
                               "is " + p.cdf_from.str() + " but the distribution function just before " +
                                   p.from.str() + " is " + level.str());
      }
      covered_until = p.to;
      previous_piece = item.index;
      e.start = p.from;
      e.end = p.to;
      e.before = p.cdf_from;
      e.after = p.cdf_to;
      level = p.cdf_to;
    }
    if (level > 1) {
      throw validation_error("mass_sum", "atom masses plus piece increments exceed 1 (reach " + level.str() + ")");
    }
    e.start_d = to_double(e.start);
    e.end_d = to_double(e.end);
    e.before_d = to_double(e.before);
    e.after_d = to_double(e.after);
    events_.push_back(std::move(e));
  }
  if (level != 1) {
    throw validation_error("mass_sum", "atom masses plus piece increments sum to " + level.str() + ", expected 1");
  }
}

DistributionSpec DistributionSpec::uniform01(std::string name) {
  return DistributionSpec{std::move(name), {}, {{Rational(0), Rational(1), Rational(0), Rational(1)}}};
}

DistributionSpec DistributionSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw validation_error("spec", "expected an object with atoms and/or pieces");
  std::string name = j.value("name", std::string{"x"});
  std::vector<Atom> atoms;
  std::vector<LinearPiece> pieces;
  if (j.contains("atoms")) {
    const auto& arr = j.at("atoms");
    if (!arr.is_array()) throw validation_error("atoms", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      atoms.push_back({json_rational(required(arr[i], "at", indexed("atoms", i, "at")), indexed("atoms", i, "at")),
                       json_rational(required(arr[i], "mass", indexed("atoms", i, "mass")), indexed("atoms", i, "mass"))});
    }
  }
  if (j.contains("pieces")) {
    const auto& arr = j.at("pieces");
    if (!arr.is_array()) throw validation_error("pieces", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto get = [&](const char* key) {
        const auto field = indexed("pieces", i, key);
        return json_rational(required(arr[i], key, field), field);
      };
      pieces.push_back({get("from"), get("to"), get("cdf_from"), get("cdf_to")});
    }
  }
  return DistributionSpec{std::move(name), std::move(atoms), std::move(pieces)};
}

nlohmann::json DistributionSpec::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : atoms_) atoms.push_back({{"at", a.at.str()}, {"mass", a.mass.str()}});
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : pieces_) {
    pieces.push_back({{"from", p.from.str()}, {"to", p.to.str()}, {"cdf_from", p.cdf_from.str()}, {"cdf_to", p.cdf_to.str()}});
  }
  return {{"name", name_}, {"atoms", atoms}, {"pieces", pieces}};
}

Rational DistributionSpec::cdf(const Rational& t) const {
  // Last event starting at or before t.
  auto it = std::upper_bound(events_.begin(), events_.end(), t,
                             [](const Rational& x, const Event& e) { return x < e.start; });
  if (it == events_.begin()) return Rational(0);
  const Event& e = *std::prev(it);
  if (e.is_atom || t >= e.end) return e.after;
  return e.before + (t - e.start) / (e.end - e.start) * (e.after - e.before);
}

double DistributionSpec::cdf(double t) const {
  auto it = std::upper_bound(events_.begin(), events_.end(), t,
                             [](double x, const Event& e) { return x < e.start_d; });
  if (it == events_.begin()) return 0.0;
  const Event& e = *std::prev(it);
  if (e.is_atom || t >= e.end_d) return e.after_d;
  return e.before_d + (t - e.start_d) / (e.end_d - e.start_d) * (e.after_d - e.before_d);
}

Rational DistributionSpec::quantile(const Rational& u) const {
  if (u <= 0 || u >= 1) throw range_error("quantile: u = " + u.str() + " outside (0,1)");
  // {t : F(t) < u} is (-inf, q) with q at the first event reaching u.
  auto it = std::lower_bound(events_.begin(), events_.end(), u,
                             [](const Event& e, const Rational& x) { return e.after < x; });
  const Event& e = *it;  // exists: the last event ends at level 1 > u
  if (e.is_atom) return e.start;
  return e.start + (u - e.before) / (e.after - e.before) * (e.end - e.start);
}

double DistributionSpec::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw range_error("quantile: u outside (0,1)");
  return to_double(quantile(Rational(u)));
}

std::vector<DistributionSpec> parse_distribution_document(const nlohmann::json& doc) {
  const nlohmann::json* list = &doc;
  if (doc.is_object() && doc.contains("specs")) list = &doc.at("specs");
  std::vector<DistributionSpec> out;
  if (list->is_array()) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      try {
        out.push_back(DistributionSpec::from_json((*list)[i]));
      } catch (const validation_error& e) {
        throw validation_error("specs[" + std::to_string(i) + "]." + e.field(),
                               std::string(e.what()).substr(e.field().size() + 2));
      }
    }
  } else {
    out.push_back(DistributionSpec::from_json(*list));
  }
  if (out.empty()) throw validation_error("specs", "no distributions given");
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

CubePoint split_uniform(const UnitScalar& u, unsigned n, unsigned depth) { return inverse_map(u, depth, n); }

unsigned default_sampling_depth(unsigned n) {
  check_dimension(n);
  return 64 / n;
}

std::vector<double> SampleBatch::column_as_double(std::size_t i) const {
  std::vector<double> out;
  out.reserve(columns.at(i).size());
  for (const auto& v : columns[i]) out.push_back(to_double(v));
  return out;
}

void SampleBatch::write_csv(std::ostream& out, bool exact) const {
  for (std::size_t j = 0; j < specs.size(); ++j) out << (j ? "," : "") << specs[j].name();
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out << ',';
      if (exact) {
        out << columns[j][i].str();
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", to_double(columns[j][i]));
        out << buf;
      }
    }
    out << '\n';
  }
}

SampleBatch sample_independent(std::uint64_t seed, std::size_t count, std::vector<DistributionSpec> specs,
                               unsigned depth, unsigned workers) {
  const auto n = static_cast<unsigned>(specs.size());
  check_dimension(n);
  if (depth == 0) depth = default_sampling_depth(n);

  SampleBatch batch;
  batch.seed = seed;
  batch.depth = depth;
  batch.specs = std::move(specs);
  batch.columns.assign(n, std::vector<Rational>(count));

  const CounterRng rng(seed);
  const Rational half_cell(1, pow2(depth + 1));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CubePoint x = split_uniform(rng.unit_scalar(i, n * depth), n, depth);
      for (unsigned j = 0; j < n; ++j) {
        // Centre of the coordinate's cell: strictly inside (0,1).
        batch.columns[j][i] = batch.specs[j].quantile(x[j].to_rational() + half_cell);
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, count))));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, count * w / workers, count * (w + 1) / workers);
  run(0, count / workers);
  for (auto& t : pool) t.join();
  return batch;
}

}  // namespace mpiso
