#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mpiso/curve.hpp"
#include "mpiso/sampling.hpp"
#include "mpiso/stats.hpp"
#include "oracles.hpp"

using namespace mpiso;

namespace {

DistributionSpec fair_coin(const std::string& name = "coin") {
  return DistributionSpec(name, {{0, Rational(1, 2)}, {1, Rational(1, 2)}}, {});
}

}  // namespace

TEST_CASE("parse_rational") {
  CHECK(parse_rational("0.3") == Rational(3, 10));
  CHECK(parse_rational("-1.25") == Rational(-5, 4));
  CHECK(parse_rational("3e-2") == Rational(3, 100));
  CHECK(parse_rational("7/8") == Rational(7, 8));
  CHECK(parse_rational("2") == 2);
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("0.9") == Rational(9, 10));
  CHECK(parse_rational("010/08") == Rational(5, 4));
  CHECK(parse_rational("0.000") == 0);
  CHECK_THROWS_AS(parse_rational("1/0"), parse_error);
  CHECK_THROWS_AS(parse_rational("x"), parse_error);
  CHECK_THROWS_AS(parse_rational(""), parse_error);
  CHECK_THROWS_AS(parse_rational("1.2.3"), parse_error);
}

TEST_CASE("cdf") {
  const auto u = DistributionSpec::uniform01();
  CHECK(u.cdf(Rational(3, 10)) == Rational(3, 10));
  CHECK(u.cdf(Rational(-1)) == 0);
  CHECK(u.cdf(Rational(2)) == 1);

  const DistributionSpec point("point", {{0, 1}}, {});
  CHECK(point.cdf(Rational(-1)) == 0);
  CHECK(point.cdf(Rational(0)) == 1);

  CHECK(fair_coin().cdf(Rational(1, 2)) == Rational(1, 2));
  CHECK(fair_coin().cdf(0.5) == 0.5);
}

TEST_CASE("quantile") {
  CHECK(DistributionSpec::uniform01().quantile(Rational(7, 10)) == Rational(7, 10));
  CHECK(fair_coin().quantile(Rational(3, 10)) == 0);
  CHECK(fair_coin().quantile(Rational(7, 10)) == 1);
  // On the plateau level itself the sup is the left end of the plateau.
  CHECK(fair_coin().quantile(Rational(1, 2)) == 0);
  CHECK_THROWS_AS(fair_coin().quantile(Rational(0)), range_error);
  CHECK_THROWS_AS(fair_coin().quantile(Rational(1)), range_error);
  CHECK(fair_coin().quantile(0.7) == 1.0);

  // Piece, gap, piece: F rises on [0,1), is flat at 1/2 on [1,3), rises on [3,4).
  const DistributionSpec gap("gap", {}, {{0, 1, 0, Rational(1, 2)}, {3, 4, Rational(1, 2), 1}});
  CHECK(gap.quantile(Rational(1, 4)) == Rational(1, 2));
  CHECK(gap.quantile(Rational(1, 2)) == 1);
  CHECK(gap.quantile(Rational(3, 4)) == Rational(7, 2));
  CHECK(gap.support_lower() == 0);
  CHECK(gap.support_upper() == 4);
}

TEST_CASE("quantile and cdf satisfy the Galois relation") {
  std::mt19937_64 gen(21);
  for (int s = 0; s < 100; ++s) {
    const auto spec = oracle::random_spec(gen);
    for (int i = 0; i < 40; ++i) {
      const Rational u(1 + gen() % 999, 1000);
      const Rational t(static_cast<int>(gen() % 81) - 40, 16 + gen() % 3);
      const Rational q = spec.quantile(u);
      REQUIRE((q <= t) == (u <= spec.cdf(t)));
      // F(q-) <= u <= F(q)
      REQUIRE(spec.cdf(q) >= u);
      REQUIRE(spec.cdf(q - Rational(1, 1'000'000'000)) < u);
    }
  }
}

TEST_CASE("quantile matches the mesh-scan supremum") {
  std::mt19937_64 gen(8);
  const double step = 1e-6;
  for (int s = 0; s < 40; ++s) {
    const auto spec = oracle::random_spec(gen);
    const double lo = oracle::to_d(spec.support_lower()) - 1.0, hi = oracle::to_d(spec.support_upper()) + 1.0;
    for (int i = 0; i < 20; ++i) {
      const double u = 0.001 + 0.998 * std::uniform_real_distribution<double>()(gen);
      const double q = oracle::to_d(spec.quantile(Rational(u)));
      CHECK(std::abs(q - oracle::mesh_sup(spec, u, lo, hi, step)) <= step * 1.001);
      CHECK(spec.quantile(u) == doctest::Approx(q));
    }
  }
}

TEST_CASE("spec validation names the offending field") {
  auto field_of = [](auto&& fn) {
    try {
      fn();
    } catch (const validation_error& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of([] { DistributionSpec("a", {{0, Rational(9, 10)}}, {}); }) == "mass_sum");
  CHECK(field_of([] { DistributionSpec("a", {{0, Rational(1, 2)}, {1, 0}}, {}); }) == "atoms[1].mass");
  CHECK(field_of([] { DistributionSpec("a", {}, {{1, 0, 0, 1}}); }) == "pieces[0].to");
  CHECK(field_of([] { DistributionSpec("a", {}, {{0, 1, 0, Rational(1, 2)}, {Rational(1, 2), 2, Rational(1, 2), 1}}); }) ==
        "pieces[1].from");
  CHECK(field_of([] { DistributionSpec("a", {}, {{0, 1, Rational(1, 4), 1}}); }) == "pieces[0].cdf_from");
  CHECK(field_of([] { DistributionSpec("a", {{Rational(1, 2), Rational(1, 2)}}, {{0, 1, 0, Rational(1, 2)}}); }) ==
        "atoms[0].at");
  CHECK(field_of([] { DistributionSpec("a", {{0, Rational(1, 2)}, {0, Rational(1, 2)}}, {}); }) == "atoms[1].at");
}

TEST_CASE("spec documents") {
  const auto doc = nlohmann::json::parse(R"({"specs": [
      {"name": "u", "pieces": [{"from": "0", "to": "1", "cdf_from": "0", "cdf_to": "1"}]},
      {"name": "coin", "atoms": [{"at": 0, "mass": "1/2"}, {"at": "1", "mass": 0.5}]}]})");
  const auto specs = parse_distribution_document(doc);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].name() == "u");
  CHECK(specs[1].cdf(Rational(0)) == Rational(1, 2));
  CHECK(parse_distribution_document(specs[1].to_json()).front().atoms().size() == 2);
  CHECK(parse_distribution_document(nlohmann::json::array({specs[0].to_json()})).size() == 1);

  try {
    parse_distribution_document(nlohmann::json::parse(R"([{"name":"a","atoms":[{"at":0,"mass":0.5}]},
        {"name":"b","atoms":[{"at":0,"mass":"0.9"}]}])"));
    FAIL("expected validation_error");
  } catch (const validation_error& e) {
    CHECK(e.field() == "specs[0].mass_sum");
  }
  CHECK_THROWS_AS(parse_distribution_document(nlohmann::json::parse(R"({"atoms":[{"at":"q","mass":1}]})")),
                  validation_error);
}

TEST_CASE("split_uniform") {
  const auto t = make_scalar(0b101101, 6);
  CHECK(split_uniform(t, 1, 6)[0].identical(t));
  CHECK(split_uniform(t, 1, 3)[0].identical(make_scalar(0b101, 3)));
  CHECK(forward_map(split_uniform(t, 2, 3), 3).identical(t));
  CHECK(forward_map(split_uniform(make_scalar(0b101101, 7), 2, 3), 3).identical(make_scalar(0b101101 >> 1, 6)));
  CHECK_THROWS_AS(split_uniform(t, 2, 4), precision_error);
  CHECK(default_sampling_depth(3) == 21);
  CHECK(default_sampling_depth(1) == 64);
}

TEST_CASE("split_uniform marginals are exactly uniform") {
  for (unsigned depth = 1; depth <= 6; ++depth) {
    const std::uint64_t cells = std::uint64_t{1} << (2 * depth);
    std::vector<std::uint64_t> x_count(std::size_t{1} << depth), y_count(std::size_t{1} << depth);
    for (std::uint64_t q = 0; q < cells; ++q) {
      const auto pt = split_uniform(make_scalar(q, 2 * depth), 2, depth);
      const auto g = pt.grid_coords(depth);
      ++x_count[static_cast<std::size_t>(g[0])];
      ++y_count[static_cast<std::size_t>(g[1])];
    }
    for (auto c : x_count) REQUIRE(c == (std::uint64_t{1} << depth));
    for (auto c : y_count) REQUIRE(c == (std::uint64_t{1} << depth));
  }
}

TEST_CASE("sample_independent: uniform marginal") {
  const auto batch = sample_independent(1, 100'000, {DistributionSpec::uniform01()});
  auto xs = batch.column_as_double(0);
  std::sort(xs.begin(), xs.end());
  const double d = stats::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d <= stats::ks_threshold(xs.size(), 0.999));
}

TEST_CASE("sample_independent: two coins are independent") {
  const auto batch = sample_independent(2, 100'000, {fair_coin("a"), fair_coin("b")});
  std::vector<std::uint64_t> table(4, 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ++table[static_cast<std::size_t>(batch.columns[0][i] * 2 + batch.columns[1][i])];
  }
  const auto r = stats::chi_squared_contingency(stats::BinnedCounts::table(2, 2, table));
  CHECK(r.statistic <= stats::chi2_threshold(1, 0.999));
}

TEST_CASE("sample_independent: mixed marginals, n = 3") {
  const auto batch =
      sample_independent(3, 50'000, {DistributionSpec::uniform01("x"), fair_coin("c"), DistributionSpec::uniform01("z")});
  CHECK(batch.depth == 21);
  for (std::size_t j : {0u, 2u}) {
    auto xs = batch.column_as_double(j);
    std::sort(xs.begin(), xs.end());
    CHECK(stats::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); }) <=
          stats::ks_threshold(xs.size(), 0.999));
  }
  std::uint64_t ones = 0;
  for (const auto& v : batch.columns[1]) ones += v == 1;
  const auto r = stats::chi_squared(stats::BinnedCounts::flat({batch.size() - ones, ones}),
                                    std::vector<double>{25'000, 25'000});
  CHECK(r.statistic <= stats::chi2_threshold(1, 0.999));
}

TEST_CASE("sampling is deterministic and worker independent") {
  const std::vector<DistributionSpec> specs{DistributionSpec::uniform01("u"), fair_coin("c")};
  std::ostringstream a, b, c;
  sample_independent(5, 1000, specs, 0, 1).write_csv(a);
  sample_independent(5, 1000, specs, 0, 4).write_csv(b);
  sample_independent(6, 1000, specs, 0, 1).write_csv(c);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
  CHECK(a.str().substr(0, 4) == "u,c\n");

  std::ostringstream exact;
  sample_independent(5, 3, {fair_coin("c")}, 8).write_csv(exact, true);
  const std::string text = exact.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
