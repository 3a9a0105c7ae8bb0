// mpiso command-line tool. Exit codes: 0 success, 1 verification
// failure, 2 usage or input error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mpiso/curve.hpp"
#include "mpiso/measure.hpp"
#include "mpiso/sampling.hpp"

namespace {

constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned env_precision() {
  const char* text = std::getenv("MPISO_PRECISION");
  if (text == nullptr || *text == '\0') return mpiso::kDefaultPrecision;
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used);
    if (used == std::string(text).size() && v > 0) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("MPISO_PRECISION must be a positive integer, got '") + text + "'");
}

void check_budget(unsigned d, unsigned depth, unsigned precision) {
  if (static_cast<unsigned long>(d) * depth > precision) {
    throw UsageError("d*depth = " + std::to_string(d * depth) + " exceeds precision " + std::to_string(precision) +
                     " (set --precision or MPISO_PRECISION)");
  }
}

std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct MapArgs {
  unsigned d = 2;
  unsigned depth = 1;
  std::optional<unsigned> precision;
  std::vector<std::string> values;
};

struct VerifyArgs {
  std::string suite;
  unsigned d = 2;
  unsigned depth = 6;
  unsigned max_depth = 10;
  unsigned unions = 1000;
  std::uint64_t samples = 1'000'000;
  unsigned grid = 16;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string format = "record";
};

struct SampleArgs {
  std::string spec_path;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  unsigned depth = 0;
  unsigned workers = 1;
  std::string output;
  bool decimal = false;
};

int run_map(const MapArgs& a) {
  mpiso::check_dimension(a.d);
  check_budget(a.d, a.depth, a.precision.value_or(env_precision()));
  if (a.values.size() != a.d) {
    throw UsageError("map expects " + std::to_string(a.d) + " coordinates, got " + std::to_string(a.values.size()));
  }
  std::vector<mpiso::UnitScalar> coords;
  for (const auto& v : a.values) coords.push_back(mpiso::UnitScalar::parse(v));
  const auto t = mpiso::forward_map(mpiso::CubePoint(std::move(coords)), a.depth);
  std::cout << mpiso::SegmentInterval(a.d, a.depth, t.mantissa()).to_string() << "  # " << decimal(t.to_double())
            << '\n';
  return 0;
}

int run_unmap(const MapArgs& a) {
  mpiso::check_dimension(a.d);
  check_budget(a.d, a.depth, a.precision.value_or(env_precision()));
  if (a.values.size() != 1) throw UsageError("unmap expects one segment value");
  const auto pt = mpiso::inverse_map(mpiso::UnitScalar::parse(a.values.front()), a.depth, a.d);
  for (unsigned i = 0; i < a.d; ++i) std::cout << (i ? " " : "") << pt[i].to_string();
  std::cout << '\n';
  return 0;
}

int run_verify(const VerifyArgs& a) {
  mpiso::check_dimension(a.d);
  std::vector<mpiso::VerificationReport> reports;
  if (a.suite == "cells") {
    reports.push_back(mpiso::audit_cells(a.d, a.depth));
    reports.push_back(mpiso::audit_convergence(a.d, a.depth, std::max(a.max_depth, a.depth + 1), a.seed));
  } else if (a.suite == "adjacency") {
    reports.push_back(mpiso::audit_adjacency(a.d, a.depth));
  } else if (a.suite == "roundtrip") {
    reports.push_back(mpiso::audit_roundtrip(a.d, a.depth));
  } else if (a.suite == "measure") {
    reports.push_back(mpiso::audit_unions(a.d, a.depth, a.unions, a.seed));
  } else if (a.suite == "uniformity") {
    if (a.d != 2) throw UsageError("the uniformity suite is defined for d = 2 only");
    mpiso::UniformityOptions o;
    o.samples = a.samples;
    o.grid = a.grid;
    o.seed = a.seed;
    o.workers = a.workers;
    reports.push_back(mpiso::monte_carlo_uniformity(o));
  } else {
    throw UsageError("unknown suite '" + a.suite + "'");
  }

  if (a.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) doc.push_back(r.to_json());
    std::cout << doc.dump(2) << '\n';
  } else {
    for (const auto& r : reports) std::cout << r.to_record() << '\n';
  }
  for (const auto& r : reports) {
    if (!r.pass) return kVerifyFailed;
  }
  return 0;
}

int run_sample(const SampleArgs& a) {
  std::ifstream in(a.spec_path);
  if (!in) throw UsageError("cannot open spec file '" + a.spec_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("spec file '" + a.spec_path + "' is not valid JSON: " + e.what());
  }
  auto specs = mpiso::parse_distribution_document(doc);
  if (specs.empty()) throw UsageError("spec file holds no distributions");
  const auto batch = mpiso::sample_independent(a.seed, a.count, std::move(specs), a.depth, a.workers);
  if (a.output.empty() || a.output == "-") {
    batch.write_csv(std::cout, !a.decimal);
  } else {
    std::ofstream out(a.output);
    if (!out) throw UsageError("cannot write '" + a.output + "'");
    batch.write_csv(out, !a.decimal);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic space-filling-curve isomorphism between the unit cube and the unit interval"};
  app.require_subcommand(1);

  MapArgs map_args;
  auto* map = app.add_subcommand("map", "Map a cube point to its segment value q/(2^d)^n");
  map->add_option("-d,--dimension", map_args.d, "Cube dimension (1-8)");
  map->add_option("-n,--depth", map_args.depth, "Refinement depth")->required();
  map->add_option("--precision", map_args.precision, "Bit budget (default: MPISO_PRECISION or 64)");
  map->add_option("coords", map_args.values, "Coordinates as m/2^p or 0b0.bits")->required();

  MapArgs unmap_args;
  auto* unmap = app.add_subcommand("unmap", "Map a segment value to the lower corner of its cube cell");
  unmap->add_option("-d,--dimension", unmap_args.d, "Cube dimension (1-8)");
  unmap->add_option("-n,--depth", unmap_args.depth, "Refinement depth")->required();
  unmap->add_option("--precision", unmap_args.precision, "Bit budget (default: MPISO_PRECISION or 64)");
  unmap->add_option("value", unmap_args.values, "Segment value, e.g. 6/4^2")->required();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", verify_args.suite, "cells | adjacency | roundtrip | measure | uniformity")->required();
  verify->add_option("-d,--dimension", verify_args.d, "Cube dimension (1-8)");
  verify->add_option("-n,--depth", verify_args.depth, "Depth for exhaustive suites");
  verify->add_option("--max-depth", verify_args.max_depth, "Finest depth for the convergence check");
  verify->add_option("-U,--unions", verify_args.unions, "Random unions for the measure suite");
  verify->add_option("-N,--samples", verify_args.samples, "Monte Carlo draws");
  verify->add_option("-k,--grid", verify_args.grid, "Histogram grid side");
  verify->add_option("--seed", verify_args.seed, "Seed for randomized checks");
  verify->add_option("-j,--workers", verify_args.workers, "Worker threads (0 = all cores)");
  verify->add_option("--format", verify_args.format, "record | json")
      ->check(CLI::IsMember({"record", "json"}));

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Draw independent variates with the given distributions");
  sample->add_option("--spec", sample_args.spec_path, "JSON distribution document")->required();
  sample->add_option("-N,--count", sample_args.count, "Number of draws")->required();
  sample->add_option("--seed", sample_args.seed, "Seed");
  sample->add_option("--depth", sample_args.depth, "Bits per coordinate (default 64/n)");
  sample->add_option("-j,--workers", sample_args.workers, "Worker threads");
  sample->add_option("-o,--output", sample_args.output, "CSV path (default stdout)");
  sample->add_flag("--decimal", sample_args.decimal, "Write 17-digit decimals instead of exact p/q");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*map) return run_map(map_args);
    if (*unmap) return run_unmap(unmap_args);
    if (*verify) return run_verify(verify_args);
    if (*sample) return run_sample(sample_args);
  } catch (const mpiso::validation_error& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsage;
}
