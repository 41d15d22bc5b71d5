#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksmi/gaussmodel.hpp"
#include "ksmi/knn_mi.hpp"
#include "ksmi/ksmi_estimator.hpp"
#include "ksmi/neural_mi.hpp"

namespace ksmi::cli {

enum class Subcommand {
  sample,
  estimate,
  gaussian,
  bound,
  residual,
  bench_independence,
  bench_dimension,
  bench_neural,
  check_lipschitz,
};

// Bad command line; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --help was given; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::estimate;
  std::string input;
  std::string output;  // empty: stdout
  std::string plot;    // empty: no SVG

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  SyntheticModelSpec model;
  std::size_t n = 1000;
  bool independent = false;

  std::size_t k = 1;
  std::size_t m = 100;
  bool neural = false;
  KsgConfig ksg;
  TrainConfig train;

  // bound
  std::size_t dx = 0;
  std::size_t dy = 0;
  std::optional<OperatorNorms> norms;

  // benchmarks
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> k_grid;
  std::vector<std::size_t> d_grid;
  std::size_t trials = 100;
  std::size_t oracle_m = 5000;

  KsmiConfig ksmi_config() const;
  InnerEstimator inner() const;
};

// Parses argv (argv[0] is the program name). `env_seed` is the value of
// KSMI_SEED, used when --seed is absent. Throws UsageError, or
// HelpRequested for --help.
RunConfig parse_args(int argc, const char* const* argv,
                     const char* env_seed = nullptr);

// Runs a validated config. Returns the exit code; module failures are
// reported on `err` and give 1.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_args + dispatch with exit-code mapping; --help prints usage, gives 0.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err, const char* env_seed = nullptr);

}  // namespace ksmi::cli
