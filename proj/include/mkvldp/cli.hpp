#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkvldp/coefficients.hpp"
#include "mkvldp/dynamics.hpp"
#include "mkvldp/ldp.hpp"

namespace mkvldp::cli {

enum ExitCode : int { kOk = 0, kFailedResult = 1, kConfigError = 2, kNumericalError = 3 };

/// Invalid or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string model_name;  ///< built-in name or inline id
  CoefficientSet model;
  TimeGrid grid{1.0, 256};
  ScaleParams scales;
  std::size_t particles = 200;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::vector<double> x0, y0;
  std::string output = "mkvldp_out";

  bool write_trajectories = true;

  // average
  std::string fbar_mode = "auto";
  InvariantOptions invariant;
  std::vector<std::vector<double>> fbar_probes;

  // rate
  std::vector<std::vector<double>> targets;
  RateOptions rate;

  // rare
  std::vector<double> epsilons;
  double varepsilon_power = 2.0;
  std::size_t event_component = 0;
  double threshold = 1.0;
  bool above = true;
  std::size_t n_mc = 10000;
  std::size_t batch = 10000;
  std::string rho;  ///< empty: no Laplace table
  double rho_bound = 1.0;

  // verify
  std::vector<std::string> checks;

  std::string echo;  ///< normalized config as JSON text
};

/// Parses and validates a JSON config. `command` fills in a missing "command"
/// key and must agree with it when both are present.
RunConfig parse_config(const std::string& json_text, const std::string& command);

/// Entry point: `mkvldp <simulate|average|rate|rare|verify> --config PATH
/// [--seed U64] [--threads N] [--out DIR]`. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Runs a parsed config, writing artifacts into cfg.output.
int run_command(const RunConfig& cfg, std::ostream& out);

}  // namespace mkvldp::cli
