#pragma once

#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/flux_ratio.hpp"

namespace qwalk::cli {

enum class Command { Evolve, Sweep, Surface, Convergents };

/// Bad flag, bad value, or bad config file. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Evolve;

  FluxRatio alpha;
  double theta = std::numbers::pi / 2;
  double phi = std::numbers::pi / 2;
  std::vector<int> steps{100};
  std::optional<int> capacity;  // evolve: lattice half-width, defaults to steps

  // sweep
  std::string alpha_min = "0";
  std::string alpha_max = "1";
  int alpha_count = 1000;
  std::string observable = "variance";
  bool normalize = false;

  // surface
  double theta_min = 0.0;
  double theta_max = std::numbers::pi;
  int theta_count = 21;
  double phi_min = 0.0;
  double phi_max = 2 * std::numbers::pi;
  int phi_count = 21;
  int avg_window = 50;

  // convergents
  double x = kGoldenRatio;
  int depth = 10;

  std::optional<double> smooth_sigma;
  std::string output;
  std::optional<std::string> map_output;
  unsigned threads = 0;
};

/// Command line over `--config` file over defaults. `args` includes the
/// program name. Throws ConfigError; help requests surface as HelpRequested.
RunConfig parse_config(const std::vector<std::string>& args);

struct HelpRequested {
  std::string text;
};

/// Executes a parsed config. Returns 0, or 1 for numerical/boundary failures
/// (reported on `err`, no output file left behind).
int run(const RunConfig& config, std::ostream& err);

/// parse_config + run with exit-code mapping; used by the qwalk binary.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwalk::cli
