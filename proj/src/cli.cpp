#include "qwalk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "qwalk/analysis.hpp"
#include "qwalk/csv.hpp"

namespace qwalk::cli {
namespace {

constexpr double kDefaultSmoothSigma = 5.0;

constexpr const char* kCommandNames[] = {"evolve", "sweep", "surface", "convergents"};

// Option values as typed, before range checks and conversion.
struct RawOptions {
  std::string alpha = "0";
  std::string steps;
  std::string x = "golden";
  std::optional<double> smooth_sigma;
  bool smooth = false;
  std::optional<int> capacity;
  std::optional<unsigned> threads;
  std::optional<std::string> map_output;
  std::string config_path;
};

struct Parser {
  CLI::App app{"Two-dimensional discrete-time quantum walk under a Peierls gauge field", "qwalk"};
  RunConfig config;
  RawOptions raw;
  std::map<std::string, CLI::App*> commands;

  Parser() {
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* evolve = add_command("evolve", "Run one walk and record per-step observables");
    evolve->add_option("--alpha", raw.alpha, "Flux ratio: p/q, decimal, or golden|inv-pi|inv-e|inv-sqrt2|inv-zeta3");
    add_coin(evolve);
    evolve->add_option("--steps", raw.steps, "Number of steps (default 100)");
    evolve->add_option("--capacity", raw.capacity, "Lattice half-width (default: --steps)");
    evolve->add_option("--smooth-sigma", raw.smooth_sigma,
                       "Add a Gaussian-smoothed origin probability column over even steps");
    evolve->add_flag("--smooth", raw.smooth, "Same as --smooth-sigma 5");
    evolve->add_option("--map-output", raw.map_output, "Also write the final probability map here");

    auto* sweep = add_command("sweep", "Observable against flux ratio for several step counts");
    sweep->add_option("--alpha-min", config.alpha_min, "Lowest flux ratio");
    sweep->add_option("--alpha-max", config.alpha_max, "Highest flux ratio");
    sweep->add_option("--alpha-count", config.alpha_count, "Number of grid points");
    sweep->add_option("--steps", raw.steps, "Comma-separated step counts (default 2,4,8,20,60)");
    sweep->add_option("--observable", config.observable, "variance|origin|participation|entropy");
    sweep->add_flag("--normalize", config.normalize, "Rescale every row by its maximum");
    add_coin(sweep);

    auto* surface = add_command("surface", "Late-time entanglement over initial coin states");
    surface->add_option("--alpha", raw.alpha, "Flux ratio");
    surface->add_option("--theta-min", config.theta_min);
    surface->add_option("--theta-max", config.theta_max);
    surface->add_option("--theta-count", config.theta_count);
    surface->add_option("--phi-min", config.phi_min);
    surface->add_option("--phi-max", config.phi_max);
    surface->add_option("--phi-count", config.phi_count);
    surface->add_option("--steps", raw.steps, "Walk length (default 500)");
    surface->add_option("--avg-window", config.avg_window, "Average entropy over this many final steps");

    auto* conv = add_command("convergents", "Continued-fraction convergents of a flux ratio");
    conv->add_option("--x", raw.x, "Real number in (0,1) or a named constant");
    conv->add_option("--depth", config.depth, "Maximum number of convergents");
  }

  CLI::App* add_command(const std::string& name, const std::string& description) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("-o,--output", config.output, "Output CSV path")->required();
    sub->add_option("--threads", raw.threads, "Worker threads for independent walks");
    sub->add_option("--config", raw.config_path, "Flat key = value file; command line wins");
    commands[name] = sub;
    return sub;
  }

  void add_coin(CLI::App* sub) {
    sub->add_option("--theta", config.theta, "Initial coin polar angle in [0, pi]");
    sub->add_option("--phi", config.phi, "Initial coin azimuth");
  }
};

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

// Splices config-file entries in right after the subcommand token so that
// later command-line occurrences take precedence.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
  const auto path = find_config_path(args);
  if (!path) return args;
  const auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) {
    return std::find(std::begin(kCommandNames), std::end(kCommandNames), a) != std::end(kCommandNames);
  });
  if (sub == args.end()) throw ConfigError("--config needs a command (evolve, sweep, surface, convergents)");

  Parser probe;
  std::set<std::string> known;
  for (const CLI::Option* opt : probe.commands.at(*sub)->get_options()) {
    for (const auto& name : opt->get_lnames()) known.insert(name);
  }
  known.erase("config");

  std::vector<std::string> merged(args.begin(), sub + 1);
  for (const auto& [written, value] : read_key_values(*path)) {
    std::string key = written;
    std::replace(key.begin(), key.end(), '_', '-');
    if (!known.contains(key)) throw ConfigError("unknown key '" + written + "' in config file " + *path);
    merged.push_back("--" + key + "=" + value);
  }
  merged.insert(merged.end(), sub + 1, args.end());
  return merged;
}

std::vector<int> parse_steps(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || v < 1) {
      throw ConfigError("--steps: '" + item + "' is not a positive integer");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--steps: empty list");
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate(RunConfig& c, const RawOptions& raw) {
  const auto parse_alpha = [](const std::string& key, const std::string& text) {
    try {
      return FluxRatio::parse(text);
    } catch (const ParameterError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };

  if (raw.threads) {
    require(*raw.threads >= 1, "--threads: must be a positive integer");
    c.threads = *raw.threads;
  }
  c.smooth_sigma = raw.smooth_sigma;
  if (raw.smooth && !c.smooth_sigma) c.smooth_sigma = kDefaultSmoothSigma;
  c.map_output = raw.map_output;
  c.capacity = raw.capacity;
  require(!c.output.empty(), "--output: path must not be empty");

  switch (c.command) {
    case Command::Evolve: {
      c.alpha = parse_alpha("--alpha", raw.alpha);
      c.steps = parse_steps(raw.steps.empty() ? "100" : raw.steps);
      require(c.steps.size() == 1, "--steps: evolve takes a single step count");
      require(std::isfinite(c.theta) && c.theta >= 0.0 && c.theta <= std::numbers::pi, "--theta: must lie in [0, pi]");
      require(std::isfinite(c.phi), "--phi: must be finite");
      if (c.capacity) require(*c.capacity >= 1, "--capacity: must be a positive integer");
      if (c.smooth_sigma) {
        require(std::isfinite(*c.smooth_sigma) && *c.smooth_sigma > 0.0, "--smooth-sigma: must be positive");
      }
      break;
    }
    case Command::Sweep: {
      c.steps = parse_steps(raw.steps.empty() ? "2,4,8,20,60" : raw.steps);
      require(c.alpha_count >= 1, "--alpha-count: must be a positive integer");
      for (const auto& [key, text] : {std::pair{"--alpha-min", c.alpha_min}, std::pair{"--alpha-max", c.alpha_max}}) {
        double v = 0.0;
        try {
          const auto f = parse_fraction(text);
          v = f ? f->value() : parse_alpha(key, text).value();
        } catch (const ParameterError& e) {
          throw ConfigError(std::string(key) + ": " + e.what());
        }
        require(v >= 0.0 && v <= 1.0, std::string(key) + ": must lie in [0, 1]");
      }
      static const std::set<std::string> observables{"variance", "origin", "participation", "entropy"};
      require(observables.contains(c.observable), "--observable: expected variance, origin, participation, or entropy");
      require(std::isfinite(c.theta) && c.theta >= 0.0 && c.theta <= std::numbers::pi, "--theta: must lie in [0, pi]");
      require(std::isfinite(c.phi), "--phi: must be finite");
      break;
    }
    case Command::Surface: {
      c.alpha = parse_alpha("--alpha", raw.alpha);
      c.steps = parse_steps(raw.steps.empty() ? "500" : raw.steps);
      require(c.steps.size() == 1, "--steps: surface takes a single step count");
      require(c.theta_count >= 1 && c.phi_count >= 1, "--theta-count/--phi-count: must be positive");
      require(std::isfinite(c.theta_min) && std::isfinite(c.theta_max) && c.theta_min >= 0.0 &&
                  c.theta_max <= std::numbers::pi && c.theta_min <= c.theta_max,
              "--theta-min/--theta-max: must satisfy 0 <= min <= max <= pi");
      require(std::isfinite(c.phi_min) && std::isfinite(c.phi_max) && c.phi_min <= c.phi_max,
              "--phi-min/--phi-max: must be finite with min <= max");
      require(c.avg_window >= 1 && c.avg_window <= c.steps.front(), "--avg-window: must lie in [1, steps]");
      break;
    }
    case Command::Convergents: {
      double x = 0.0;
      try {
        const auto f = parse_fraction(raw.x);
        x = f ? f->value() : FluxRatio::parse(raw.x).value();
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("--x: ") + e.what());
      }
      require(x > 0.0 && x < 1.0, "--x: must lie in (0, 1)");
      c.x = x;
      require(c.depth >= 1, "--depth: must be a positive integer");
      break;
    }
  }
}

Observable observable_from_name(const std::string& name) {
  if (name == "origin") return Observable::OriginRegion;
  if (name == "participation") return Observable::ParticipationRatio;
  if (name == "entropy") return Observable::Entropy;
  return Observable::Variance;
}

// Writes every table or none of them.
void write_all(const std::vector<std::pair<std::string, CsvTable>>& outputs) {
  std::vector<std::string> written;
  try {
    for (const auto& [path, table] : outputs) {
      write_csv_atomic(path, table);
      written.push_back(path);
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& path : written) std::filesystem::remove(path, ignored);
    throw;
  }
}

std::vector<std::pair<std::string, CsvTable>> run_evolve(const RunConfig& c) {
  const int steps = c.steps.front();
  WalkerState state = new_state(BlochAngles::make(c.theta, c.phi), c.capacity.value_or(steps), c.alpha);
  ObservableSeries series{measure(state)};
  evolve(state, steps, [&](const WalkerState& s) { series.push_back(measure(s)); });

  CsvTable table{{"t", "variance", "origin_region_prob", "participation_ratio", "entanglement_entropy"}, {}};
  std::vector<double> smoothed;
  if (c.smooth_sigma) {
    // Odd steps are identically zero by parity; smooth the even subsequence only.
    std::vector<double> even;
    for (const auto& r : series) {
      if (r.t % 2 == 0) even.push_back(r.origin_region_prob);
    }
    smoothed = gaussian_smooth(even, *c.smooth_sigma);
    table.header.push_back("origin_region_prob_smoothed");
  }
  for (const auto& r : series) {
    std::vector<double> row{static_cast<double>(r.t), r.variance, r.origin_region_prob, r.participation_ratio,
                            r.entanglement_entropy};
    if (c.smooth_sigma) row.push_back(r.t % 2 == 0 ? smoothed[static_cast<std::size_t>(r.t / 2)] : 0.0);
    table.rows.push_back(std::move(row));
  }

  std::vector<std::pair<std::string, CsvTable>> outputs;
  if (c.map_output) {
    const ProbabilityMap pm = probability_map(state);
    CsvTable map{{"n", "m", "probability"}, {}};
    for (int n = -pm.radius_x(); n <= pm.radius_x(); ++n) {
      for (int m = -pm.radius_y(); m <= pm.radius_y(); ++m) {
        if (const double p = pm.at(n, m); p != 0.0) map.rows.push_back({double(n), double(m), p});
      }
    }
    outputs.emplace_back(*c.map_output, std::move(map));
  }
  outputs.emplace_back(c.output, std::move(table));
  return outputs;
}

std::vector<std::pair<std::string, CsvTable>> run_sweep(const RunConfig& c) {
  const auto lo = parse_fraction(c.alpha_min);
  const auto hi = parse_fraction(c.alpha_max);
  const auto grid = lo && hi ? alpha_grid(*lo, *hi, c.alpha_count)
                             : alpha_grid(lo ? lo->value() : FluxRatio::parse(c.alpha_min).value(),
                                          hi ? hi->value() : FluxRatio::parse(c.alpha_max).value(), c.alpha_count);
  SweepOptions options;
  options.observable = observable_from_name(c.observable);
  options.init = BlochAngles::make(c.theta, c.phi);
  options.normalize = c.normalize;
  options.threads = c.threads;
  const SweepResult result = sweep_alpha(grid, c.steps, options);

  CsvTable table{{"alpha"}, {}};
  for (int t : c.steps) table.header.push_back("t=" + std::to_string(t));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> row{grid[j].coordinate};
    for (const auto& r : result.rows) row.push_back(r[j]);
    table.rows.push_back(std::move(row));
  }
  return {{c.output, std::move(table)}};
}

std::vector<std::pair<std::string, CsvTable>> run_surface(const RunConfig& c) {
  const auto thetas = linspace(c.theta_min, c.theta_max, c.theta_count);
  const auto phis = linspace(c.phi_min, c.phi_max, c.phi_count);
  const auto surface = entanglement_surface(thetas, phis, c.alpha, c.steps.front(), c.avg_window, c.threads);
  CsvTable table{{"theta"}, {}};
  for (double phi : phis) table.header.push_back("phi=" + format_number(phi));
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    std::vector<double> row{thetas[i]};
    row.insert(row.end(), surface[i].begin(), surface[i].end());
    table.rows.push_back(std::move(row));
  }
  return {{c.output, std::move(table)}};
}

std::vector<std::pair<std::string, CsvTable>> run_convergents(const RunConfig& c) {
  CsvTable table{{"i", "p", "q", "err"}, {}};
  int i = 0;
  for (const auto& cv : convergents(c.x, c.depth)) {
    table.rows.push_back({double(i++), double(cv.p), double(cv.q), cv.err});
  }
  return {{c.output, std::move(table)}};
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  const std::vector<std::string> merged = merge_config_file(args);
  Parser parser;
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    parser.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{parser.app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{parser.app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t k = 0; k < std::size(kCommandNames); ++k) {
    if (parser.commands.at(kCommandNames[k])->parsed()) parser.config.command = static_cast<Command>(k);
  }
  validate(parser.config, parser.raw);
  return parser.config;
}

int run(const RunConfig& config, std::ostream& err) {
  try {
    std::vector<std::pair<std::string, CsvTable>> outputs;
    switch (config.command) {
      case Command::Evolve: outputs = run_evolve(config); break;
      case Command::Sweep: outputs = run_sweep(config); break;
      case Command::Surface: outputs = run_surface(config); break;
      case Command::Convergents: outputs = run_convergents(config); break;
    }
    write_all(outputs);
    return 0;
  } catch (const BoundaryError& e) {
    err << "qwalk: step " << e.failing_step() << " failed: " << e.what() << '\n';
  } catch (const std::bad_alloc&) {
    err << "qwalk: out of memory allocating the lattice\n";
  } catch (const std::exception& e) {
    err << "qwalk: " << e.what() << '\n';
  }
  return 1;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const HelpRequested& help) {
    out << help.text;
    return 0;
  } catch (const ConfigError& e) {
    err << "qwalk: " << e.what() << '\n';
    return 2;
  }
  return run(config, err);
}

}  // namespace qwalk::cli
