#ifndef GIBBSDIM_CONFIG_HPP
#define GIBBSDIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gibbsdim {

// Flat key = value experiment description. File values are overridden
// by CLI flags, which are overridden by nothing; environment variables
// GIBBSDIM_SEED / GIBBSDIM_THREADS fill unset seed/threads.
struct ExperimentConfig {
  std::string partition = "gauss";
  std::string measure = "logsquare";
  std::string model = "pl";  // pl | gauss
  std::uint64_t orbits = 100;
  std::uint64_t length = 100000;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> checkpoints;  // empty: decades up to length

  // subcommand-specific knobs
  double alpha = 2.0;
  double delta = 0.1;
  double eta = 0.05;
  std::uint64_t kmin = 2;
  std::uint64_t kmax = 10000;
  std::uint64_t nmax = 10000;
  std::uint64_t k0 = 100;
  double lstar = 1e9;
  std::uint64_t position = 0;  // 0: plant at the orbit end
  int depth_cap = 12;
  std::uint64_t burn_in = 30000;  // first index for max-type estimator stats

  std::string output;  // CSV path; empty writes to stdout
  unsigned threads = 0;  // 0: hardware concurrency

  std::vector<std::uint64_t> effective_checkpoints() const;
};

ExperimentConfig parse_config_file(const std::string& path);
// key/value pair from a CLI flag; unknown keys raise ParseError.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
void apply_env(ExperimentConfig& cfg);

// deterministic config echo for output manifests
std::string config_echo(const ExperimentConfig& cfg);

}  // namespace gibbsdim

#endif
