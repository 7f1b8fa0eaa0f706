#ifndef GIBBSDIM_RUNNER_HPP
#define GIBBSDIM_RUNNER_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gibbsdim/config.hpp"
#include "gibbsdim/estimators.hpp"
#include "gibbsdim/measure.hpp"
#include "gibbsdim/orbit.hpp"
#include "gibbsdim/partition.hpp"

namespace gibbsdim {

// Running statistics of one orbit snapshot at a checkpoint depth.
struct CheckpointStat {
  std::uint64_t n = 0;
  double cum_log_p = 0.0;
  double cum_log_r = 0.0;
  double max_x = 0.0;
  std::uint64_t argmax = 0;
  double s_total = 0.0;
  double s_trimmed = 0.0;
  double symbolic = 0.0;
  double symbolic_log_length = 0.0;  // continuant length under model=gauss
  double lower_cover = 0.0;      // NaN when degenerate at this depth
  double min_lower_cover = 0.0;  // running min over 1..n (inf when none)
  double max_blowup = 0.0;       // running max over 2..n
  double max_case_split = 0.0;   // running max over burn_in..n (-inf none)
  double neighbor_last = 0.0;    // ratio at last step <= n with digit != 1
  std::uint64_t neighbor_n = 0;  // 0 when no valid step yet
  CoverEstimate lower_full;      // full estimate at this depth
  CoverEstimate neighbor_full;   // full estimate at the last valid step
};

struct OrbitSummary {
  std::uint64_t orbit_id = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointStat> checkpoints;
  FrequencyTable freq;
};

struct BatchOptions {
  bool with_lower = false;
  bool with_neighbor = false;
  bool with_case_split = false;
  bool with_blowup = false;
  bool with_freq = false;
  // symbolic ratios against the true gauss-map cylinder length from the
  // continuant recurrence instead of the piecewise-linear sum
  bool gauss_length = false;
  std::uint64_t case_k0 = 100;
  std::uint64_t burn_in = 30000;
  std::uint64_t freq_cap = 64;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Deterministic parallel batch: orbit i uses derive_seed(master, i) and
// results are merged in orbit order, so the thread count never changes
// a byte of output.
std::vector<OrbitSummary> run_batch(const DigitMeasure& measure,
                                    const Partition& part,
                                    std::uint64_t orbits, std::uint64_t length,
                                    std::uint64_t master_seed,
                                    std::span<const std::uint64_t> checkpoints,
                                    const BatchOptions& opt);

struct CheckResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AcceptanceOptions {
  unsigned threads = 0;
};

// The twelve toolkit-level acceptance checks at their full scales; the
// acceptance binary layers independent brute-force oracles on top.
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt,
                                        std::ostream& log);

// Steep-profile table measure used by the window-sum scan check: flat
// head, k^-1.2 mid segment from 2000 to 21001, quadratic powerlaw tail.
DigitMeasure make_scan_profile_measure();

int run_subcommand(const std::string& sub, ExperimentConfig cfg,
                   std::ostream& out, std::ostream& err);

const char* library_version();

}  // namespace gibbsdim

#endif
