#pragma once

#include <string>

#include "wplap/config.hpp"

namespace wplap {

/* Exit map shared by every command:
 *   0  everything requested passed
 *   2  configuration or parameter problem (bad file, bad exponents)
 *   3  a weight condition failed (divergence, degenerate geometry)
 *   4  a solver stage failed (stall, collapse, no negative minimum)
 *   5  a verification gate failed
 */
struct RunOutcome {
  int exit_code = 0;
  std::string message;
};

/* Each command writes deterministic artifacts into cfg.out_dir — JSON
 * reruns with the same config and seed are byte-identical; the wall-clock
 * timestamp goes to metadata.json only.
 *
 *   check-weights : weights.json
 *   solve         : summary.json, u1.csv, u0.csv, iterations.csv, path_log.csv
 *   verify        : inequalities.json, fibering.csv
 *   report        : report.json, report.csv (merges whatever exists)
 */
RunOutcome cmd_check_weights(const ExperimentConfig& cfg);
RunOutcome cmd_solve(const ExperimentConfig& cfg);
RunOutcome cmd_verify(const ExperimentConfig& cfg);
RunOutcome cmd_report(const std::string& run_dir);

}  // namespace wplap
