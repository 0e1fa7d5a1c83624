#pragma once

// Subcommands of the command-line front end. Each reads its [section] of the
// run configuration and writes versioned files into the output directory.
//
// Seeded subcommands (curve, tongue, orbit) accept
//   seed = integrate | primary | state
//                              integrate from `state` and refine the attractor
//                              it settles on; follow the small-forcing orbit
//                              near rest up to the configured A; or refine
//                              `state` directly
//   state = x v                default 0 0
//   n = k                      period multiple; required with seed = state
// together with the sweep timing keys transient_periods, sample_periods,
// n_max, qp_samples and early_settle.

#include <filesystem>
#include <string>
#include <vector>

#include "nlres/config.hpp"
#include "nlres/io.hpp"

namespace nlres {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  // Failed items; a numerical failure of one item does not stop the others.
  std::vector<ErrorRecord> errors;
};

inline const std::vector<std::string> kCommands{"sweep", "curve", "tongue", "orbit", "natfreq"};

// [sweep] omega = lo hi count, A = lo hi count, initial = x v, timing keys.
// Writes raster.csv and raster.svg.
CommandResult cmd_sweep(const RunConfig& rc);

// [curve] param = omega | A | gamma, range = lo hi, switch = true|false.
// Writes branch.csv, one branch_pf<k><a|b>.csv per switched branch and
// branch.svg.
CommandResult cmd_curve(const RunConfig& rc);

// [tongue] family = fold | pitchfork | sync, branch_range = lo hi,
// omega_range = lo hi, A_range = lo hi, kind = odd | even | broken | isola,
// gammas = g1 g2 ... Fold and pitchfork families continue every detection of
// that type on the omega branch through the seed, skipping those that lie on
// an already traced curve. Writes tongue_<k>.csv (tongue_left/right.csv for
// sync), tongue_<k>_gamma_<g>.csv per damping stage and tongues.svg.
CommandResult cmd_tongue(const RunConfig& rc);

// [orbit] samples = count. Writes orbit.txt and orbit_trajectory.csv.
CommandResult cmd_orbit(const RunConfig& rc);

// [natfreq] x_max = values, or range = lo hi count (logarithmic spacing).
// Writes natfreq.csv.
CommandResult cmd_natfreq(const RunConfig& rc);

// Dispatches on rc.command, maps failures to exit codes and writes
// errors.csv into the output directory when anything failed.
CommandResult run_command(const RunConfig& rc);

} // namespace nlres
