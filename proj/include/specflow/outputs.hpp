#pragma once

#include <string>
#include <vector>

#include "specflow/flow.hpp"
#include "specflow/run_config.hpp"

namespace specflow {

// Shortest decimal representation that parses back to the exact binary
// value (round-trip formatting).
std::string format_double(double x);

struct EmitInfo {
    std::vector<std::string> files;
    double wall_seconds = 0.0;
};

// Writes trajectory.csv (per-step scalars), snapshots/V_<n>.csv at every
// record_every-th step (always including n = 0 and the final step), and
// summary.json (config echo, terminal F, total dissipation, max
// stationarity residual, wall time, seed). With gnuplot set, also writes a
// ready-to-run plot script.
EmitInfo emit_outputs(const FlowTrajectory& traj, const std::string& dir, const RunConfig& config,
                      double wall_seconds, bool gnuplot = false);

}  // namespace specflow
