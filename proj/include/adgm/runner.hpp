#pragma once

#include <iosfwd>
#include <string>

#include "adgm/config.hpp"

namespace adgm {

/// Exit codes shared by the command layer.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_solver = 3;
inline constexpr int exit_verification = 4;

/// Execute a configured run: writes run.csv, summary.txt and meshes/ under
/// cfg.output (and run.dat when gnuplot is set). Progress goes to `log`.
int run_command(const Config& cfg, bool gnuplot, std::ostream& log);

/// Run a verify suite, printing one pass/fail line per invariant.
int verify_command(const std::string& suite, std::ostream& out);

/// Classify a recorded run directory; writes classification.csv next to the
/// meshes and echoes it to `out`.
int classify_command(const std::string& dir, std::ostream& out, std::ostream& err);

/// Write a built-in initial mesh to a file.
int mesh_gen_command(const std::string& name, const std::string& path, std::ostream& err);

}  // namespace adgm
