#pragma once

#include <ostream>

#include "tscgd/config.hpp"

namespace tscgd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitGradcheck = 4;

/// Replicates, fits the rate, writes <out>/curve.csv and <out>/meta.txt, and
/// prints the slope and final mean distance.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Exponent table for every preset and T up to max_levels.
int cmd_presets(int max_levels, std::ostream& out, std::ostream& err);

int cmd_gradcheck(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point. Errors are reported as one line on `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tscgd
