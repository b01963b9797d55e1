#pragma once

#include "covertsim/sim.hpp"

#include <string>
#include <vector>

namespace covertsim {

// Fixed 12-significant-digit formatting used by every emitted number.
std::string format_number(double v);

struct EmittedFiles {
  std::vector<std::string> paths;
};

// Writes per-scheme metric tables (slot, mse, d01, d10, pfa, pmd, xi, rate,
// power), one CDF file per metric (sorted samples with empirical
// probabilities), and a summary file.  format is "csv" or "json"; output is
// byte-deterministic for a fixed (config, seed).
EmittedFiles emit_results(const AggregateResult& agg, const std::string& format,
                          const std::string& dir);

}  // namespace covertsim
