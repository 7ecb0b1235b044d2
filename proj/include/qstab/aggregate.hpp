#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qstab/diagnostics.hpp"

namespace qstab {

struct AggregateRow {
  std::string method;
  long step = 0;
  IqmSummary stats;
};

// Cross-trial aggregation of one windowed metric column
// (mean_true_cost | mean_shaped_cost | destab_frac). Every trial file in
// every directory must share the same window step grid; a mismatch is a
// ConfigError. One output row per (method, window). With a single trial the
// CI degenerates to the point and n_samples = 1 flags it.
std::vector<AggregateRow> aggregate(
    const std::vector<std::filesystem::path>& run_dirs,
    const std::string& metric, int n_bootstrap = 2000,
    std::uint64_t seed = 0x51A9);

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::filesystem::path& out_file);

}  // namespace qstab
