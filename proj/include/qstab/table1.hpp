#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qstab/diagnostics.hpp"
#include "qstab/server_alloc.hpp"

namespace qstab {

struct AdvantageProbeRow {
  std::string setting;  // "true", "l1_shaped", "l2_shaped"
  IqmSummary stats;     // IQM over per-trial destabilizing-advantage means
  int trials_with_destab = 0;
};

// Early-learning advantage probe: an untrained agent acts uniformly at random
// until one rollout buffer is filled, advantages are estimated against a
// freshly initialized critic, normalized by the buffer standard deviation,
// and averaged over the destabilizing slots. Reported in cost convention
// (positive = ought to be discouraged), aggregated by IQM across trials.
// Trials are paired across the three cost settings (same seeds, same
// trajectories), so the settings differ only in the cost used.
std::vector<AdvantageProbeRow> advantage_probe(const ServerAllocConfig& env,
                                               int trials, int buffer_len,
                                               std::uint64_t base_seed,
                                               int n_bootstrap = 2000);

void write_advantage_probe_csv(const std::vector<AdvantageProbeRow>& rows,
                               const std::filesystem::path& out_file);

}  // namespace qstab
