#pragma once

#include <string>

#include "mfschrod/multifidelity.hpp"

namespace mfs {

// Versioned JSON archive of the offline stage: training samples, selection,
// per-quantity basis/high snapshots and Gram factors, and model metadata.
// Doubles survive the round trip exactly (shortest round-trip printing).
void save_pipeline(const SurrogatePipeline& pipe, const std::string& path);

// Restores a pipeline against freshly constructed model handles; throws
// ConfigError if the stored model metadata (name, dim, grid) does not match.
SurrogatePipeline load_pipeline(const std::string& path,
                                const FidelityModel& low,
                                const std::optional<FidelityModel>& medium,
                                const FidelityModel& high);

}  // namespace mfs
