#pragma once

#include <string>

#include "engine.hpp"

namespace crda {

// Versioned binary snapshot of the full TrainingState. Little-endian fields
// behind a text header; writes go to a temp file renamed into place so a
// failed save never leaves a partial checkpoint. Load distinguishes version
// mismatch, truncation, and shape mismatch against the supplied config.
void save_checkpoint(const std::string& path, const TrainingState& state,
                     const TrainConfig& cfg);

TrainingState load_checkpoint(const std::string& path, const TrainConfig& cfg);

}  // namespace crda
