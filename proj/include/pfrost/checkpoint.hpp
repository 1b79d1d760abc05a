#pragma once

#include <string>

#include "pfrost/model.hpp"

namespace pfrost {

// Flat binary archive: the ModelConfig followed by one (name, shape, tag,
// trainable, raw float64 data) record per parameter. Round-trips
// bit-exactly.
void save_checkpoint(const std::string& path, const TransformerModel& model);
TransformerModel load_checkpoint(const std::string& path);

}  // namespace pfrost
