#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "model/record.hpp"

namespace thg::model {

// Fine-grained question types use the TREC "COARSE:fine" spelling, e.g.
// "HUM:ind" or "NUM:count". TREC's six coarse classes fold into the five
// dataset classes: ABBR and NUM both become OTHER.
std::span<const std::string_view> fine_grained_labels();

bool is_fine_grained_label(std::string_view label);

// Dataset-level major type for a fine label, or nullopt for unknown labels.
std::optional<MajorType> parent_major(std::string_view fine_label);

}  // namespace thg::model
