#pragma once

// The four example systems used for figure reproduction.

#include "bloch/system_model.hpp"

#include <vector>

namespace bloch {

/// Figure presets 1..4; throws std::out_of_range otherwise.
LindbladSystem figure_system(int figure);

std::vector<int> figure_ids();

}  // namespace bloch
