#pragma once

#include <iosfwd>
#include <vector>

#include "ecodec/harness.hpp"

namespace ecodec {

// Minimal scatter of (accuracy, perplexity) per mode, one series color each.
// Multi-attribute sweeps plot the mean accuracy across controlled attributes.
void write_sweep_svg(const std::vector<SweepPoint>& points, std::ostream& out);

}  // namespace ecodec
