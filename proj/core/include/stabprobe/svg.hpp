#pragma once

#include "stabprobe/experiments.hpp"

#include <string>

namespace stabprobe {

// Line plot of a 1-D sweep: probe mean with dispersion bars, plus a
// secondary API axis when API values are present.  Deterministic bytes for
// a given GridResult.
std::string sweep_svg(const GridResult& g, const std::string& title, const std::string& x_label);

// Heatmap of a (p x L/K) grid: cells colored by log10(mean probe), frontier
// markers joined by a line, hatched iso-band overlay when the mask is set.
std::string heatmap_svg(const GridResult& g, const std::string& title, const std::string& x_label);

}  // namespace stabprobe
