#pragma once

#include <string>

#include "wavelab/field.hpp"

namespace wavelab {

// Field dump format: header "# kgrid d M dk J", then one row per node:
// k-coordinates, then re/im pairs for the 2J components.
void dump_field(const SpectralField& f, int J, const std::string& path);
std::pair<SpectralField, int> load_field(const std::string& path);

// Two-column (k, omega) whitespace-separated table, strictly increasing k.
std::pair<std::vector<double>, std::vector<double>> load_band_table(
    const std::string& path);

}  // namespace wavelab
