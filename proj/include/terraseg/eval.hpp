#pragma once

#include <array>
#include <string>
#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

struct EvalReport {
    std::array<std::array<std::size_t, kTerrainClassCount>, kTerrainClassCount> confusion{};
    std::array<double, kTerrainClassCount> recall{};  // diagonal / truth row sum
    std::size_t total = 0;
    std::size_t correct = 0;
};

// Confusion is indexed [truth][predicted]. Classes absent from the truth get
// recall 1 (vacuous). Throws on length mismatch.
EvalReport evaluate(const std::vector<TerrainClass>& predicted,
                    const std::vector<TerrainClass>& truth);

// Plain-text table with one per-class segmentation accuracy row.
std::string render_report(const EvalReport& report);

}  // namespace terraseg
