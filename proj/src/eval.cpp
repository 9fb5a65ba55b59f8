#include "terraseg/eval.hpp"

#include <cstdio>

namespace terraseg {

EvalReport evaluate(const std::vector<TerrainClass>& predicted,
                    const std::vector<TerrainClass>& truth) {
    if (predicted.size() != truth.size())
        throw Error("evaluate: predicted and truth label counts differ");
    EvalReport report;
    report.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = std::size_t(truth[i]);
        const auto p = std::size_t(predicted[i]);
        report.confusion[t][p]++;
        if (t == p) report.correct++;
    }
    for (int k = 0; k < kTerrainClassCount; ++k) {
        std::size_t row = 0;
        for (int j = 0; j < kTerrainClassCount; ++j) row += report.confusion[std::size_t(k)][std::size_t(j)];
        report.recall[std::size_t(k)] =
            row == 0 ? 1.0 : double(report.confusion[std::size_t(k)][std::size_t(k)]) / double(row);
    }
    return report;
}

std::string render_report(const EvalReport& report) {
    static const char* kRows[kTerrainClassCount] = {
        "Ground segmentation accuracy",
        "Manmade structure segmentation accuracy",
        "Vegetation segmentation accuracy",
    };
    char line[160];
    std::string out;
    out += "Segmentation evaluation\n";
    out += "-----------------------\n";
    for (int k = 0; k < kTerrainClassCount; ++k) {
        std::snprintf(line, sizeof line, "%-42s %6.1f%%\n", kRows[k],
                      100.0 * report.recall[std::size_t(k)]);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-42s %6.1f%%  (%zu / %zu points)\n", "Overall accuracy",
                  report.total ? 100.0 * double(report.correct) / double(report.total) : 100.0,
                  report.correct, report.total);
    out += line;
    out += "\nConfusion matrix (rows = truth, columns = predicted)\n";
    std::snprintf(line, sizeof line, "%-12s %12s %12s %12s\n", "", terrain_class_name(TerrainClass::Ground),
                  terrain_class_name(TerrainClass::ManMade), terrain_class_name(TerrainClass::Vegetation));
    out += line;
    for (int t = 0; t < kTerrainClassCount; ++t) {
        std::snprintf(line, sizeof line, "%-12s %12zu %12zu %12zu\n",
                      terrain_class_name(TerrainClass(t)), report.confusion[std::size_t(t)][0],
                      report.confusion[std::size_t(t)][1], report.confusion[std::size_t(t)][2]);
        out += line;
    }
    return out;
}

}  // namespace terraseg
