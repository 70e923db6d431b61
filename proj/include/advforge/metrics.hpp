#pragma once

#include <array>
#include <string>
#include <vector>

#include "advforge/detector.hpp"
#include "advforge/losses.hpp"
#include "advforge/manifest.hpp"

namespace advforge {

/// Mann-Whitney AUC via midranks: P(score_forgery > score_pristine) with ties
/// counted half. Throws unless both classes are present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalReport {
    double auc = 0;
    double accuracy = 0;  // at threshold 0.5 on the forgery score
    int n_pristine = 0;
    int n_forgery = 0;
    double mean_region_l1_on_forgeries = 0;
    std::array<std::array<int, kNumTypeClasses>, kNumTypeClasses> type_confusion{};  // [true][pred]

    std::string to_json() const;
};

/// Deterministic pass over the manifest with a loaded detector.
EvalReport evaluate(const DatasetManifest& manifest, const DetectorNet& detector,
                    nn::ParamStore& w);

}  // namespace advforge
