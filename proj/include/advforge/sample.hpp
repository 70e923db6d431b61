#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "advforge/image.hpp"

namespace advforge {

enum class Category { Pristine = 0, DatasetForgery = 1, Synthesized = 2 };

inline const char* category_name(Category c) {
    switch (c) {
        case Category::Pristine: return "pristine";
        case Category::DatasetForgery: return "dataset_forgery";
        case Category::Synthesized: return "synthesized";
    }
    return "?";
}

inline Category category_from_name(const std::string& s) {
    if (s == "pristine") return Category::Pristine;
    if (s == "dataset_forgery") return Category::DatasetForgery;
    if (s == "synthesized") return Category::Synthesized;
    throw std::invalid_argument("unknown category '" + s + "'");
}

/// Blend-type label classes for the detector's type head: 0..2 = synthesized
/// (alpha/poisson/mixup), 3 = pristine (no blending), 4 = dataset forgery
/// (blend outside the pool).
inline constexpr int kTypePristine = 3;
inline constexpr int kTypeDatasetForgery = 4;
inline constexpr int kNumTypeClasses = 5;

/// One resolved training/eval sample: the image the detector sees plus all
/// derived labels.
struct SampleRecord {
    Image image;
    Category category = Category::Pristine;
    Mask m_gt;                    // stride-16 region target, (H/16) x (W/16)
    int t_gt = kTypePristine;     // 0..4
    std::optional<double> a_gt;   // present iff t_gt == 2
    int binary_label = 0;         // 0 pristine, 1 forgery
};

/// Enforce the label-assignment rules; throws with the violated rule.
inline void validate_sample_record(const SampleRecord& r) {
    auto fail = [](const std::string& m) { throw std::logic_error("SampleRecord: " + m); };
    if ((r.m_gt.array() < 0.0).any() || (r.m_gt.array() > 1.0).any()) fail("m_gt outside [0,1]");
    switch (r.category) {
        case Category::Pristine:
            if (r.t_gt != kTypePristine) fail("pristine requires t_gt = 3");
            if (r.binary_label != 0) fail("pristine requires binary_label = 0");
            if (r.m_gt.size() == 0 || (r.m_gt.array() != 0.0).any()) fail("pristine requires all-zero m_gt");
            if (r.a_gt.has_value()) fail("pristine must not carry a_gt");
            break;
        case Category::DatasetForgery:
            if (r.t_gt != kTypeDatasetForgery) fail("dataset forgery requires t_gt = 4");
            if (r.binary_label != 1) fail("dataset forgery requires binary_label = 1");
            if (r.a_gt.has_value()) fail("dataset forgery must not carry a_gt");
            break;
        case Category::Synthesized:
            if (r.t_gt < 0 || r.t_gt > 2) fail("synthesized requires t_gt in {0,1,2}");
            if (r.binary_label != 1) fail("synthesized requires binary_label = 1");
            if (r.a_gt.has_value() != (r.t_gt == 2)) fail("a_gt present iff t_gt = 2 (mixup)");
            break;
    }
    if (r.a_gt && (*r.a_gt < 0.0 || *r.a_gt > 1.0)) fail("a_gt outside [0,1]");
}

}  // namespace advforge
