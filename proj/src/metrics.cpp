#include "advforge/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "advforge/mask_ops.hpp"

namespace advforge {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: scores/labels size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw std::invalid_argument("auc: labels must be 0/1");
        n_pos += static_cast<std::size_t>(l);
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: need both classes present (got " + std::to_string(n_pos) +
                                    " positives of " + std::to_string(n) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // midranks over tie groups, 1-based
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) rank_sum_pos += rank[k];
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["auc"] = auc;
    j["accuracy"] = accuracy;
    j["n_pristine"] = n_pristine;
    j["n_forgery"] = n_forgery;
    j["mean_region_l1_on_forgeries"] = mean_region_l1_on_forgeries;
    std::vector<std::vector<int>> cm;
    for (const auto& row : type_confusion) cm.emplace_back(row.begin(), row.end());
    j["type_confusion"] = cm;
    return j.dump(2);
}

EvalReport evaluate(const DatasetManifest& manifest, const DetectorNet& detector, nn::ParamStore& w) {
    if (manifest.records.empty()) throw std::invalid_argument("evaluate: empty manifest");
    EvalReport rep;
    std::vector<double> scores;
    std::vector<int> labels;
    double region_acc = 0;
    int region_count = 0;
    int correct = 0;
    for (const auto& rec : manifest.records) {
        const LoadedSample s = load_sample(manifest, rec);
        const DetectorOutput out = detector.forward_output(w, s.image);
        const double score = score_forgery(out);
        const int label = s.category == Category::Pristine ? 0 : 1;
        scores.push_back(score);
        labels.push_back(label);
        if ((score >= 0.5 ? 1 : 0) == label) ++correct;
        const int t_gt = s.category == Category::Pristine ? kTypePristine : kTypeDatasetForgery;
        int pred = 0;
        out.type_logits.maxCoeff(&pred);
        rep.type_confusion[static_cast<std::size_t>(t_gt)][static_cast<std::size_t>(pred)] += 1;
        if (s.category == Category::Pristine) {
            rep.n_pristine += 1;
        } else {
            rep.n_forgery += 1;
            const Mask hard = (s.gt_mask->array() >= 0.5).cast<double>();
            region_acc += region_loss(downsample_16(hard), out.region_map);
            region_count += 1;
        }
    }
    rep.auc = auc(scores, labels);
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
    rep.mean_region_l1_on_forgeries = region_count ? region_acc / region_count : 0.0;
    return rep;
}

}  // namespace advforge
