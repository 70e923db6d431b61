#include "advforge/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace advforge {

using nn::NodeId;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;

DetectorNet::DetectorNet(DetectorConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.channels.size() != 4)
        throw std::invalid_argument("DetectorNet: need exactly 4 conv blocks for stride-16 features");
}

void DetectorNet::init_params(ParamStore& store, Rng& rng) const {
    int in_ch = 3;
    for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
        const int out_ch = cfg_.channels[i];
        const double stddev = std::sqrt(2.0 / (in_ch * 9.0));
        store.create("conv" + std::to_string(i) + ".w", Tensor::randn({out_ch, in_ch, 3, 3}, rng, stddev));
        store.create("conv" + std::to_string(i) + ".b", Tensor::zeros({out_ch}));
        in_ch = out_ch;
    }
    const int feat = in_ch;
    const double head_std = 1.0 / std::sqrt(static_cast<double>(feat));
    store.create("region.w", Tensor::randn({1, feat, 1, 1}, rng, head_std));
    store.create("region.b", Tensor::zeros({1}));
    store.create("main.w", Tensor::randn({2, feat}, rng, head_std));
    store.create("type.w", Tensor::randn({kNumTypeClasses, feat}, rng, head_std));
    store.create("ratio.w", Tensor::randn({1, feat}, rng, head_std));
    store.create("ratio.b", Tensor::zeros({1}));
}

DetectorNet::Nodes DetectorNet::forward(Tape& tape, ParamStore& store, const Tensor& img3) const {
    if (img3.ndim() != 3 || img3.shape[0] != 3)
        throw std::invalid_argument("DetectorNet::forward: expected [3,H,W], got " + img3.shape_str());
    const int h = img3.shape[1], w = img3.shape[2];
    if (h < 16 || w < 16 || h % 16 != 0 || w % 16 != 0)
        throw std::invalid_argument("DetectorNet::forward: input " + img3.shape_str() +
                                    " must have H,W divisible by 16");
    NodeId x = tape.constant(img3);
    for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
        const std::string p = "conv" + std::to_string(i);
        x = tape.conv2d(x, tape.param(store, p + ".w"), tape.param(store, p + ".b"), 2, 1);
        x = tape.leaky_relu(x, cfg_.leaky_slope);
    }
    Nodes out;
    out.region_map =
        tape.sigmoid(tape.conv2d(x, tape.param(store, "region.w"), tape.param(store, "region.b"), 1, 0));
    const NodeId feat = tape.l2_normalize(tape.global_avg_pool(x));
    out.main_cos = tape.matvec(tape.l2_normalize_rows(tape.param(store, "main.w")), feat);
    out.type_cos = tape.matvec(tape.l2_normalize_rows(tape.param(store, "type.w")), feat);
    const NodeId ratio_raw = tape.dense(tape.global_avg_pool(x), tape.param(store, "ratio.w"),
                                        tape.param(store, "ratio.b"));
    out.ratio = tape.sigmoid(tape.pick(ratio_raw, 0));
    return out;
}

DetectorOutput DetectorNet::forward_output(ParamStore& store, const Image& img) const {
    Tape tape;
    const Nodes nodes = forward(tape, store, nn::image_to_chw(img));
    DetectorOutput out;
    const Tensor& mc = tape.value(nodes.main_cos);
    out.main_logits << mc.data[0], mc.data[1];
    out.region_map = nn::tensor_to_mask(tape.value(nodes.region_map));
    const Tensor& tc = tape.value(nodes.type_cos);
    out.type_logits = Eigen::Map<const Eigen::VectorXd>(tc.data.data(), kNumTypeClasses);
    out.ratio = tape.value(nodes.ratio).data[0];
    return out;
}

double score_forgery(const DetectorOutput& out) {
    const double m = out.main_logits.maxCoeff();
    const double e0 = std::exp(out.main_logits[0] - m);
    const double e1 = std::exp(out.main_logits[1] - m);
    return e1 / (e0 + e1);
}

}  // namespace advforge
