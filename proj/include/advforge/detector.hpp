#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "advforge/image.hpp"
#include "advforge/rng.hpp"
#include "advforge/sample.hpp"
#include "advforge/tape.hpp"

namespace advforge {

struct DetectorConfig {
    std::vector<int> channels = {8, 16, 32, 64};  // four stride-2 blocks -> feature stride 16
    double leaky_slope = 0.1;
};

/// Head outputs for one image. The main/type entries are cosine logits
/// (normalized-feature, normalized-class-weight inner products); losses apply
/// margin and scale on top of them.
struct DetectorOutput {
    Eigen::Vector2d main_logits = Eigen::Vector2d::Zero();  // [pristine, forgery]
    Mask region_map;                                        // (H/16) x (W/16), in [0,1]
    Eigen::VectorXd type_logits = Eigen::VectorXd::Zero(kNumTypeClasses);
    double ratio = 0.5;                                     // A_e in [0,1]
};

/// D(., w): shared conv backbone at stride 16 plus four heads. No batch
/// coupling anywhere: each sample's outputs depend on that sample alone.
class DetectorNet {
public:
    explicit DetectorNet(DetectorConfig cfg = {});

    void init_params(nn::ParamStore& store, Rng& rng) const;

    struct Nodes {
        nn::NodeId main_cos;    // [2]
        nn::NodeId region_map;  // [1, H/16, W/16]
        nn::NodeId type_cos;    // [5]
        nn::NodeId ratio;       // scalar
    };
    Nodes forward(nn::Tape& tape, nn::ParamStore& store, const nn::Tensor& img3) const;

    DetectorOutput forward_output(nn::ParamStore& store, const Image& img) const;

    const DetectorConfig& config() const { return cfg_; }

private:
    DetectorConfig cfg_;
};

/// softmax(main_logits)[forgery].
double score_forgery(const DetectorOutput& out);

}  // namespace advforge
