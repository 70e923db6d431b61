#pragma once

#include <Eigen/Dense>
#include <optional>

#include "advforge/detector.hpp"
#include "advforge/sample.hpp"
#include "advforge/tape.hpp"

namespace advforge {

/// Additive-margin softmax on cosine logits.
struct AmSoftmaxParams {
    double margin = 0.35;
    double scale = 30.0;
};

/// Weights of the three auxiliary losses in the combined objective.
struct LossWeights {
    double alpha = 0.1;   // region
    double mu = 0.05;     // blend type
    double gamma = 0.1;   // ratio
};

struct LossBreakdown {
    double main = 0, region = 0, type = 0, ratio = 0;
    double total = 0;
};

/// -log( e^{s(cos_y - m)} / (e^{s(cos_y - m)} + sum_{j!=y} e^{s cos_j}) ).
double am_softmax_from_cos(const Eigen::VectorXd& cos, int label, const AmSoftmaxParams& p);

/// Cosines from an unnormalized feature and class-weight rows; throws on a
/// zero-norm feature or class row.
double am_softmax_from_features(const Eigen::VectorXd& feature, const Eigen::MatrixXd& class_weights,
                                int label, const AmSoftmaxParams& p);

/// Mean absolute deviation between the stride-16 maps.
double region_loss(const Mask& m_gt, const Mask& m_e);

/// |a_gt - a_e| when t_gt selects mixup, else 0.
double ratio_loss(std::optional<double> a_gt, double a_e, int t_gt);

/// Weighted combination; labels must satisfy the SampleRecord invariants.
LossBreakdown total_loss(const SampleRecord& sample, const DetectorOutput& out,
                         const LossWeights& w, const AmSoftmaxParams& ams);

// --- tape builders (training path) ---

nn::NodeId am_softmax_loss_node(nn::Tape& tape, nn::NodeId cos, int label, const AmSoftmaxParams& p);
nn::NodeId region_loss_node(nn::Tape& tape, nn::NodeId region_map, const Mask& m_gt);
nn::NodeId ratio_loss_node(nn::Tape& tape, nn::NodeId ratio, double a_gt);

struct LossNodes {
    nn::NodeId main = -1, region = -1, type = -1, ratio = -1;  // ratio stays -1 when gated off
    nn::NodeId total = -1;
};

LossNodes total_loss_nodes(nn::Tape& tape, const DetectorNet::Nodes& out, const SampleRecord& sample,
                           const LossWeights& w, const AmSoftmaxParams& ams);

}  // namespace advforge
