#include "advforge/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace advforge {

using nn::NodeId;
using nn::Tape;
using nn::Tensor;

double am_softmax_from_cos(const Eigen::VectorXd& cos, int label, const AmSoftmaxParams& p) {
    if (label < 0 || label >= cos.size())
        throw std::invalid_argument("am_softmax: label " + std::to_string(label) + " out of range");
    if (p.margin < 0.0 || p.scale <= 0.0)
        throw std::invalid_argument("am_softmax: need margin >= 0 and scale > 0");
    Eigen::VectorXd adj = p.scale * cos;
    adj[label] = p.scale * (cos[label] - p.margin);
    const double m = adj.maxCoeff();
    const double lse = m + std::log((adj.array() - m).exp().sum());
    return lse - adj[label];
}

double am_softmax_from_features(const Eigen::VectorXd& feature, const Eigen::MatrixXd& class_weights,
                                int label, const AmSoftmaxParams& p) {
    if (class_weights.cols() != feature.size())
        throw std::invalid_argument("am_softmax: class weights shape mismatch");
    const double fn = feature.norm();
    if (fn < 1e-12) throw std::runtime_error("am_softmax: zero-norm feature");
    Eigen::VectorXd cos(class_weights.rows());
    for (Eigen::Index j = 0; j < class_weights.rows(); ++j) {
        const double wn = class_weights.row(j).norm();
        if (wn < 1e-12) throw std::runtime_error("am_softmax: zero-norm class weight row");
        cos[j] = class_weights.row(j).dot(feature) / (wn * fn);
    }
    return am_softmax_from_cos(cos, label, p);
}

double region_loss(const Mask& m_gt, const Mask& m_e) {
    if (m_gt.rows() != m_e.rows() || m_gt.cols() != m_e.cols())
        throw std::invalid_argument("region_loss: shape mismatch " + std::to_string(m_gt.rows()) + "x" +
                                    std::to_string(m_gt.cols()) + " vs " + std::to_string(m_e.rows()) +
                                    "x" + std::to_string(m_e.cols()));
    return (m_gt - m_e).abs().mean();
}

double ratio_loss(std::optional<double> a_gt, double a_e, int t_gt) {
    if (t_gt < 0 || t_gt >= kNumTypeClasses)
        throw std::invalid_argument("ratio_loss: t_gt out of range");
    if (t_gt != 2) return 0.0;
    if (!a_gt.has_value()) throw std::invalid_argument("ratio_loss: t_gt = 2 but a_gt is absent");
    if (*a_gt < 0.0 || *a_gt > 1.0 || a_e < 0.0 || a_e > 1.0)
        throw std::invalid_argument("ratio_loss: ratios must be in [0,1]");
    return std::abs(*a_gt - a_e);
}

LossBreakdown total_loss(const SampleRecord& sample, const DetectorOutput& out,
                         const LossWeights& w, const AmSoftmaxParams& ams) {
    validate_sample_record(sample);
    LossBreakdown b;
    b.main = am_softmax_from_cos(out.main_logits, sample.binary_label, ams);
    b.region = region_loss(sample.m_gt, out.region_map);
    b.type = am_softmax_from_cos(out.type_logits, sample.t_gt, ams);
    b.ratio = ratio_loss(sample.a_gt, out.ratio, sample.t_gt);
    b.total = b.main + w.alpha * b.region + w.mu * b.type + w.gamma * b.ratio;
    return b;
}

NodeId am_softmax_loss_node(Tape& tape, NodeId cos, int label, const AmSoftmaxParams& p) {
    const Tensor& v = tape.value(cos);
    if (v.ndim() != 1) throw std::invalid_argument("am_softmax_loss_node: expected 1-d cosines");
    if (label < 0 || label >= v.shape[0])
        throw std::invalid_argument("am_softmax_loss_node: label out of range");
    Tensor margin_vec = Tensor::zeros(v.shape);
    margin_vec.data[label] = p.margin;
    const NodeId adjusted = tape.scale(tape.sub(cos, tape.constant(std::move(margin_vec))), p.scale);
    return tape.sub(tape.logsumexp(adjusted), tape.pick(adjusted, label));
}

NodeId region_loss_node(Tape& tape, NodeId region_map, const Mask& m_gt) {
    const Tensor& v = tape.value(region_map);
    Tensor target = nn::mask_to_tensor(m_gt);
    if (v.ndim() == 3 && v.shape[0] == 1) target.shape = {1, target.shape[0], target.shape[1]};
    if (!target.same_shape(v))
        throw std::invalid_argument("region_loss_node: target " + target.shape_str() +
                                    " vs head " + v.shape_str());
    return tape.mean(tape.abs(tape.sub(region_map, tape.constant(std::move(target)))));
}

NodeId ratio_loss_node(Tape& tape, NodeId ratio, double a_gt) {
    return tape.abs(tape.sub(ratio, tape.constant(Tensor::scalar(a_gt))));
}

LossNodes total_loss_nodes(Tape& tape, const DetectorNet::Nodes& out, const SampleRecord& sample,
                           const LossWeights& w, const AmSoftmaxParams& ams) {
    validate_sample_record(sample);
    LossNodes n;
    n.main = am_softmax_loss_node(tape, out.main_cos, sample.binary_label, ams);
    n.region = region_loss_node(tape, out.region_map, sample.m_gt);
    n.type = am_softmax_loss_node(tape, out.type_cos, sample.t_gt, ams);
    NodeId total = tape.add(n.main, tape.scale(n.region, w.alpha));
    total = tape.add(total, tape.scale(n.type, w.mu));
    if (sample.t_gt == 2) {
        n.ratio = ratio_loss_node(tape, out.ratio, *sample.a_gt);
        total = tape.add(total, tape.scale(n.ratio, w.gamma));
    }
    n.total = total;
    return n;
}

}  // namespace advforge
