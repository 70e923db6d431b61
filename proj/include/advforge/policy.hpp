#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "advforge/image.hpp"
#include "advforge/rng.hpp"
#include "advforge/synth.hpp"
#include "advforge/tape.hpp"

namespace advforge {

/// Head outputs of the synthesizer network, as plain distributions.
struct ConfigDistribution {
    Eigen::VectorXd p_region;  // 10-simplex
    Eigen::VectorXd p_type;    // 4-simplex
    double a_mean = 0.5;       // truncated-Gaussian location for the mixup ratio
    double a_spread = 1.0;     // > 0

    void validate() const;
};

struct PolicyConfig {
    std::vector<int> channels = {8, 16, 32};  // conv widths, stride 2 each
    double leaky_slope = 0.1;
    double spread_floor = 1e-3;  // added to softplus so a_spread stays positive
};

/// G(., theta): consumes the 6-channel (pristine, reference) stack and emits
/// p(R_g), p(T_g) and the ratio head (mean, spread).
class PolicyNet {
public:
    explicit PolicyNet(PolicyConfig cfg = {}) : cfg_(std::move(cfg)) {}

    void init_params(nn::ParamStore& store, Rng& rng) const;

    struct Nodes {
        nn::NodeId region_logits;  // [10]
        nn::NodeId type_logits;    // [4]
        nn::NodeId a_mean;         // scalar in [0,1]
        nn::NodeId a_spread;       // scalar > 0
    };
    Nodes forward(nn::Tape& tape, nn::ParamStore& store, const nn::Tensor& input6) const;

    /// Values-only forward on a scratch tape.
    ConfigDistribution forward_dist(nn::ParamStore& store, const Image& ip, const Image& if_) const;

    const PolicyConfig& config() const { return cfg_; }

private:
    PolicyConfig cfg_;
};

/// Truncated Gaussian on [0,1].
double truncnorm_logpdf(double x, double mean, double spread);
double truncnorm_sample(Rng& rng, double mean, double spread);

/// Draw indices from the two categoricals and the ratio from the truncated
/// Gaussian; records the log-probabilities (logp_ratio = 0 unless mixup).
ForgeryConfig sample_config(const ConfigDistribution& dist, Rng& rng);

/// logp_region + logp_type, plus logp_ratio when the blend is mixup.
double logprob_sum(const ForgeryConfig& cfg);

/// Tape node for log p(cfg | theta): log-softmax picks for region/type plus,
/// when requested, the truncated-Gaussian ratio log-density through the ratio
/// head. This is the score function the REINFORCE update differentiates.
nn::NodeId logprob_node(nn::Tape& tape, const PolicyNet::Nodes& heads, const ForgeryConfig& cfg,
                        bool include_ratio);

/// Grid-mode variant: the ratio is one of `grid`'s points, sampled with
/// truncated-Gaussian weights; its log-probability is the normalized grid
/// weight. Exactly matches the enumeration oracle's measure.
nn::NodeId logprob_node_grid(nn::Tape& tape, const PolicyNet::Nodes& heads, const ForgeryConfig& cfg,
                             const std::vector<double>& grid, int grid_index);

/// Normalized truncated-Gaussian weights over the grid (values-only path).
Eigen::VectorXd ratio_grid_weights(const std::vector<double>& grid, double mean, double spread);

}  // namespace advforge
