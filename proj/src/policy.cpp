#include "advforge/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace advforge {

using nn::NodeId;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;

void ConfigDistribution::validate() const {
    if (p_region.size() != kNumRegions || p_type.size() != kNumBlendTypes)
        throw std::invalid_argument("ConfigDistribution: wrong simplex sizes");
    if (std::abs(p_region.sum() - 1.0) > 1e-9 || std::abs(p_type.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("ConfigDistribution: simplexes must sum to 1");
    if (p_region.minCoeff() < 0.0 || p_type.minCoeff() < 0.0)
        throw std::invalid_argument("ConfigDistribution: negative probability");
    if (!(a_mean >= 0.0 && a_mean <= 1.0)) throw std::invalid_argument("ConfigDistribution: a_mean outside [0,1]");
    if (!(a_spread > 0.0)) throw std::invalid_argument("ConfigDistribution: a_spread must be positive");
}

void PolicyNet::init_params(ParamStore& store, Rng& rng) const {
    int in_ch = 6;
    for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
        const int out_ch = cfg_.channels[i];
        const double stddev = std::sqrt(2.0 / (in_ch * 9.0));
        store.create("conv" + std::to_string(i) + ".w", Tensor::randn({out_ch, in_ch, 3, 3}, rng, stddev));
        store.create("conv" + std::to_string(i) + ".b", Tensor::zeros({out_ch}));
        in_ch = out_ch;
    }
    const int feat = in_ch;
    const double head_std = 1.0 / std::sqrt(static_cast<double>(feat));
    store.create("region.w", Tensor::randn({kNumRegions, feat}, rng, head_std));
    store.create("region.b", Tensor::zeros({kNumRegions}));
    store.create("type.w", Tensor::randn({kNumBlendTypes, feat}, rng, head_std));
    store.create("type.b", Tensor::zeros({kNumBlendTypes}));
    store.create("ratio.w", Tensor::randn({2, feat}, rng, head_std));
    store.create("ratio.b", Tensor::zeros({2}));
}

PolicyNet::Nodes PolicyNet::forward(Tape& tape, ParamStore& store, const Tensor& input6) const {
    if (input6.ndim() != 3 || input6.shape[0] != 6)
        throw std::invalid_argument("PolicyNet::forward: expected [6,H,W] input, got " +
                                    input6.shape_str());
    NodeId x = tape.constant(input6);
    for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
        const std::string p = "conv" + std::to_string(i);
        x = tape.conv2d(x, tape.param(store, p + ".w"), tape.param(store, p + ".b"), 2, 1);
        x = tape.leaky_relu(x, cfg_.leaky_slope);
    }
    const NodeId feat = tape.global_avg_pool(x);
    Nodes out;
    out.region_logits = tape.dense(feat, tape.param(store, "region.w"), tape.param(store, "region.b"));
    out.type_logits = tape.dense(feat, tape.param(store, "type.w"), tape.param(store, "type.b"));
    const NodeId ratio_raw = tape.dense(feat, tape.param(store, "ratio.w"), tape.param(store, "ratio.b"));
    out.a_mean = tape.sigmoid(tape.pick(ratio_raw, 0));
    out.a_spread = tape.add_scalar(tape.softplus(tape.pick(ratio_raw, 1)), cfg_.spread_floor);
    return out;
}

ConfigDistribution PolicyNet::forward_dist(ParamStore& store, const Image& ip, const Image& if_) const {
    require_same_shape(ip, if_, "PolicyNet::forward_dist");
    Tape tape;
    const Nodes heads = forward(tape, store, nn::images_to_chw(ip, if_));
    const NodeId pr = tape.softmax(heads.region_logits);
    const NodeId pt = tape.softmax(heads.type_logits);
    ConfigDistribution dist;
    dist.p_region = Eigen::Map<const Eigen::VectorXd>(tape.value(pr).data.data(), kNumRegions);
    dist.p_type = Eigen::Map<const Eigen::VectorXd>(tape.value(pt).data.data(), kNumBlendTypes);
    dist.a_mean = tape.value(heads.a_mean).data[0];
    dist.a_spread = tape.value(heads.a_spread).data[0];
    dist.validate();
    return dist;
}

double truncnorm_logpdf(double x, double mean, double spread) {
    if (!(spread > 0.0)) throw std::invalid_argument("truncnorm_logpdf: spread must be positive");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("truncnorm_logpdf: x outside [0,1]");
    const double z = (x - mean) / spread;
    const double mass = normal_cdf((1.0 - mean) / spread) - normal_cdf((0.0 - mean) / spread);
    return -0.5 * z * z - 0.5 * std::log(2.0 * 3.14159265358979323846) - std::log(spread) -
           std::log(mass);
}

double truncnorm_sample(Rng& rng, double mean, double spread) {
    if (!(spread > 0.0)) throw std::invalid_argument("truncnorm_sample: spread must be positive");
    const double lo = normal_cdf((0.0 - mean) / spread);
    const double hi = normal_cdf((1.0 - mean) / spread);
    double u;
    do { u = rng.uniform01(); } while (u <= 0.0);
    const double p = lo + u * (hi - lo);
    const double x = mean + spread * normal_quantile(std::clamp(p, 1e-300, 1.0 - 1e-16));
    return std::clamp(x, 0.0, 1.0);
}

static int sample_categorical(const Eigen::VectorXd& p, Rng& rng) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        cum += p[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;  // guard against fp undershoot
}

ForgeryConfig sample_config(const ConfigDistribution& dist, Rng& rng) {
    dist.validate();
    ForgeryConfig cfg;
    cfg.region = sample_categorical(dist.p_region, rng);
    cfg.blend = static_cast<BlendType>(sample_categorical(dist.p_type, rng));
    cfg.logp_region = std::log(dist.p_region[cfg.region]);
    cfg.logp_type = std::log(dist.p_type[static_cast<int>(cfg.blend)]);
    if (cfg.blend == BlendType::Mixup) {
        cfg.ratio = truncnorm_sample(rng, dist.a_mean, dist.a_spread);
        cfg.logp_ratio = truncnorm_logpdf(cfg.ratio, dist.a_mean, dist.a_spread);
    } else {
        cfg.ratio = 0.0;
        cfg.logp_ratio = 0.0;
    }
    return cfg;
}

double logprob_sum(const ForgeryConfig& cfg) {
    double s = cfg.logp_region + cfg.logp_type;
    if (cfg.blend == BlendType::Mixup) s += cfg.logp_ratio;
    return s;
}

/// Tape expression of the truncated-Gaussian log-density at fixed x through
/// (a_mean, a_spread) nodes.
static NodeId truncnorm_logpdf_node(Tape& tape, double x, NodeId a_mean, NodeId a_spread) {
    const NodeId cx = tape.constant(Tensor::scalar(x));
    const NodeId one = tape.constant(Tensor::scalar(1.0));
    const NodeId z = tape.div(tape.sub(cx, a_mean), a_spread);
    const NodeId zu = tape.div(tape.sub(one, a_mean), a_spread);    // (1 - mean)/spread
    const NodeId zl = tape.div(tape.neg(a_mean), a_spread);        // (0 - mean)/spread
    const NodeId mass = tape.sub(tape.normal_cdf(zu), tape.normal_cdf(zl));
    NodeId lp = tape.scale(tape.square(z), -0.5);
    lp = tape.add_scalar(lp, -0.5 * std::log(2.0 * 3.14159265358979323846));
    lp = tape.sub(lp, tape.log(a_spread));
    lp = tape.sub(lp, tape.log(mass));
    return lp;
}

NodeId logprob_node(Tape& tape, const PolicyNet::Nodes& heads, const ForgeryConfig& cfg,
                    bool include_ratio) {
    NodeId lp = tape.add(tape.pick(tape.log_softmax(heads.region_logits), cfg.region),
                         tape.pick(tape.log_softmax(heads.type_logits), static_cast<int>(cfg.blend)));
    if (include_ratio && cfg.blend == BlendType::Mixup)
        lp = tape.add(lp, truncnorm_logpdf_node(tape, cfg.ratio, heads.a_mean, heads.a_spread));
    return lp;
}

NodeId logprob_node_grid(Tape& tape, const PolicyNet::Nodes& heads, const ForgeryConfig& cfg,
                         const std::vector<double>& grid, int grid_index) {
    NodeId lp = tape.add(tape.pick(tape.log_softmax(heads.region_logits), cfg.region),
                         tape.pick(tape.log_softmax(heads.type_logits), static_cast<int>(cfg.blend)));
    if (cfg.blend == BlendType::Mixup) {
        if (grid_index < 0 || grid_index >= static_cast<int>(grid.size()))
            throw std::invalid_argument("logprob_node_grid: grid index out of range");
        // log w_i = logpdf(a_i) - logsumexp_j logpdf(a_j); the truncation
        // normalizer cancels, so the unnormalized Gaussian terms suffice.
        std::vector<NodeId> lps;
        lps.reserve(grid.size());
        for (double a : grid) {
            const NodeId z = tape.div(tape.sub(tape.constant(Tensor::scalar(a)), heads.a_mean),
                                      heads.a_spread);
            lps.push_back(tape.scale(tape.square(z), -0.5));
        }
        const NodeId vec = tape.stack(lps);
        const NodeId logw = tape.sub(lps[static_cast<std::size_t>(grid_index)], tape.logsumexp(vec));
        lp = tape.add(lp, logw);
    }
    return lp;
}

Eigen::VectorXd ratio_grid_weights(const std::vector<double>& grid, double mean, double spread) {
    if (grid.empty()) throw std::invalid_argument("ratio_grid_weights: empty grid");
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = (grid[i] - mean) / spread;
        w[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * z * z);
    }
    const double s = w.sum();
    if (!(s > 0.0)) throw std::runtime_error("ratio_grid_weights: underflowed weights");
    return w / s;
}

}  // namespace advforge
