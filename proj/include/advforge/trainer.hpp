#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advforge/adam.hpp"
#include "advforge/detector.hpp"
#include "advforge/losses.hpp"
#include "advforge/manifest.hpp"
#include "advforge/policy.hpp"
#include "advforge/sample.hpp"
#include "advforge/synth.hpp"

namespace advforge {

enum class PolicyMode { Adversarial, Random };

struct TrainConfig {
    int batch_size = 32;
    double lr_detector = 2e-4;
    double lr_policy = 5e-5;
    LossWeights weights;
    AmSoftmaxParams ams;
    int steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> ratio_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};  // oracle only
    PolicyMode policy_mode = PolicyMode::Adversarial;
    bool ratio_score = true;     // include ratio log-density in the score for mixup samples
    bool baseline = false;       // moving-average baseline on L_b (variance reduction)
    bool lb_synth_only = false;  // restrict L_b to synthesized samples
    int checkpoint_every = 500;
    SynthesisOptions synth;
    PolicyConfig policy;
    DetectorConfig detector;
};

/// Dataset loaded into memory for training/eval.
struct TrainingItem {
    Image image;
    LandmarkSet landmarks;
    Category category = Category::Pristine;
    std::optional<Mask> gt_mask;
};

struct TrainingSet {
    std::vector<TrainingItem> items;
    std::vector<std::size_t> pristine_idx;
    std::vector<std::size_t> forgery_idx;

    static TrainingSet load(const DatasetManifest& manifest);
    Eigen::Index image_size() const;  // H (== W) of the first item
};

/// One batch slot: the record the detector consumes plus, for policy-driven
/// samples, everything needed to rebuild the score term.
struct PlanItem {
    SampleRecord resolved;
    bool has_config = false;  // true for pristine-sourced slots (incl. do-nothing)
    ForgeryConfig cfg;
    std::size_t pristine_index = 0;  // into set.items
    std::size_t reference_index = 0;
};

struct BatchPlan {
    std::vector<PlanItem> items;
    int n_synthesized = 0;
};

/// Derived labels for one synthesized sample.
SampleRecord make_synthesized_record(Image image, const Mask& md, const ForgeryConfig& cfg);
SampleRecord make_pristine_record(Image image);
SampleRecord make_dataset_forgery_record(Image image, const Mask& gt_mask);

/// Assemble a batch: draw records uniformly with replacement; pristines get a
/// reference drawn from the dataset's forgeries and a policy (or random)
/// config, then are synthesized unless the config is do-nothing.
BatchPlan build_batch(const TrainingSet& set, const PolicyNet& policy, nn::ParamStore& theta,
                      Rng& rng, const TrainConfig& cfg);

/// Mean-loss gradient descent on the detector parameters (theta untouched).
/// Returns the batch-mean loss breakdown at the pre-update weights.
LossBreakdown detector_step(const BatchPlan& plan, const DetectorNet& detector, nn::ParamStore& w,
                            nn::AdamState& opt, const TrainConfig& cfg);

/// Batch-mean total loss of the plan under the current weights (forward only).
double batch_loss(const BatchPlan& plan, const TrainingSet& set, const DetectorNet& detector,
                  nn::ParamStore& w, const TrainConfig& cfg);

/// REINFORCE ascent: accumulate multiplier/M * grad log p(cfg_m) over the
/// policy-sampled configs (M = pristine-sourced slots, do-nothing included)
/// and take one Adam ascent step on theta. Returns false (no update) when the
/// batch carries no policy-sampled configs. `multiplier` is L_b, optionally
/// baseline-subtracted.
bool policy_step(const BatchPlan& plan, const TrainingSet& set, const PolicyNet& policy,
                 nn::ParamStore& theta, nn::AdamState& opt, double multiplier,
                 const TrainConfig& cfg);

/// Exact enumeration of E[L] over the 10x4 config cells for one frozen image
/// pair, with the mixup cell integrated over `ratio_grid` under
/// truncated-Gaussian weights. Synthesis randomness is pinned per cell via
/// mix(base_seed, r, t) so the value is deterministic given (theta, w).
double exact_expected_loss(const PolicyNet& policy, nn::ParamStore& theta,
                           const DetectorNet& detector, nn::ParamStore& w, const Image& ip,
                           const LandmarkSet& lm_p, const Image& if_, const LandmarkSetT<double>& lm_f,
                           const TrainConfig& cfg, std::uint64_t base_seed);

/// One Monte Carlo draw of the score-function gradient L * grad_theta log p
/// on the same discrete measure as exact_expected_loss (ratio drawn from the
/// grid). Gradient is returned flattened in parameter-name order.
struct ScoreSample {
    Eigen::VectorXd grad;
    double loss = 0;
};
ScoreSample sample_score_gradient(const PolicyNet& policy, nn::ParamStore& theta,
                                  const DetectorNet& detector, nn::ParamStore& w, const Image& ip,
                                  const LandmarkSet& lm_p, const Image& if_, const LandmarkSet& lm_f,
                                  const TrainConfig& cfg, std::uint64_t base_seed, Rng& rng);

/// Flatten all gradients of the store in name order.
Eigen::VectorXd flatten_grads(const nn::ParamStore& store);

struct TrainResult {
    std::string detector_checkpoint;
    std::string policy_checkpoint;
    std::string metrics_csv;
    std::string manifest_json;
};

/// The full adversarial alternation; writes checkpoints, the per-step loss
/// CSV, and a manifest of the run into out_dir.
TrainResult train(const TrainingSet& set, const TrainConfig& cfg, const std::string& out_dir,
                  const std::string& dataset_hash = "");

}  // namespace advforge
