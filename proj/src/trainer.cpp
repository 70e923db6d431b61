#include "advforge/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "advforge/mask_ops.hpp"

namespace advforge {

namespace fs = std::filesystem;
using nn::AdamState;
using nn::NodeId;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;

TrainingSet TrainingSet::load(const DatasetManifest& manifest) {
    TrainingSet set;
    set.items.reserve(manifest.records.size());
    for (const auto& rec : manifest.records) {
        LoadedSample s = load_sample(manifest, rec);
        TrainingItem item;
        item.image = std::move(s.image);
        item.landmarks = s.landmarks;
        item.category = s.category;
        item.gt_mask = std::move(s.gt_mask);
        if (item.category == Category::Pristine) set.pristine_idx.push_back(set.items.size());
        else set.forgery_idx.push_back(set.items.size());
        set.items.push_back(std::move(item));
    }
    return set;
}

Eigen::Index TrainingSet::image_size() const {
    if (items.empty()) throw std::runtime_error("TrainingSet: empty dataset");
    return items.front().image.rows();
}

SampleRecord make_pristine_record(Image image) {
    SampleRecord r;
    r.m_gt = Mask::Zero(image.rows() / 16, image.cols() / 16);
    r.image = std::move(image);
    r.category = Category::Pristine;
    r.t_gt = kTypePristine;
    r.binary_label = 0;
    return r;
}

SampleRecord make_synthesized_record(Image image, const Mask& md, const ForgeryConfig& cfg) {
    SampleRecord r;
    r.image = std::move(image);
    r.category = Category::Synthesized;
    r.m_gt = downsample_16(md);
    r.t_gt = static_cast<int>(cfg.blend);
    if (cfg.blend == BlendType::Mixup) r.a_gt = cfg.ratio;
    r.binary_label = 1;
    return r;
}

SampleRecord make_dataset_forgery_record(Image image, const Mask& gt_mask) {
    SampleRecord r;
    // stored masks are soft (the deformed final mask); threshold then pool
    Mask hard = (gt_mask >= 0.5).cast<double>();
    r.m_gt = downsample_16(hard);
    r.image = std::move(image);
    r.category = Category::DatasetForgery;
    r.t_gt = kTypeDatasetForgery;
    r.binary_label = 1;
    return r;
}

static ForgeryConfig random_config(Rng& rng) {
    ForgeryConfig cfg;
    cfg.region = rng.uniform_int(kNumRegions);
    cfg.blend = static_cast<BlendType>(rng.uniform_int(kNumBlendTypes));
    if (cfg.blend == BlendType::Mixup) cfg.ratio = rng.uniform01();
    return cfg;
}

BatchPlan build_batch(const TrainingSet& set, const PolicyNet& policy, ParamStore& theta, Rng& rng,
                      const TrainConfig& cfg) {
    if (set.items.empty()) throw std::invalid_argument("build_batch: empty dataset");
    if (set.forgery_idx.empty())
        throw std::invalid_argument("build_batch: no forgeries available as references");
    BatchPlan plan;
    plan.items.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int n = 0; n < cfg.batch_size; ++n) {
        const std::size_t idx =
            static_cast<std::size_t>(rng.uniform_int(static_cast<int>(set.items.size())));
        const TrainingItem& src = set.items[idx];
        PlanItem item;
        if (src.category == Category::DatasetForgery) {
            if (!src.gt_mask) throw std::runtime_error("build_batch: dataset forgery lacks gt mask");
            item.resolved = make_dataset_forgery_record(src.image, *src.gt_mask);
        } else {
            const std::size_t ref_idx = set.forgery_idx[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(set.forgery_idx.size())))];
            const TrainingItem& ref = set.items[ref_idx];
            item.has_config = true;
            item.pristine_index = idx;
            item.reference_index = ref_idx;
            if (cfg.policy_mode == PolicyMode::Adversarial) {
                const ConfigDistribution dist = policy.forward_dist(theta, src.image, ref.image);
                item.cfg = sample_config(dist, rng);
            } else {
                item.cfg = random_config(rng);
            }
            if (item.cfg.blend == BlendType::DoNothing) {
                item.resolved = make_pristine_record(src.image);
            } else {
                Rng synth_rng(mix_seed(cfg.seed, 0x155u, rng.next_u64()));
                auto synth = synthesize(src.image, src.landmarks, ref.image, ref.landmarks, item.cfg,
                                        synth_rng, cfg.synth);
                item.resolved = make_synthesized_record(std::move(synth.image), synth.mask, item.cfg);
                plan.n_synthesized += 1;
            }
        }
        validate_sample_record(item.resolved);
        plan.items.push_back(std::move(item));
    }
    return plan;
}

LossBreakdown detector_step(const BatchPlan& plan, const DetectorNet& detector, ParamStore& w,
                            AdamState& opt, const TrainConfig& cfg) {
    if (plan.items.empty()) throw std::invalid_argument("detector_step: empty plan");
    Tape tape;
    LossBreakdown mean;
    std::vector<NodeId> totals;
    totals.reserve(plan.items.size());
    for (const PlanItem& item : plan.items) {
        const auto nodes = detector.forward(tape, w, nn::image_to_chw(item.resolved.image));
        const LossNodes ln = total_loss_nodes(tape, nodes, item.resolved, cfg.weights, cfg.ams);
        totals.push_back(ln.total);
        mean.main += tape.value(ln.main).data[0];
        mean.region += tape.value(ln.region).data[0];
        mean.type += tape.value(ln.type).data[0];
        if (ln.ratio >= 0) mean.ratio += tape.value(ln.ratio).data[0];
        mean.total += tape.value(ln.total).data[0];
    }
    const double inv = 1.0 / static_cast<double>(plan.items.size());
    mean.main *= inv;
    mean.region *= inv;
    mean.type *= inv;
    mean.ratio *= inv;
    mean.total *= inv;

    NodeId sum = totals[0];
    for (std::size_t i = 1; i < totals.size(); ++i) sum = tape.add(sum, totals[i]);
    const NodeId batch_mean = tape.scale(sum, inv);
    tape.backward(batch_mean, w);  // zeroes w grads first; theta is not on this tape
    adam_step(w, opt, -1);
    return mean;
}

double batch_loss(const BatchPlan& plan, const TrainingSet& /*set*/, const DetectorNet& detector,
                  ParamStore& w, const TrainConfig& cfg) {
    double acc = 0;
    int count = 0;
    for (const PlanItem& item : plan.items) {
        if (cfg.lb_synth_only && item.resolved.category != Category::Synthesized) continue;
        const DetectorOutput out = detector.forward_output(w, item.resolved.image);
        acc += total_loss(item.resolved, out, cfg.weights, cfg.ams).total;
        count += 1;
    }
    if (count == 0) return 0.0;
    return acc / static_cast<double>(count);
}

bool policy_step(const BatchPlan& plan, const TrainingSet& set, const PolicyNet& policy,
                 ParamStore& theta, AdamState& opt, double multiplier, const TrainConfig& cfg) {
    // Every policy-sampled config enters the score sum, do-nothing included.
    // Restricting it to synthesized samples adds a systematic -grad p(none)
    // term to the expected update (the conditioned score no longer has zero
    // mean), which drives p(do-nothing) to zero, starves the detector of
    // pristine samples, and collapses the game.
    std::vector<const PlanItem*> synth;
    for (const PlanItem& item : plan.items)
        if (item.has_config) synth.push_back(&item);
    if (synth.empty()) {
        std::cerr << "[policy_step] warning: no policy-sampled configs in batch, skipping update\n";
        return false;
    }
    theta.zero_grads();
    const double scale = multiplier / static_cast<double>(synth.size());
    for (const PlanItem* item : synth) {
        Tape tape;
        const auto heads =
            policy.forward(tape, theta,
                           nn::images_to_chw(set.items[item->pristine_index].image,
                                             set.items[item->reference_index].image));
        const NodeId lp = logprob_node(tape, heads, item->cfg, cfg.ratio_score);
        tape.backward(tape.scale(lp, scale));  // accumulates into theta's grads
    }
    adam_step(theta, opt, +1);
    return true;
}

// --- enumeration oracle -------------------------------------------------------

static double cell_loss(const DetectorNet& detector, ParamStore& w, const Image& ip,
                        const LandmarkSet& lm_p, const Image& if_, const LandmarkSet& lm_f, int region,
                        BlendType blend, double ratio, const TrainConfig& cfg, std::uint64_t seed) {
    SampleRecord record;
    if (blend == BlendType::DoNothing) {
        record = make_pristine_record(ip);
    } else {
        ForgeryConfig fc;
        fc.region = region;
        fc.blend = blend;
        fc.ratio = ratio;
        Rng rng(seed);
        auto synth = synthesize(ip, lm_p, if_, lm_f, fc, rng, cfg.synth);
        record = make_synthesized_record(std::move(synth.image), synth.mask, fc);
    }
    const DetectorOutput out = detector.forward_output(w, record.image);
    return total_loss(record, out, cfg.weights, cfg.ams).total;
}

double exact_expected_loss(const PolicyNet& policy, ParamStore& theta, const DetectorNet& detector,
                           ParamStore& w, const Image& ip, const LandmarkSet& lm_p, const Image& if_,
                           const LandmarkSetT<double>& lm_f, const TrainConfig& cfg,
                           std::uint64_t base_seed) {
    if (cfg.ratio_grid.empty()) throw std::invalid_argument("exact_expected_loss: empty ratio grid");
    const ConfigDistribution dist = policy.forward_dist(theta, ip, if_);
    const Eigen::VectorXd gw = ratio_grid_weights(cfg.ratio_grid, dist.a_mean, dist.a_spread);
    double expected = 0;
    for (int r = 0; r < kNumRegions; ++r) {
        for (int t = 0; t < kNumBlendTypes; ++t) {
            const BlendType blend = static_cast<BlendType>(t);
            const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(r) + 1,
                                                static_cast<std::uint64_t>(t) + 1);
            double cell;
            if (blend == BlendType::Mixup) {
                cell = 0;
                for (std::size_t i = 0; i < cfg.ratio_grid.size(); ++i)
                    cell += gw[static_cast<Eigen::Index>(i)] *
                            cell_loss(detector, w, ip, lm_p, if_, lm_f, r, blend, cfg.ratio_grid[i],
                                      cfg, seed);
            } else {
                cell = cell_loss(detector, w, ip, lm_p, if_, lm_f, r, blend, 0.0, cfg, seed);
            }
            expected += dist.p_region[r] * dist.p_type[t] * cell;
        }
    }
    return expected;
}

Eigen::VectorXd flatten_grads(const ParamStore& store) {
    Eigen::Index total = 0;
    for (const auto& name : store.names()) total += store.value(name).numel();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& name : store.names()) {
        const Tensor& g = store.grad(name);
        out.segment(at, g.numel()) = g.data.matrix();
        at += g.numel();
    }
    return out;
}

ScoreSample sample_score_gradient(const PolicyNet& policy, ParamStore& theta,
                                  const DetectorNet& detector, ParamStore& w, const Image& ip,
                                  const LandmarkSet& lm_p, const Image& if_, const LandmarkSet& lm_f,
                                  const TrainConfig& cfg, std::uint64_t base_seed, Rng& rng) {
    const ConfigDistribution dist = policy.forward_dist(theta, ip, if_);
    ForgeryConfig fc = sample_config(dist, rng);
    int grid_index = -1;
    if (fc.blend == BlendType::Mixup) {
        // redraw the ratio from the oracle's grid measure
        const Eigen::VectorXd gw = ratio_grid_weights(cfg.ratio_grid, dist.a_mean, dist.a_spread);
        const double u = rng.uniform01();
        double cum = 0;
        grid_index = static_cast<int>(cfg.ratio_grid.size()) - 1;
        for (Eigen::Index i = 0; i < gw.size(); ++i) {
            cum += gw[i];
            if (u < cum) {
                grid_index = static_cast<int>(i);
                break;
            }
        }
        fc.ratio = cfg.ratio_grid[static_cast<std::size_t>(grid_index)];
    }
    const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(fc.region) + 1,
                                        static_cast<std::uint64_t>(static_cast<int>(fc.blend)) + 1);
    ScoreSample out;
    out.loss = cell_loss(detector, w, ip, lm_p, if_, lm_f, fc.region, fc.blend, fc.ratio, cfg, seed);

    Tape tape;
    const auto heads = policy.forward(tape, theta, nn::images_to_chw(ip, if_));
    const NodeId lp = (fc.blend == BlendType::Mixup)
                          ? logprob_node_grid(tape, heads, fc, cfg.ratio_grid, grid_index)
                          : logprob_node(tape, heads, fc, /*include_ratio=*/false);
    tape.backward(tape.scale(lp, out.loss), theta);
    out.grad = flatten_grads(theta);
    return out;
}

// --- training loop --------------------------------------------------------------

static std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TrainResult train(const TrainingSet& set, const TrainConfig& cfg, const std::string& out_dir,
                  const std::string& dataset_hash) {
    if (cfg.batch_size <= 0 || cfg.lr_detector <= 0 || cfg.lr_policy <= 0 || cfg.steps < 0)
        throw std::invalid_argument("train: invalid config (batch_size/lrs/steps)");
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "checkpoints");

    const PolicyNet policy(cfg.policy);
    const DetectorNet detector(cfg.detector);
    ParamStore theta, w;
    Rng init_rng_theta(mix_seed(cfg.seed, 0x7115u));
    Rng init_rng_w(mix_seed(cfg.seed, 0xde7u));
    policy.init_params(theta, init_rng_theta);
    detector.init_params(w, init_rng_w);
    AdamState opt_theta(cfg.lr_policy), opt_w(cfg.lr_detector);

    TrainResult result;
    result.metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
    std::ofstream csv(result.metrics_csv, std::ios::binary);
    if (!csv) throw std::runtime_error("train: cannot open metrics csv");
    csv << "step,L_Main,L_R,L_T,L_A,total\n";

    double baseline_value = 0.0;
    bool baseline_init = false;

    for (int step = 1; step <= cfg.steps; ++step) {
        Rng rng(mix_seed(cfg.seed, 0xba7c4u, static_cast<std::uint64_t>(step)));
        BatchPlan plan = build_batch(set, policy, theta, rng, cfg);
        const LossBreakdown pre = detector_step(plan, detector, w, opt_w, cfg);
        csv << step << ',' << fmt_double(pre.main) << ',' << fmt_double(pre.region) << ','
            << fmt_double(pre.type) << ',' << fmt_double(pre.ratio) << ',' << fmt_double(pre.total)
            << "\n";
        if (!std::isfinite(pre.total)) {
            nlohmann::json diag;
            diag["step"] = step;
            diag["L_Main"] = pre.main;
            diag["L_R"] = pre.region;
            diag["L_T"] = pre.type;
            diag["L_A"] = pre.ratio;
            std::ofstream dump((fs::path(out_dir) / "nan_dump.json").string());
            dump << diag.dump(2) << "\n";
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                                     " (diagnostics in nan_dump.json)");
        }
        if (cfg.policy_mode == PolicyMode::Adversarial) {
            // Eq. 7 consumes the batch loss at the freshly updated detector.
            const double lb = batch_loss(plan, set, detector, w, cfg);
            double multiplier = lb;
            if (cfg.baseline) {
                if (baseline_init) multiplier = lb - baseline_value;
                baseline_value = baseline_init ? 0.9 * baseline_value + 0.1 * lb : lb;
                baseline_init = true;
            }
            policy_step(plan, set, policy, theta, opt_theta, multiplier, cfg);
        }
        if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && step != cfg.steps) {
            w.save((fs::path(out_dir) / "checkpoints" / ("detector_" + std::to_string(step) + ".json"))
                       .string());
            theta.save((fs::path(out_dir) / "checkpoints" / ("policy_" + std::to_string(step) + ".json"))
                           .string());
        }
        if (step % 100 == 0)
            std::cout << "[train] step " << step << "/" << cfg.steps << " loss " << pre.total << "\n";
    }

    result.detector_checkpoint = (fs::path(out_dir) / "detector.json").string();
    result.policy_checkpoint = (fs::path(out_dir) / "policy.json").string();
    w.save(result.detector_checkpoint);
    theta.save(result.policy_checkpoint);

    nlohmann::json manifest;
    manifest["seed"] = cfg.seed;
    manifest["steps"] = cfg.steps;
    manifest["batch_size"] = cfg.batch_size;
    manifest["lr_detector"] = cfg.lr_detector;
    manifest["lr_policy"] = cfg.lr_policy;
    manifest["alpha"] = cfg.weights.alpha;
    manifest["mu"] = cfg.weights.mu;
    manifest["gamma"] = cfg.weights.gamma;
    manifest["ams_margin"] = cfg.ams.margin;
    manifest["ams_scale"] = cfg.ams.scale;
    manifest["policy_mode"] = cfg.policy_mode == PolicyMode::Adversarial ? "adversarial" : "random";
    manifest["ratio_score"] = cfg.ratio_score;
    manifest["baseline"] = cfg.baseline;
    manifest["lb_synth_only"] = cfg.lb_synth_only;
    manifest["dataset_hash"] = dataset_hash;
    manifest["metrics_csv"] = "metrics.csv";
    manifest["detector_checkpoint"] = "detector.json";
    manifest["policy_checkpoint"] = "policy.json";
    result.manifest_json = (fs::path(out_dir) / "train_manifest.json").string();
    std::ofstream mf(result.manifest_json, std::ios::binary);
    mf << manifest.dump(2) << "\n";
    return result;
}

}  // namespace advforge
