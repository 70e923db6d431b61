#include "advforge/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "advforge/manifest.hpp"
#include "advforge/metrics.hpp"
#include "advforge/png_io.hpp"
#include "advforge/policy.hpp"
#include "advforge/toy_face.hpp"
#include "advforge/trainer.hpp"

namespace advforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split_csv(s)) out.push_back(std::stoi(tok));
    return out;
}

std::vector<BlendType> parse_blend_list(const std::string& s) {
    std::vector<BlendType> out;
    for (const auto& tok : split_csv(s)) out.push_back(blend_from_name(tok));
    return out;
}

/// Pre-scan for --config and load it; values act as defaults that explicit
/// flags override.
json load_config_json(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
        if (!path.empty()) {
            std::ifstream f(path);
            if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
            json j;
            try {
                f >> j;
            } catch (const json::exception& e) {
                throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
            }
            return j;
        }
    }
    return json::object();
}

template <class T>
void cfg_default(const json& cfg, const char* key, T& out) {
    if (cfg.contains(key)) out = cfg.at(key).get<T>();
}

struct SynthManifestLine {
    std::string pristine, reference, output, mask;
    ForgeryConfig cfg;
    std::uint64_t seed = 0;
    bool from_policy = false;
};

void write_synth_manifest(const std::string& path, const std::vector<SynthManifestLine>& lines) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    json header;
    header["format"] = "synthesis-manifest";
    header["version"] = 1;
    f << header.dump() << "\n";
    for (const auto& l : lines) {
        json j;
        j["pristine"] = l.pristine;
        j["reference"] = l.reference;
        j["output"] = l.output;
        j["mask"] = l.mask;
        j["region"] = l.cfg.region;
        j["blend"] = blend_name(l.cfg.blend);
        if (l.cfg.blend == BlendType::Mixup) j["ratio"] = l.cfg.ratio;
        else j["ratio"] = nullptr;
        if (l.from_policy) {
            j["logp_region"] = l.cfg.logp_region;
            j["logp_type"] = l.cfg.logp_type;
            j["logp_ratio"] = l.cfg.logp_ratio;
        } else {
            j["logp_region"] = nullptr;
            j["logp_type"] = nullptr;
            j["logp_ratio"] = nullptr;
        }
        j["seed"] = l.seed;
        f << j.dump() << "\n";
    }
}

int cmd_gen_toy(const json& cfg_json, int n_pristine, int n_forgery, std::uint64_t seed,
                const std::string& out, int size, const std::string& regions,
                const std::string& blends, double ratio_min, double ratio_max) {
    ToyDatasetOptions opt;
    opt.n_pristine = n_pristine;
    opt.n_forgery = n_forgery;
    opt.seed = seed;
    opt.size = size;
    if (!regions.empty()) opt.regions = parse_int_list(regions);
    if (!blends.empty()) opt.blends = parse_blend_list(blends);
    opt.ratio_min = ratio_min;
    opt.ratio_max = ratio_max;
    (void)cfg_json;
    const std::string manifest = generate_toy_dataset(out, opt);
    std::cout << "wrote " << manifest << " (" << opt.n_pristine << " pristine + " << opt.n_forgery
              << " forgery)\n";
    return 0;
}

int cmd_synth(const std::string& manifest_path, const std::string& out, std::uint64_t seed,
              const std::string& checkpoint, bool random_mode, int region_flag,
              const std::string& blend_flag, double ratio_flag, int count) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto pristines = manifest.pristine_indices();
    const auto forgeries = manifest.forgery_indices();
    if (pristines.empty()) throw std::runtime_error("synth: manifest has no pristine records");
    if (forgeries.empty()) throw std::runtime_error("synth: manifest has no forgery records to reference");

    const bool explicit_mode = region_flag >= 0 || !blend_flag.empty();
    const bool policy_mode = !checkpoint.empty();
    if (static_cast<int>(explicit_mode) + static_cast<int>(policy_mode) + static_cast<int>(random_mode) != 1)
        throw CLI::ValidationError(
            "synth", "choose exactly one of --checkpoint, --random, or --region/--blend");
    ForgeryConfig fixed;
    if (explicit_mode) {
        if (region_flag < 0 || blend_flag.empty())
            throw CLI::ValidationError("synth", "--region and --blend must be given together");
        fixed.region = region_flag;
        fixed.blend = blend_from_name(blend_flag);
        if (fixed.blend == BlendType::DoNothing)
            throw CLI::ValidationError("synth", "blend 'none' renders nothing");
        if (fixed.blend == BlendType::Mixup) {
            if (ratio_flag < 0.0 || ratio_flag > 1.0)
                throw CLI::ValidationError("synth", "--ratio must be in [0,1] for mixup");
            fixed.ratio = ratio_flag;
        }
        region_parts(fixed.region);  // range check
    }
    std::optional<nn::ParamStore> theta;
    PolicyNet policy;
    if (policy_mode) theta = nn::ParamStore::load(checkpoint);

    fs::create_directories(fs::path(out) / "images");
    fs::create_directories(fs::path(out) / "masks");
    const int total = count > 0 ? count : static_cast<int>(pristines.size());
    std::vector<SynthManifestLine> lines;
    SynthesisOptions synth_opt;
    for (int i = 0; i < total; ++i) {
        const auto& prec = manifest.records[pristines[static_cast<std::size_t>(i) % pristines.size()]];
        Rng rng(mix_seed(seed, 0x517f1u, static_cast<std::uint64_t>(i)));
        const auto& frec = manifest.records[forgeries[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(forgeries.size())))]];
        const LoadedSample ps = load_sample(manifest, prec);
        const LoadedSample fsmp = load_sample(manifest, frec);
        SynthManifestLine line;
        line.pristine = prec.image;
        line.reference = frec.image;
        line.seed = mix_seed(seed, 0x517f1u, static_cast<std::uint64_t>(i));
        line.from_policy = policy_mode;
        if (policy_mode) {
            const ConfigDistribution dist = policy.forward_dist(*theta, ps.image, fsmp.image);
            line.cfg = sample_config(dist, rng);
            if (line.cfg.blend == BlendType::DoNothing) {
                // render the most probable real blend instead; synth always outputs a forgery
                int best = 0;
                for (int b = 1; b < 3; ++b)
                    if (dist.p_type[b] > dist.p_type[best]) best = b;
                line.cfg.blend = static_cast<BlendType>(best);
                line.cfg.logp_type = std::log(dist.p_type[best]);
                if (line.cfg.blend == BlendType::Mixup) {
                    line.cfg.ratio = truncnorm_sample(rng, dist.a_mean, dist.a_spread);
                    line.cfg.logp_ratio = truncnorm_logpdf(line.cfg.ratio, dist.a_mean, dist.a_spread);
                }
            }
        } else if (random_mode) {
            line.cfg.region = rng.uniform_int(kNumRegions);
            line.cfg.blend = static_cast<BlendType>(rng.uniform_int(3));  // real blends only
            if (line.cfg.blend == BlendType::Mixup) line.cfg.ratio = rng.uniform01();
        } else {
            line.cfg = fixed;
        }
        Rng synth_rng(line.seed);
        const auto result = synthesize(ps.image, ps.landmarks, fsmp.image, fsmp.landmarks, line.cfg,
                                       synth_rng, synth_opt);
        char name[64];
        std::snprintf(name, sizeof(name), "synth_%05d", i);
        line.output = std::string("images/") + name + ".png";
        line.mask = std::string("masks/") + name + ".png";
        write_png_rgb((fs::path(out) / line.output).string(), result.image);
        write_png_gray((fs::path(out) / line.mask).string(), result.mask);
        lines.push_back(std::move(line));
    }
    write_synth_manifest((fs::path(out) / "synth_manifest.jsonl").string(), lines);
    std::cout << "wrote " << total << " forgeries under " << out << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& out, const TrainConfig& cfg) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const TrainingSet set = TrainingSet::load(manifest);
    const TrainResult result = train(set, cfg, out, manifest_content_hash(manifest_path));
    std::cout << "training done; detector checkpoint " << result.detector_checkpoint << "\n";
    return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& checkpoint,
             const std::string& out_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    nn::ParamStore w = nn::ParamStore::load(checkpoint);
    const DetectorNet detector;
    const EvalReport report = evaluate(manifest, detector, w);
    const std::string text = report.to_json();
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + out_path + "'");
        f << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

int cmd_inspect(const std::string& manifest_path, const std::string& checkpoint,
                const std::string& out_path, int limit) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    nn::ParamStore w = nn::ParamStore::load(checkpoint);
    const DetectorNet detector;
    json arr = json::array();
    int n = 0;
    for (const auto& rec : manifest.records) {
        if (limit > 0 && n >= limit) break;
        const LoadedSample s = load_sample(manifest, rec);
        const DetectorOutput out = detector.forward_output(w, s.image);
        json j;
        j["image"] = rec.image;
        j["category"] = category_name(rec.category);
        j["score"] = score_forgery(out);
        j["main_logits"] = {out.main_logits[0], out.main_logits[1]};
        std::vector<std::vector<double>> rm;
        for (Eigen::Index y = 0; y < out.region_map.rows(); ++y) {
            std::vector<double> row;
            for (Eigen::Index x = 0; x < out.region_map.cols(); ++x) row.push_back(out.region_map(y, x));
            rm.push_back(std::move(row));
        }
        j["region_map"] = rm;
        std::vector<double> tl(out.type_logits.data(), out.type_logits.data() + out.type_logits.size());
        j["type_logits"] = tl;
        j["ratio"] = out.ratio;
        arr.push_back(std::move(j));
        ++n;
    }
    const std::string text = arr.dump(2);
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + out_path + "'");
        f << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"adversarial forgery augmentation + configuration-aware detection, desk scale"};
    app.name("advforge");
    app.require_subcommand(1);

    json cfg_json;
    try {
        cfg_json = load_config_json(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    std::string config_path;  // consumed by every subcommand

    // gen-toy
    int gt_pristine = 50, gt_forgery = 50, gt_size = 64;
    std::uint64_t gt_seed = 0;
    std::string gt_out = "toy_dataset", gt_regions, gt_blends;
    double gt_ratio_min = 0.3, gt_ratio_max = 1.0;
    cfg_default(cfg_json, "n-pristine", gt_pristine);
    cfg_default(cfg_json, "n-forgery", gt_forgery);
    cfg_default(cfg_json, "size", gt_size);
    cfg_default(cfg_json, "seed", gt_seed);
    cfg_default(cfg_json, "out", gt_out);
    cfg_default(cfg_json, "regions", gt_regions);
    cfg_default(cfg_json, "blends", gt_blends);
    cfg_default(cfg_json, "ratio-min", gt_ratio_min);
    cfg_default(cfg_json, "ratio-max", gt_ratio_max);
    auto* gen = app.add_subcommand("gen-toy", "generate a procedural toy-face dataset");
    gen->add_option("--n-pristine", gt_pristine, "pristine face count");
    gen->add_option("--n-forgery", gt_forgery, "offline forgery count");
    gen->add_option("--seed", gt_seed, "RNG seed");
    gen->add_option("--out", gt_out, "output directory");
    gen->add_option("--size", gt_size, "image side (divisible by 16)");
    gen->add_option("--regions", gt_regions, "comma list of region indices for forgeries");
    gen->add_option("--blends", gt_blends, "comma list of blends for forgeries (alpha,poisson,mixup)");
    gen->add_option("--ratio-min", gt_ratio_min, "mixup ratio lower bound");
    gen->add_option("--ratio-max", gt_ratio_max, "mixup ratio upper bound");
    gen->add_option("--config", config_path, "JSON config file with flag defaults");
    gen->callback([&]() {
        cmd_gen_toy(cfg_json, gt_pristine, gt_forgery, gt_seed, gt_out, gt_size, gt_regions, gt_blends,
                    gt_ratio_min, gt_ratio_max);
    });

    // synth
    std::string sy_manifest, sy_out = "synth_out", sy_checkpoint, sy_blend;
    std::uint64_t sy_seed = 0;
    bool sy_random = false;
    int sy_region = -1, sy_count = 0;
    double sy_ratio = -1.0;
    cfg_default(cfg_json, "manifest", sy_manifest);
    cfg_default(cfg_json, "out", sy_out);
    cfg_default(cfg_json, "seed", sy_seed);
    auto* synth_cmd = app.add_subcommand("synth", "render forgeries from a manifest");
    synth_cmd->add_option("--manifest", sy_manifest, "dataset manifest (jsonl)")->required();
    synth_cmd->add_option("--out", sy_out, "output directory");
    synth_cmd->add_option("--seed", sy_seed, "RNG seed");
    synth_cmd->add_option("--checkpoint", sy_checkpoint, "policy checkpoint (adversarial configs)");
    synth_cmd->add_flag("--random", sy_random, "uniform random configs");
    synth_cmd->add_option("--region", sy_region, "fixed region index 0..9");
    synth_cmd->add_option("--blend", sy_blend, "fixed blend (alpha|poisson|mixup)");
    synth_cmd->add_option("--ratio", sy_ratio, "fixed mixup ratio in [0,1]");
    synth_cmd->add_option("--count", sy_count, "number of outputs (default: one per pristine)");
    synth_cmd->add_option("--config", config_path, "JSON config file with flag defaults");
    synth_cmd->callback([&]() {
        cmd_synth(sy_manifest, sy_out, sy_seed, sy_checkpoint, sy_random, sy_region, sy_blend, sy_ratio,
                  sy_count);
    });

    // train
    std::string tr_manifest, tr_out = "train_out", tr_mode = "adversarial";
    TrainConfig tr;
    cfg_default(cfg_json, "manifest", tr_manifest);
    cfg_default(cfg_json, "out", tr_out);
    cfg_default(cfg_json, "steps", tr.steps);
    cfg_default(cfg_json, "batch-size", tr.batch_size);
    cfg_default(cfg_json, "lr-detector", tr.lr_detector);
    cfg_default(cfg_json, "lr-policy", tr.lr_policy);
    cfg_default(cfg_json, "alpha", tr.weights.alpha);
    cfg_default(cfg_json, "mu", tr.weights.mu);
    cfg_default(cfg_json, "gamma", tr.weights.gamma);
    cfg_default(cfg_json, "seed", tr.seed);
    cfg_default(cfg_json, "policy-mode", tr_mode);
    cfg_default(cfg_json, "checkpoint-every", tr.checkpoint_every);
    auto* train_cmd = app.add_subcommand("train", "adversarial training loop");
    train_cmd->add_option("--manifest", tr_manifest, "dataset manifest (jsonl)")->required();
    train_cmd->add_option("--out", tr_out, "output directory");
    train_cmd->add_option("--steps", tr.steps, "training steps")->required();
    train_cmd->add_option("--batch-size", tr.batch_size, "batch size N");
    train_cmd->add_option("--lr-detector", tr.lr_detector, "detector learning rate");
    train_cmd->add_option("--lr-policy", tr.lr_policy, "synthesizer learning rate");
    train_cmd->add_option("--alpha", tr.weights.alpha, "region loss weight");
    train_cmd->add_option("--mu", tr.weights.mu, "type loss weight");
    train_cmd->add_option("--gamma", tr.weights.gamma, "ratio loss weight");
    train_cmd->add_option("--seed", tr.seed, "RNG seed");
    train_cmd->add_option("--policy-mode", tr_mode, "adversarial|random")
        ->check(CLI::IsMember({"adversarial", "random"}));
    train_cmd->add_flag("--baseline", tr.baseline, "subtract a moving-average baseline in the policy update");
    train_cmd->add_flag("--no-ratio-score", [&tr](std::int64_t) { tr.ratio_score = false; },
                        "exclude the ratio log-density from the score function");
    train_cmd->add_flag("--lb-synth-only", tr.lb_synth_only, "restrict L_b to synthesized samples");
    train_cmd->add_option("--checkpoint-every", tr.checkpoint_every, "periodic checkpoint interval");
    train_cmd->add_option("--config", config_path, "JSON config file with flag defaults");
    train_cmd->callback([&]() {
        tr.policy_mode = tr_mode == "random" ? PolicyMode::Random : PolicyMode::Adversarial;
        cmd_train(tr_manifest, tr_out, tr);
    });

    // eval
    std::string ev_manifest, ev_checkpoint, ev_out;
    std::uint64_t ev_seed = 0;
    cfg_default(cfg_json, "manifest", ev_manifest);
    cfg_default(cfg_json, "checkpoint", ev_checkpoint);
    cfg_default(cfg_json, "out", ev_out);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a detector checkpoint on a manifest");
    eval_cmd->add_option("--manifest", ev_manifest, "dataset manifest (jsonl)")->required();
    eval_cmd->add_option("--checkpoint", ev_checkpoint, "detector checkpoint")->required();
    eval_cmd->add_option("--out", ev_out, "write the JSON report here");
    eval_cmd->add_option("--seed", ev_seed, "accepted for uniformity (evaluation is deterministic)");
    eval_cmd->add_option("--config", config_path, "JSON config file with flag defaults");
    eval_cmd->callback([&]() { cmd_eval(ev_manifest, ev_checkpoint, ev_out); });

    // inspect
    std::string in_manifest, in_checkpoint, in_out;
    std::uint64_t in_seed = 0;
    int in_limit = 0;
    cfg_default(cfg_json, "manifest", in_manifest);
    cfg_default(cfg_json, "checkpoint", in_checkpoint);
    auto* inspect_cmd = app.add_subcommand("inspect", "dump per-sample head outputs as JSON");
    inspect_cmd->add_option("--manifest", in_manifest, "dataset manifest (jsonl)")->required();
    inspect_cmd->add_option("--checkpoint", in_checkpoint, "detector checkpoint")->required();
    inspect_cmd->add_option("--out", in_out, "write the JSON dump here");
    inspect_cmd->add_option("--limit", in_limit, "max records to dump (0 = all)");
    inspect_cmd->add_option("--seed", in_seed, "accepted for uniformity");
    inspect_cmd->add_option("--config", config_path, "JSON config file with flag defaults");
    inspect_cmd->callback([&]() { cmd_inspect(in_manifest, in_checkpoint, in_out, in_limit); });

    std::vector<std::string> argv_store;
    argv_store.push_back("advforge");
    for (const auto& a : args) argv_store.push_back(a);
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace advforge
