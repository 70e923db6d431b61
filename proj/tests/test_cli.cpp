#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "advforge/cli.hpp"
#include "advforge/detector.hpp"
#include "advforge/manifest.hpp"
#include "advforge/rng.hpp"
#include "test_support.hpp"

using namespace advforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// All regular files under root, keyed by relative path, as raw bytes.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            out[fs::relative(entry.path(), root).string()] = testutil::slurp(entry.path().string());
    return out;
}

int gen_small_dataset(const std::string& dir, const std::string& seed = "7") {
    return run_cli({"gen-toy", "--n-pristine", "8", "--n-forgery", "8", "--seed", seed, "--out", dir});
}

}  // namespace

TEST_CASE("cli: gen-toy writes the requested number of records") {
    testutil::TempDir dir("cli_gen");
    CHECK(run_cli({"gen-toy", "--n-pristine", "50", "--n-forgery", "50", "--seed", "7", "--out",
                   dir.str()}) == 0);
    const DatasetManifest m = load_manifest(dir.sub("manifest.jsonl"));
    CHECK(m.records.size() == 100);
    CHECK(m.pristine_indices().size() == 50);
    CHECK(m.forgery_indices().size() == 50);
}

TEST_CASE("cli: synth with an explicit config echoes it in the manifest") {
    testutil::TempDir data("cli_synth_data"), out("cli_synth_out");
    REQUIRE(gen_small_dataset(data.str()) == 0);
    CHECK(run_cli({"synth", "--manifest", data.sub("manifest.jsonl"), "--region", "7", "--blend",
                   "mixup", "--ratio", "0.5", "--seed", "3", "--out", out.str()}) == 0);
    std::ifstream f(out.sub("synth_manifest.jsonl"));
    std::string line;
    REQUIRE(std::getline(f, line));  // header
    int count = 0;
    while (std::getline(f, line)) {
        const json j = json::parse(line);
        CHECK(j.at("region").get<int>() == 7);
        CHECK(j.at("blend").get<std::string>() == "mixup");
        CHECK(j.at("ratio").get<double>() == 0.5);
        CHECK(fs::exists(fs::path(out.str()) / j.at("output").get<std::string>()));
        CHECK(fs::exists(fs::path(out.str()) / j.at("mask").get<std::string>()));
        ++count;
    }
    CHECK(count == 8);  // one per pristine
}

TEST_CASE("cli: synth random mode renders real blends only") {
    testutil::TempDir data("cli_synth_rand"), out("cli_synth_rand_out");
    REQUIRE(gen_small_dataset(data.str()) == 0);
    CHECK(run_cli({"synth", "--manifest", data.sub("manifest.jsonl"), "--random", "--seed", "11",
                   "--out", out.str(), "--count", "6"}) == 0);
    std::ifstream f(out.sub("synth_manifest.jsonl"));
    std::string line;
    std::getline(f, line);
    int count = 0;
    while (std::getline(f, line)) {
        const json j = json::parse(line);
        const std::string blend = j.at("blend").get<std::string>();
        CHECK(blend != "none");
        ++count;
    }
    CHECK(count == 6);
}

TEST_CASE("cli: eval on an untrained checkpoint exits 0 and emits valid JSON") {
    testutil::TempDir data("cli_eval_data"), out("cli_eval_out");
    REQUIRE(gen_small_dataset(data.str()) == 0);
    // untrained checkpoint straight from the initializer
    const DetectorNet net;
    nn::ParamStore w;
    Rng rng(5);
    net.init_params(w, rng);
    w.save(out.sub("detector.json"));
    CHECK(run_cli({"eval", "--manifest", data.sub("manifest.jsonl"), "--checkpoint",
                   out.sub("detector.json"), "--out", out.sub("report.json")}) == 0);
    const json report = json::parse(testutil::slurp(out.sub("report.json")));
    CHECK(report.contains("auc"));
    CHECK(report.contains("accuracy"));
    CHECK(report.at("n_pristine").get<int>() == 8);
    CHECK(report.at("n_forgery").get<int>() == 8);
}

TEST_CASE("cli: inspect dumps per-sample head outputs") {
    testutil::TempDir data("cli_inspect_data"), out("cli_inspect_out");
    REQUIRE(gen_small_dataset(data.str()) == 0);
    const DetectorNet net;
    nn::ParamStore w;
    Rng rng(6);
    net.init_params(w, rng);
    w.save(out.sub("detector.json"));
    CHECK(run_cli({"inspect", "--manifest", data.sub("manifest.jsonl"), "--checkpoint",
                   out.sub("detector.json"), "--out", out.sub("dump.json"), "--limit", "5"}) == 0);
    const json dump = json::parse(testutil::slurp(out.sub("dump.json")));
    REQUIRE(dump.is_array());
    CHECK(dump.size() == 5);
    for (const auto& j : dump) {
        CHECK(j.contains("score"));
        CHECK(j.at("main_logits").size() == 2);
        CHECK(j.at("type_logits").size() == 5);
        CHECK(j.at("region_map").size() == 4);
    }
}

TEST_CASE("cli: unknown flag exits 1 with usage; missing subcommand exits 1") {
    CHECK(run_cli({"gen-toy", "--definitely-not-a-flag", "3"}) == 1);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"no-such-command"}) == 1);
}

TEST_CASE("cli: --help exits 0") {
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"gen-toy", "--help"}) == 0);
}

TEST_CASE("cli: runtime failures exit 2") {
    CHECK(run_cli({"eval", "--manifest", "/nonexistent/m.jsonl", "--checkpoint", "/nonexistent/c.json"}) ==
          2);
}

TEST_CASE("cli: --config file supplies defaults that flags override") {
    testutil::TempDir dir("cli_cfg");
    std::ofstream(dir.sub("cfg.json")) << R"({"n-pristine": 3, "n-forgery": 4, "seed": 5})";
    CHECK(run_cli({"gen-toy", "--config", dir.sub("cfg.json"), "--out", dir.sub("ds"),
                   "--n-forgery", "2"}) == 0);
    const DatasetManifest m = load_manifest((fs::path(dir.sub("ds")) / "manifest.jsonl").string());
    CHECK(m.pristine_indices().size() == 3);  // from config
    CHECK(m.forgery_indices().size() == 2);   // flag wins
}

TEST_CASE("cli: gen-toy is byte-identical across reruns with the same seed") {
    testutil::TempDir d1("cli_det1"), d2("cli_det2");
    REQUIRE(gen_small_dataset(d1.str(), "42") == 0);
    REQUIRE(gen_small_dataset(d2.str(), "42") == 0);
    const auto t1 = snapshot_tree(d1.path());
    const auto t2 = snapshot_tree(d2.path());
    REQUIRE(t1.size() == t2.size());
    CHECK(t1 == t2);
}

TEST_CASE("cli: train runs a tiny loop and eval consumes its checkpoint") {
    testutil::TempDir data("cli_train_data"), out("cli_train_out");
    REQUIRE(gen_small_dataset(data.str()) == 0);
    CHECK(run_cli({"train", "--manifest", data.sub("manifest.jsonl"), "--out", out.str(), "--steps",
                   "2", "--batch-size", "4", "--seed", "9"}) == 0);
    CHECK(fs::exists(out.sub("detector.json")));
    CHECK(fs::exists(out.sub("policy.json")));
    CHECK(fs::exists(out.sub("metrics.csv")));
    CHECK(fs::exists(out.sub("train_manifest.json")));
    CHECK(run_cli({"eval", "--manifest", data.sub("manifest.jsonl"), "--checkpoint",
                   out.sub("detector.json")}) == 0);
    // csv has header + 2 rows
    std::ifstream csv(out.sub("metrics.csv"));
    std::string line;
    int rows = 0;
    std::getline(csv, line);
    CHECK(line == "step,L_Main,L_R,L_T,L_A,total");
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 2);
}
