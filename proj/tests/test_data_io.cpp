#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "advforge/manifest.hpp"
#include "advforge/png_io.hpp"
#include "advforge/toy_face.hpp"
#include "test_support.hpp"

using namespace advforge;

TEST_CASE("generate_toy_face: fixed seed is bit-identical") {
    Rng r1(7), r2(7);
    const ToyFace a = generate_toy_face(ToyFaceSpec::random(r1, 64, 64));
    const ToyFace b = generate_toy_face(ToyFaceSpec::random(r2, 64, 64));
    CHECK(max_abs_diff(a.image, b.image) == 0.0);
    CHECK((a.landmarks == b.landmarks));
}

TEST_CASE("generate_toy_face: feature escaping the canvas throws") {
    Rng rng(8);
    ToyFaceSpec spec = ToyFaceSpec::random(rng, 64, 64);
    spec.face_rx = 40.0;  // wider than the canvas allows
    CHECK_THROWS_AS(generate_toy_face(spec), std::invalid_argument);
}

TEST_CASE("generate_toy_face: eye landmarks lie inside the rendered eye ellipses") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const ToyFaceSpec spec = ToyFaceSpec::random(rng, 64, 64);
        const ToyFace face = generate_toy_face(spec);
        const double exl = spec.face_cx - spec.eye_dx, exr = spec.face_cx + spec.eye_dx;
        for (int i = 36; i <= 41; ++i) {
            const double nx = (face.landmarks(i, 0) - exl) / spec.eye_rx;
            const double ny = (face.landmarks(i, 1) - spec.eye_cy) / spec.eye_ry;
            CHECK(nx * nx + ny * ny <= 1.0);
        }
        for (int i = 42; i <= 47; ++i) {
            const double nx = (face.landmarks(i, 0) - exr) / spec.eye_rx;
            const double ny = (face.landmarks(i, 1) - spec.eye_cy) / spec.eye_ry;
            CHECK(nx * nx + ny * ny <= 1.0);
        }
    }
}

TEST_CASE("generate_toy_face: left-eye region mask overlaps the eye ellipse with IoU > 0.5") {
    Rng rng(10);
    int trials = 0;
    for (int t = 0; t < 100; ++t) {
        const ToyFaceSpec spec = ToyFaceSpec::random(rng, 64, 64);
        const ToyFace face = generate_toy_face(spec);
        const Mask mask = rasterize_region(face.landmarks, 0, 64, 64, 2.0).mask;
        const double exl = spec.face_cx - spec.eye_dx;
        int inter = 0, uni = 0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                const double nx = (x - exl) / spec.eye_rx;
                const double ny = (y - spec.eye_cy) / spec.eye_ry;
                const bool in_ellipse = nx * nx + ny * ny <= 1.0;
                const bool in_mask = mask(y, x) > 0.5;
                inter += in_ellipse && in_mask;
                uni += in_ellipse || in_mask;
            }
        REQUIRE(uni > 0);
        CHECK(static_cast<double>(inter) / uni > 0.5);
        ++trials;
    }
    CHECK(trials == 100);
}

TEST_CASE("png: image round-trip is exact for 8-bit-quantized data") {
    testutil::TempDir dir("png");
    const ToyFace face = testutil::toy_face(11);
    const Image q = quantize8(face.image);
    write_png_rgb(dir.sub("img.png"), q);
    const Image back = read_png_rgb(dir.sub("img.png"));
    CHECK(max_abs_diff(q, back) == 0.0);
}

TEST_CASE("png: mask round-trip is exact for 8-bit-quantized data") {
    testutil::TempDir dir("pngm");
    Rng rng(12);
    Mask m(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) m(y, x) = rng.uniform01();
    const Mask q = quantize8(m);
    write_png_gray(dir.sub("m.png"), q);
    CHECK(((read_png_gray(dir.sub("m.png")) - q).abs() == 0.0).all());
}

TEST_CASE("png: corrupt file reports a decode error naming the path") {
    testutil::TempDir dir("pngc");
    std::ofstream(dir.sub("junk.png"), std::ios::binary) << "this is not a png";
    CHECK_THROWS_WITH_AS(read_png_rgb(dir.sub("junk.png")), doctest::Contains("junk.png"),
                         std::runtime_error);
}

TEST_CASE("landmarks: text round-trip is exact") {
    testutil::TempDir dir("lm");
    const ToyFace face = testutil::toy_face(13);
    write_landmarks(dir.sub("lm.txt"), face.landmarks);
    const LandmarkSet back = read_landmarks(dir.sub("lm.txt"));
    CHECK((back == face.landmarks));
}

TEST_CASE("generate_toy_dataset: counts, nonempty masks, loadable records") {
    testutil::TempDir dir("ds");
    ToyDatasetOptions opt;
    opt.n_pristine = 6;
    opt.n_forgery = 5;
    opt.seed = 99;
    opt.size = 64;
    const std::string path = generate_toy_dataset(dir.str(), opt);
    const DatasetManifest manifest = load_manifest(path);
    CHECK(manifest.records.size() == 11);
    CHECK(manifest.pristine_indices().size() == 6);
    CHECK(manifest.forgery_indices().size() == 5);
    for (const auto& rec : manifest.records) {
        const LoadedSample s = load_sample(manifest, rec);
        CHECK(s.image.rows() == 64);
        if (rec.category == Category::DatasetForgery) {
            REQUIRE(s.gt_mask.has_value());
            CHECK(s.gt_mask->sum() > 0.0);  // every forgery mask nonempty
        }
    }
}

TEST_CASE("generate_toy_dataset: reloading reproduces the written arrays exactly") {
    testutil::TempDir dir("ds_rt");
    ToyDatasetOptions opt;
    opt.n_pristine = 2;
    opt.n_forgery = 2;
    opt.seed = 3;
    generate_toy_dataset(dir.str(), opt);
    // regenerate the first pristine independently and compare to the decode
    Rng rng(mix_seed(99, 0));  // silence unused warnings; real check below
    (void)rng;
    const DatasetManifest manifest = load_manifest(dir.sub("manifest.jsonl"));
    Rng face_rng(mix_seed(3, 0x70u, 0));
    const ToyFace expect = generate_toy_face(ToyFaceSpec::random(face_rng, 64, 64));
    const LoadedSample got = load_sample(manifest, manifest.records[0]);
    CHECK(max_abs_diff(quantize8(expect.image), got.image) == 0.0);
    CHECK((got.landmarks == expect.landmarks));
}

TEST_CASE("manifest: schema violations are named") {
    testutil::TempDir dir("schema");
    std::ofstream f(dir.sub("bad.jsonl"));
    f << R"({"format":"toyface-dataset","version":1})" << "\n";
    f << R"({"image":"a.png","landmarks":"a.txt","category":"pristine","gt_mask":"m.png"})" << "\n";
    f.close();
    CHECK_THROWS_WITH_AS(load_manifest(dir.sub("bad.jsonl")), doctest::Contains("gt_mask"),
                         std::runtime_error);

    std::ofstream g(dir.sub("bad2.jsonl"));
    g << R"({"format":"toyface-dataset","version":1})" << "\n";
    g << R"({"image":"a.png","landmarks":"a.txt","category":"dataset_forgery"})" << "\n";
    g.close();
    CHECK_THROWS_WITH_AS(load_manifest(dir.sub("bad2.jsonl")), doctest::Contains("gt_mask"),
                         std::runtime_error);
}

TEST_CASE("manifest: header and category validation") {
    testutil::TempDir dir("hdr");
    std::ofstream f(dir.sub("nohdr.jsonl"));
    f << R"({"image":"a.png","landmarks":"a.txt","category":"pristine"})" << "\n";
    f.close();
    CHECK_THROWS_AS(load_manifest(dir.sub("nohdr.jsonl")), std::runtime_error);

    std::ofstream g(dir.sub("badcat.jsonl"));
    g << R"({"format":"toyface-dataset","version":1})" << "\n";
    g << R"({"image":"a.png","landmarks":"a.txt","category":"alien"})" << "\n";
    g.close();
    CHECK_THROWS_AS(load_manifest(dir.sub("badcat.jsonl")), std::invalid_argument);
}

TEST_CASE("manifest: save/load round trip") {
    testutil::TempDir dir("mrt");
    DatasetManifest m;
    m.root_dir = dir.str();
    m.records.push_back({"images/p.png", "landmarks/p.txt", Category::Pristine, std::nullopt});
    m.records.push_back({"images/f.png", "landmarks/f.txt", Category::DatasetForgery,
                         std::string("masks/f.png")});
    save_manifest(dir.sub("m.jsonl"), m);
    const DatasetManifest back = load_manifest(dir.sub("m.jsonl"));
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].image == "images/p.png");
    CHECK(back.records[0].category == Category::Pristine);
    CHECK(back.records[1].gt_mask == std::string("masks/f.png"));
    CHECK(back.version == 1);
}

TEST_CASE("manifest: content hash is stable and content-sensitive") {
    testutil::TempDir dir("hash");
    std::ofstream(dir.sub("a.jsonl")) << "same bytes";
    std::ofstream(dir.sub("b.jsonl")) << "same bytes";
    std::ofstream(dir.sub("c.jsonl")) << "other bytes";
    CHECK(manifest_content_hash(dir.sub("a.jsonl")) == manifest_content_hash(dir.sub("b.jsonl")));
    CHECK(manifest_content_hash(dir.sub("a.jsonl")) != manifest_content_hash(dir.sub("c.jsonl")));
}
