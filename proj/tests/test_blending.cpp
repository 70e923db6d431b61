#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "advforge/blending.hpp"
#include "advforge/synth.hpp"
#include "test_support.hpp"

using namespace advforge;

namespace {

Image random_image(Rng& rng, int size, double lo = 0.0, double hi = 1.0) {
    Image img(size, size);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) img.ch[c](y, x) = rng.uniform(lo, hi);
    return img;
}

Mask soft_mask(Rng& rng, int size) {
    Mask m = Mask(Mask::Zero(size, size));
    const double cx = rng.uniform(size * 0.3, size * 0.7);
    const double cy = rng.uniform(size * 0.3, size * 0.7);
    const double r = rng.uniform(size * 0.15, size * 0.3);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            m(y, x) = std::clamp(1.2 - std::hypot(x - cx, y - cy) / r, 0.0, 1.0);
    return m;
}

Mask centered_box_mask(int size, int margin) {
    Mask m = Mask(Mask::Zero(size, size));
    for (int y = margin; y < size - margin; ++y)
        for (int x = margin; x < size - margin; ++x) m(y, x) = 1.0;
    return m;
}

/// Dense direct solve of the same Dirichlet system, via LU on the assembled
/// matrix. Independent of the matrix-free CG path.
Image poisson_dense_oracle(const Image& ip, const Image& if_, const Mask& bin) {
    const int h = static_cast<int>(ip.rows()), w = static_cast<int>(ip.cols());
    std::vector<int> ys, xs;
    Eigen::MatrixXi index = Eigen::MatrixXi::Constant(h, w, -1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (bin(y, x) >= 0.5) {
                index(y, x) = static_cast<int>(ys.size());
                ys.push_back(y);
                xs.push_back(x);
            }
    const int n = static_cast<int>(ys.size());
    Image out = ip;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 4.0;
        const int y = ys[static_cast<std::size_t>(i)], x = xs[static_cast<std::size_t>(i)];
        for (auto [dy, dx] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
            const int j = index(y + dy, x + dx);
            if (j >= 0) A(i, j) = -1.0;
        }
    }
    const auto lu = A.partialPivLu();
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            const int y = ys[static_cast<std::size_t>(i)], x = xs[static_cast<std::size_t>(i)];
            double rhs = 4.0 * if_.ch[c](y, x) - if_.ch[c](y - 1, x) - if_.ch[c](y + 1, x) -
                         if_.ch[c](y, x - 1) - if_.ch[c](y, x + 1);
            for (auto [dy, dx] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}})
                if (index(y + dy, x + dx) < 0) rhs += ip.ch[c](y + dy, x + dx);
            b[i] = rhs;
        }
        const Eigen::VectorXd u = lu.solve(b);
        for (int i = 0; i < n; ++i)
            out.ch[c](ys[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i)]) =
                std::clamp(u[i], 0.0, 1.0);
    }
    return out;
}

}  // namespace

TEST_CASE("color_transfer: equal masked means leave the source unchanged") {
    Rng rng(1);
    const Image src = random_image(rng, 16, 0.2, 0.8);
    const Mask m = centered_box_mask(16, 4);
    const Image out = color_transfer(src, src, m);
    CHECK(max_abs_diff(out, src) < 1e-12);
}

TEST_CASE("color_transfer: constant 0.2 source to constant 0.7 target under a full mask") {
    const Image src = Image::constant(8, 8, 0.2, 0.2, 0.2);
    const Image dst = Image::constant(8, 8, 0.7, 0.7, 0.7);
    const Mask m = Mask(Mask::Constant(8, 8, 1.0));
    const Image out = color_transfer(src, dst, m);
    CHECK(max_abs_diff(out, dst) < 1e-12);
}

TEST_CASE("color_transfer: masked means equal the target's afterwards") {
    Rng rng(2);
    const Image src = random_image(rng, 16, 0.35, 0.65);  // headroom, no clamping
    const Image dst = random_image(rng, 16, 0.35, 0.65);
    const Mask m = soft_mask(rng, 16);
    REQUIRE(m.sum() > 0);
    const Image out = color_transfer(src, dst, m);
    for (int c = 0; c < 3; ++c) {
        const double mean_out = (m * out.ch[c]).sum() / m.sum();
        const double mean_dst = (m * dst.ch[c]).sum() / m.sum();
        CHECK(std::abs(mean_out - mean_dst) < 1e-9);
    }
    // untouched outside the support
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if (m(y, x) == 0.0)
                for (int c = 0; c < 3; ++c) CHECK(out.ch[c](y, x) == src.ch[c](y, x));
}

TEST_CASE("color_transfer: empty support throws") {
    const Image img = Image::constant(8, 8, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(color_transfer(img, img, Mask(Mask::Zero(8, 8))), std::invalid_argument);
}

TEST_CASE("alpha_blend: zero mask returns the pristine bit-for-bit") {
    Rng rng(3);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    CHECK(max_abs_diff(alpha_blend(ip, if_, Mask(Mask::Zero(12, 12))), ip) == 0.0);
}

TEST_CASE("alpha_blend: unit mask returns the reference bit-for-bit") {
    Rng rng(4);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    CHECK(max_abs_diff(alpha_blend(ip, if_, Mask(Mask::Constant(12, 12, 1.0))), if_) == 0.0);
}

TEST_CASE("alpha_blend: matches the elementwise oracle exactly") {
    Rng rng(5);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    const Mask m = soft_mask(rng, 12);
    const Image out = alpha_blend(ip, if_, m);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x) {
                const double expect = m(y, x) * if_.ch[c](y, x) + (1 - m(y, x)) * ip.ch[c](y, x);
                CHECK(out.ch[c](y, x) == expect);
            }
}

TEST_CASE("mixup_blend: ratio 0 returns the pristine bit-for-bit") {
    Rng rng(6);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    CHECK(max_abs_diff(mixup_blend(ip, if_, soft_mask(rng, 12), 0.0), ip) == 0.0);
}

TEST_CASE("mixup_blend: ratio 1 with a unit mask returns the reference") {
    Rng rng(7);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    CHECK(max_abs_diff(mixup_blend(ip, if_, Mask(Mask::Constant(12, 12, 1.0)), 1.0), if_) < 1e-15);
}

TEST_CASE("mixup_blend: matches the direct formula oracle exactly at ratio 0.5") {
    Rng rng(8);
    const Image ip = random_image(rng, 12);
    const Image if_ = random_image(rng, 12);
    const Mask m = soft_mask(rng, 12);
    const Image out = mixup_blend(ip, if_, m, 0.5);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x) {
                const double expect =
                    0.5 * m(y, x) * (if_.ch[c](y, x) - ip.ch[c](y, x)) + ip.ch[c](y, x);
                CHECK(out.ch[c](y, x) == expect);
            }
}

TEST_CASE("mixup_blend: out-of-range ratio throws") {
    const Image img = Image::constant(8, 8, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(mixup_blend(img, img, Mask(Mask::Zero(8, 8)), 1.5), std::invalid_argument);
    CHECK_THROWS_AS(mixup_blend(img, img, Mask(Mask::Zero(8, 8)), -0.1), std::invalid_argument);
}

TEST_CASE("mixup_blend: pixelwise linear (monotone) in the ratio") {
    Rng rng(9);
    const Image ip = random_image(rng, 10);
    const Image if_ = random_image(rng, 10);
    const Mask m = soft_mask(rng, 10);
    const Image a0 = mixup_blend(ip, if_, m, 0.0);
    const Image a5 = mixup_blend(ip, if_, m, 0.5);
    const Image a25 = mixup_blend(ip, if_, m, 0.25);
    for (int c = 0; c < 3; ++c)
        CHECK((a25.ch[c] - 0.5 * (a0.ch[c] + a5.ch[c])).abs().maxCoeff() < 1e-15);
}

TEST_CASE("poisson_blend: identical images solve to the pristine exactly") {
    Rng rng(10);
    const Image ip = random_image(rng, 12, 0.1, 0.9);
    const Mask bin = centered_box_mask(12, 3);
    const Image out = poisson_blend(ip, ip, bin);
    CHECK(max_abs_diff(out, ip) == 0.0);
}

TEST_CASE("poisson_blend: global constant offset returns the target image") {
    Rng rng(11);
    Image ip = random_image(rng, 16, 0.15, 0.55);
    Image if_ = ip;
    for (int c = 0; c < 3; ++c) if_.ch[c] += 0.3;  // offset covers mask and its boundary ring
    const Mask bin = centered_box_mask(16, 4);
    const Image out = poisson_blend(ip, if_, bin);
    CHECK(max_abs_diff(out, ip) < 1e-7);
    const Image oracle = poisson_dense_oracle(ip, if_, bin);
    CHECK(max_abs_diff(out, oracle) < 1e-8);
}

TEST_CASE("poisson_blend: matches the dense LU oracle on 8x8 instances") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const Image ip = random_image(rng, 8, 0.2, 0.8);
        const Image if_ = random_image(rng, 8, 0.2, 0.8);
        Mask bin = Mask(Mask::Zero(8, 8));
        for (int y = 2; y < 6; ++y)
            for (int x = 2; x < 6; ++x)
                if (rng.uniform01() < 0.8) bin(y, x) = 1.0;
        if (bin.sum() == 0) bin(3, 3) = 1.0;
        const Image cg = poisson_blend(ip, if_, bin);
        const Image lu = poisson_dense_oracle(ip, if_, bin);
        CHECK(max_abs_diff(cg, lu) < 1e-8);
    }
}

TEST_CASE("poisson_blend: pixels outside the interior are untouched") {
    Rng rng(13);
    const Image ip = random_image(rng, 12, 0.2, 0.8);
    const Image if_ = random_image(rng, 12, 0.2, 0.8);
    const Mask bin = centered_box_mask(12, 4);
    const Image out = poisson_blend(ip, if_, bin);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x)
                if (bin(y, x) < 0.5) CHECK(out.ch[c](y, x) == ip.ch[c](y, x));
}

TEST_CASE("poisson_blend: interior touching the border throws") {
    const Image img = Image::constant(8, 8, 0.5, 0.5, 0.5);
    Mask bin = Mask(Mask::Zero(8, 8));
    bin(0, 3) = 1.0;
    CHECK_THROWS_AS(poisson_blend(img, img, bin), std::invalid_argument);
}

TEST_CASE("poisson_blend: empty interior throws") {
    const Image img = Image::constant(8, 8, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(poisson_blend(img, img, Mask(Mask::Zero(8, 8))), std::invalid_argument);
}

TEST_CASE("synthesize: do-nothing config is a contract error") {
    const auto a = testutil::toy_face(20);
    const auto b = testutil::toy_face(21);
    ForgeryConfig cfg;
    cfg.blend = BlendType::DoNothing;
    Rng rng(1);
    CHECK_THROWS_AS(synthesize(a.image, a.landmarks, b.image, b.landmarks, cfg, rng),
                    std::invalid_argument);
}

TEST_CASE("synthesize: identical pristine/reference under alpha stays within 2/255") {
    const auto face = testutil::toy_face(22);
    ForgeryConfig cfg;
    cfg.region = 7;
    cfg.blend = BlendType::Alpha;
    Rng rng(2);
    const auto result = synthesize(face.image, face.landmarks, face.image, face.landmarks, cfg, rng);
    CHECK(max_abs_diff(result.image, face.image) < 2.0 / 255.0);
}

TEST_CASE("synthesize: fixed seed and config give bit-identical outputs") {
    const auto a = testutil::toy_face(23);
    const auto b = testutil::toy_face(24);
    for (BlendType blend : {BlendType::Alpha, BlendType::Poisson, BlendType::Mixup}) {
        ForgeryConfig cfg;
        cfg.region = 9;
        cfg.blend = blend;
        cfg.ratio = 0.5;
        Rng r1(99), r2(99);
        const auto s1 = synthesize(a.image, a.landmarks, b.image, b.landmarks, cfg, r1);
        const auto s2 = synthesize(a.image, a.landmarks, b.image, b.landmarks, cfg, r2);
        CHECK(max_abs_diff(s1.image, s2.image) == 0.0);
        CHECK((s1.mask == s2.mask).all());
    }
}

TEST_CASE("synthesize: zero-mask pixels stay bit-identical to the pristine (alpha/mixup)") {
    const auto a = testutil::toy_face(25);
    const auto b = testutil::toy_face(26);
    for (BlendType blend : {BlendType::Alpha, BlendType::Mixup}) {
        ForgeryConfig cfg;
        cfg.region = 4;
        cfg.blend = blend;
        cfg.ratio = 0.8;
        Rng rng(7);
        const auto result = synthesize(a.image, a.landmarks, b.image, b.landmarks, cfg, rng);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 64; ++y)
                for (int x = 0; x < 64; ++x)
                    if (result.mask(y, x) == 0.0) CHECK(result.image.ch[c](y, x) == a.image.ch[c](y, x));
    }
}
