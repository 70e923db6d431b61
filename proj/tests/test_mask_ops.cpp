#include <doctest.h>

#include <cmath>

#include "advforge/mask_ops.hpp"
#include "test_support.hpp"

using namespace advforge;

namespace {

Mask random_blob_mask(Rng& rng, int size) {
    Mask m = Mask::Zero(size, size);
    const int n_discs = 1 + rng.uniform_int(3);
    for (int d = 0; d < n_discs; ++d) {
        const double cx = rng.uniform(8, size - 8);
        const double cy = rng.uniform(8, size - 8);
        const double r = rng.uniform(2, 6);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                if (std::hypot(x - cx, y - cy) <= r) m(y, x) = 1.0;
    }
    return m;
}

/// Dense 2-d convolution with edge-replicate padding: the blur oracle.
Mask dense_blur_oracle(const Mask& m, int k) {
    const auto k1 = gaussian_kernel<double>(k);
    const int c = k / 2;
    const Eigen::Index h = m.rows(), w = m.cols();
    Mask out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            double acc = 0;
            for (int u = 0; u < k; ++u)
                for (int v = 0; v < k; ++v) {
                    const Eigen::Index ys = std::clamp<Eigen::Index>(y + u - c, 0, h - 1);
                    const Eigen::Index xs = std::clamp<Eigen::Index>(x + v - c, 0, w - 1);
                    acc += k1[static_cast<std::size_t>(u)] * k1[static_cast<std::size_t>(v)] * m(ys, xs);
                }
            out(y, x) = acc;
        }
    return out;
}

/// Morphological dilation with a Euclidean disc: the containment oracle.
Mask dilate_oracle(const Mask& m, double radius) {
    const Eigen::Index h = m.rows(), w = m.cols();
    Mask out = Mask::Zero(h, w);
    const int r = static_cast<int>(std::ceil(radius));
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            if (m(y, x) <= 0.0) continue;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const Eigen::Index yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    if (std::hypot(dx, dy) <= radius) out(yy, xx) = 1.0;
                }
        }
    return out;
}

}  // namespace

TEST_CASE("deform_mask: magnitude 0 returns the mask unchanged") {
    Rng rng(1);
    const Mask m = random_blob_mask(rng, 32);
    Rng deform_rng(2);
    CHECK((deform_mask(m, deform_rng, 0.0) == m).all());
}

TEST_CASE("deform_mask: all-zero mask stays all-zero") {
    const Mask m = Mask::Zero(32, 32);
    for (double mag : {1.0, 4.0, 9.0}) {
        Rng rng(3);
        CHECK((deform_mask(m, rng, mag) == 0.0).all());
    }
}

TEST_CASE("deform_mask: negative magnitude throws") {
    Rng rng(4);
    CHECK_THROWS_AS(deform_mask(Mask(Mask::Zero(16, 16)), rng, -1.0), std::invalid_argument);
}

TEST_CASE("deform_mask: support is contained in the dilated input support (200 masks)") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const Mask m = random_blob_mask(rng, 32);
        const double magnitude = rng.uniform(0.5, 6.0);
        Rng deform_rng(rng.next_u64());
        const Mask out = deform_mask(m, deform_rng, magnitude);
        const Mask allowed = dilate_oracle(m, magnitude);
        bool ok = true;
        for (int y = 0; y < 32 && ok; ++y)
            for (int x = 0; x < 32 && ok; ++x)
                if (out(y, x) > 0.0 && allowed(y, x) == 0.0) ok = false;
        CHECK(ok);
        CHECK(out.minCoeff() >= 0.0);
        CHECK(out.maxCoeff() <= 1.0);
    }
}

TEST_CASE("deform_mask: bit-identical under a fixed seed") {
    Rng rng(6);
    const Mask m = random_blob_mask(rng, 32);
    Rng r1(77), r2(77);
    CHECK((deform_mask(m, r1, 4.0) == deform_mask(m, r2, 4.0)).all());
}

TEST_CASE("blur_mask: kernel 1 is the identity") {
    Rng rng(7);
    const Mask m = random_blob_mask(rng, 24);
    CHECK((blur_mask(m, 1) == m).all());
}

TEST_CASE("blur_mask: constant mask unchanged under replicate padding") {
    const Mask m = Mask::Constant(20, 20, 0.37);
    for (int k : {3, 5, 11}) CHECK((blur_mask(m, k) - m).abs().maxCoeff() < 1e-12);
}

TEST_CASE("blur_mask: even kernel throws") {
    CHECK_THROWS_AS(blur_mask(Mask(Mask::Zero(8, 8)), 4), std::invalid_argument);
}

TEST_CASE("blur_mask: separable pass matches the dense 2-d oracle") {
    Rng rng(8);
    for (int k : {3, 5, 7, 9, 11}) {
        const Mask m = random_blob_mask(rng, 24);
        CHECK((blur_mask(m, k) - dense_blur_oracle(m, k)).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("blur_mask: randomized kernel comes from the declared pool and is deterministic") {
    Rng rng(9);
    const Mask m = random_blob_mask(rng, 24);
    Rng r1(123), r2(123);
    const Mask a = blur_mask(m, r1);
    const Mask b = blur_mask(m, r2);
    CHECK((a == b).all());
    bool matched_pool = false;
    for (int k : blur_kernel_pool())
        if ((a - blur_mask(m, k)).abs().maxCoeff() == 0.0) matched_pool = true;
    CHECK(matched_pool);
}

TEST_CASE("blur_mask: linear in its input") {
    Rng rng(10);
    const Mask m1 = random_blob_mask(rng, 24);
    const Mask m2 = random_blob_mask(rng, 24);
    const double a = 0.3;
    const Mask lhs = blur_mask((a * m1 + (1 - a) * m2).eval(), 7);
    const Mask rhs = a * blur_mask(m1, 7) + (1 - a) * blur_mask(m2, 7);
    CHECK((lhs - rhs).abs().maxCoeff() < 1e-9);
}

TEST_CASE("blur_mask: preserves the [0,1] range") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Mask m = random_blob_mask(rng, 24);
        const Mask out = blur_mask(m, 9);
        CHECK(out.minCoeff() >= 0.0);
        CHECK(out.maxCoeff() <= 1.0 + 1e-15);
    }
}

TEST_CASE("downsample_16: all-ones stays all-ones") {
    const Mask m = Mask::Constant(64, 64, 1.0);
    const Mask out = downsample_16(m);
    REQUIRE(out.rows() == 4);
    REQUIRE(out.cols() == 4);
    CHECK((out == 1.0).all());
}

TEST_CASE("downsample_16: a single lit pixel averages to 1/256 in its block") {
    Mask m = Mask::Zero(64, 64);
    m(19, 37) = 1.0;
    const Mask out = downsample_16(m);
    for (int by = 0; by < 4; ++by)
        for (int bx = 0; bx < 4; ++bx) {
            const double expect = (by == 1 && bx == 2) ? 1.0 / 256.0 : 0.0;
            CHECK(out(by, bx) == expect);
        }
}

TEST_CASE("downsample_16: block averaging preserves the global mean") {
    Rng rng(12);
    Mask m(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) m(y, x) = rng.uniform01();
    CHECK(std::abs(downsample_16(m).mean() - m.mean()) < 1e-12);
}

TEST_CASE("downsample_16: indivisible dimensions throw") {
    CHECK_THROWS_AS(downsample_16(Mask(Mask::Zero(60, 64))), std::invalid_argument);
}
