#include <doctest.h>

#include <cmath>

#include "advforge/losses.hpp"
#include "test_support.hpp"

using namespace advforge;
using nn::NodeId;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;

namespace {

DetectorOutput random_output(Rng& rng, int map_size = 4) {
    DetectorOutput out;
    out.main_logits << rng.uniform(-1, 1), rng.uniform(-1, 1);
    out.region_map = Mask(map_size, map_size);
    for (int y = 0; y < map_size; ++y)
        for (int x = 0; x < map_size; ++x) out.region_map(y, x) = rng.uniform01();
    for (int i = 0; i < kNumTypeClasses; ++i) out.type_logits[i] = rng.uniform(-1, 1);
    out.ratio = rng.uniform01();
    return out;
}

SampleRecord random_record(Rng& rng, int map_size = 4) {
    SampleRecord r;
    r.image = Image(map_size * 16, map_size * 16);
    const int pick = rng.uniform_int(3);
    r.m_gt = Mask(map_size, map_size);
    for (int y = 0; y < map_size; ++y)
        for (int x = 0; x < map_size; ++x) r.m_gt(y, x) = rng.uniform01();
    if (pick == 0) {
        r.category = Category::Pristine;
        r.t_gt = kTypePristine;
        r.binary_label = 0;
        r.m_gt.setZero();
    } else if (pick == 1) {
        r.category = Category::DatasetForgery;
        r.t_gt = kTypeDatasetForgery;
        r.binary_label = 1;
    } else {
        r.category = Category::Synthesized;
        r.t_gt = rng.uniform_int(3);
        r.binary_label = 1;
        if (r.t_gt == 2) r.a_gt = rng.uniform01();
    }
    return r;
}

}  // namespace

TEST_CASE("am_softmax: zero margin, unit scale, equal cosines give ln 2") {
    Eigen::VectorXd cos(2);
    cos << 0.8, 0.8;
    CHECK(am_softmax_from_cos(cos, 0, {0.0, 1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(am_softmax_from_cos(cos, 1, {0.0, 1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("am_softmax: hand-evaluated closed form at m=0.35, s=30") {
    Eigen::VectorXd cos(2);
    cos << 0.9, 0.1;
    const double a_y = 30.0 * (0.9 - 0.35);
    const double a_other = 30.0 * 0.1;
    const double expect = -std::log(std::exp(a_y) / (std::exp(a_y) + std::exp(a_other)));
    CHECK(am_softmax_from_cos(cos, 0, {0.35, 30.0}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("am_softmax: loss strictly increases with the margin") {
    Eigen::VectorXd cos(3);
    cos << 0.6, 0.2, -0.1;
    double prev = -1.0;
    for (double m : {0.0, 0.1, 0.2, 0.35, 0.5}) {
        const double v = am_softmax_from_cos(cos, 0, {m, 12.0});
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("am_softmax: nonnegative on random cosines") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd cos(5);
        for (int j = 0; j < 5; ++j) cos[j] = rng.uniform(-1, 1);
        CHECK(am_softmax_from_cos(cos, rng.uniform_int(5), {0.35, 30.0}) >= 0.0);
    }
}

TEST_CASE("am_softmax: zero-norm feature throws") {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(8);
    Eigen::MatrixXd w = Eigen::MatrixXd::Random(2, 8);
    CHECK_THROWS_AS(am_softmax_from_features(f, w, 0, {0.35, 30.0}), std::runtime_error);
}

TEST_CASE("am_softmax: label out of range throws") {
    Eigen::VectorXd cos(2);
    cos << 0.1, 0.2;
    CHECK_THROWS_AS(am_softmax_from_cos(cos, 2, {0.35, 30.0}), std::invalid_argument);
}

TEST_CASE("am_softmax: tape node value equals the plain evaluation") {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        Tensor cos = Tensor::randn({5}, rng, 0.5);
        Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(cos.data.data(), 5);
        const int label = rng.uniform_int(5);
        Tape tape;
        const NodeId node = am_softmax_loss_node(tape, tape.constant(cos), label, {0.35, 30.0});
        CHECK(tape.value(node).data[0] ==
              doctest::Approx(am_softmax_from_cos(cv, label, {0.35, 30.0})).epsilon(1e-12));
    }
}

TEST_CASE("am_softmax: gradient through the node matches finite differences") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        ParamStore store;
        store.create("cos", Tensor::randn({4}, rng, 0.4));
        const int label = rng.uniform_int(4);
        auto build = [&](Tape& t) {
            return am_softmax_loss_node(t, t.param(store, "cos"), label, {0.35, 8.0});
        };
        const double err = testutil::max_fd_rel_error(
            store, [&]() { Tape t; return t.value(build(t)).data[0]; },
            [&]() {
                Tape t;
                t.backward(build(t), store);
            });
        CHECK(err < 1e-4);
    }
}

TEST_CASE("region_loss: identical maps give 0; zero-vs-one gives 1") {
    Mask a = Mask(Mask::Zero(4, 4));
    CHECK(region_loss(a, a) == 0.0);
    CHECK(region_loss(Mask(Mask::Zero(4, 4)), Mask(Mask::Constant(4, 4, 1.0))) == 1.0);
}

TEST_CASE("region_loss: random pair matches the elementwise oracle exactly") {
    Rng rng(4);
    Mask a(4, 4), b(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            a(y, x) = rng.uniform01();
            b(y, x) = rng.uniform01();
        }
    double acc = 0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) acc += std::abs(a(y, x) - b(y, x));
    CHECK(region_loss(a, b) == doctest::Approx(acc / 16.0).epsilon(1e-15));
}

TEST_CASE("region_loss: shape mismatch throws") {
    CHECK_THROWS_AS(region_loss(Mask(Mask::Zero(4, 4)), Mask(Mask::Zero(2, 2))),
                    std::invalid_argument);
}

TEST_CASE("ratio_loss: the tau gate over all five type labels") {
    for (int t_gt = 0; t_gt < kNumTypeClasses; ++t_gt) {
        if (t_gt == 2) {
            CHECK(ratio_loss(0.5, 0.3, t_gt) == doctest::Approx(0.2).epsilon(1e-15));
        } else {
            // gate closed: zero regardless of the ratios
            CHECK(ratio_loss(std::nullopt, 0.9, t_gt) == 0.0);
            CHECK(ratio_loss(0.1, 0.9, t_gt) == 0.0);
        }
    }
}

TEST_CASE("ratio_loss: mixup label without a ground-truth ratio throws") {
    CHECK_THROWS_AS(ratio_loss(std::nullopt, 0.5, 2), std::invalid_argument);
}

TEST_CASE("total_loss: breakdown recombines to the total and is linear in the weights") {
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        const SampleRecord rec = random_record(rng);
        const DetectorOutput out = random_output(rng);
        LossWeights w{0.1, 0.05, 0.1};
        const LossBreakdown b = total_loss(rec, out, w, {0.35, 30.0});
        CHECK(b.total ==
              doctest::Approx(b.main + 0.1 * b.region + 0.05 * b.type + 0.1 * b.ratio).epsilon(1e-12));
        CHECK(b.main >= 0.0);
        CHECK(b.region >= 0.0);
        CHECK(b.type >= 0.0);
        CHECK(b.ratio >= 0.0);
        LossWeights w2{0.2, 0.05, 0.1};
        const LossBreakdown b2 = total_loss(rec, out, w2, {0.35, 30.0});
        CHECK(b2.total - b.total == doctest::Approx(0.1 * b.region).epsilon(1e-12));
    }
}

TEST_CASE("total_loss: weights (0.1, 0.05, 0.1) on unit components give 1.25") {
    // arithmetic of the combination, checked through the breakdown identity
    LossBreakdown b;
    b.main = 1.0;
    b.region = 1.0;
    b.type = 1.0;
    b.ratio = 1.0;
    const double total = b.main + 0.1 * b.region + 0.05 * b.type + 0.1 * b.ratio;
    CHECK(total == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("total_loss: inconsistent labels are rejected") {
    Rng rng(6);
    SampleRecord rec = random_record(rng);
    rec.category = Category::Pristine;
    rec.t_gt = 1;  // violates the pristine labeling rule
    const DetectorOutput out = random_output(rng);
    CHECK_THROWS_AS(total_loss(rec, out, {}, {}), std::logic_error);
}

TEST_CASE("total_loss: perfect region/ratio predictions zero their components") {
    Rng rng(7);
    SampleRecord rec;
    rec.image = Image(64, 64);
    rec.category = Category::Synthesized;
    rec.t_gt = 2;
    rec.a_gt = 0.37;
    rec.binary_label = 1;
    rec.m_gt = Mask(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) rec.m_gt(y, x) = rng.uniform01();
    DetectorOutput out = random_output(rng);
    out.region_map = rec.m_gt;
    out.ratio = 0.37;
    const LossBreakdown b = total_loss(rec, out, {}, {});
    CHECK(b.region == 0.0);
    CHECK(b.ratio == 0.0);
}
