#include <gtest/gtest.h>

#include <cmath>

#include "road/tape.hpp"
#include "testutil.hpp"

using road::Tape;
using road::Tensor;
using testutil::check_gradients;

namespace {

Tensor<double> randn(std::vector<std::int64_t> shape, std::uint64_t seed, double scale = 1.0) {
    road::Rng rng(seed);
    auto t = Tensor<double>::zeros(std::move(shape));
    for (auto& v : t.values) v = scale * rng.normal();
    return t;
}

} // namespace

TEST(Linear, IdentityAndSumBias) {
    Tape<double> t;
    auto x = t.input(Tensor<double>({1, 2}, {1, 0}));
    auto W = t.input(Tensor<double>({2, 2}, {1, 0, 0, 1}));
    auto b = t.input(Tensor<double>({2}, {0, 0}));
    auto y = t.linear(x, W, b);
    EXPECT_EQ(t.value(y).values, (std::vector<double>{1, 0}));

    auto x2 = t.input(Tensor<double>({1, 2}, {1, 2}));
    auto W2 = t.input(Tensor<double>({2, 1}, {1, 1}));
    auto b2 = t.input(Tensor<double>({1}, {3}));
    auto y2 = t.linear(x2, W2, b2);
    EXPECT_DOUBLE_EQ(t.value(y2).values[0], 6.0);
}

TEST(Linear, ShapeMismatchThrows) {
    Tape<double> t;
    auto x = t.input(Tensor<double>({1, 3}, {1, 2, 3}));
    auto W = t.input(Tensor<double>({2, 2}, {1, 0, 0, 1}));
    auto b = t.input(Tensor<double>({2}, {0, 0}));
    EXPECT_THROW((void)t.linear(x, W, b), road::Error);
}

TEST(Linear, GradientsMatchFiniteDifferences) {
    auto res = check_gradients(
        {randn({2, 3}, 1), randn({3, 4}, 2), randn({4}, 3)},
        [](Tape<double>& t, const std::vector<Tape<double>::Index>& in) {
            return t.sum_all(t.linear(in[0], in[1], in[2]));
        });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(Sine, KnownValues) {
    Tape<double> t;
    auto x = t.input(Tensor<double>({1, 2}, {0.0, M_PI / 60.0}));
    auto y = t.sine(x, 30.0);
    EXPECT_NEAR(t.value(y).values[0], 0.0, 1e-12);
    EXPECT_NEAR(t.value(y).values[1], 1.0, 1e-12);
}

TEST(Sine, GradientMatchesFiniteDifferences) {
    auto res = check_gradients({randn({3, 5}, 7, 0.3)},
                               [](Tape<double>& t, const auto& in) {
                                   return t.sum_all(t.sine(in[0], 30.0));
                               });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(Tanh, GradientMatchesFiniteDifferences) {
    auto res = check_gradients({randn({4, 3}, 11)}, [](Tape<double>& t, const auto& in) {
        return t.sum_all(t.tanh_(in[0]));
    });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(Softmax2, RowsSumToOneAndGradChecks) {
    Tape<double> t;
    auto x = t.input(randn({5, 2}, 13));
    auto p = t.softmax2(x);
    for (std::int64_t r = 0; r < 5; ++r)
        EXPECT_NEAR(t.value(p).at(r, 0) + t.value(p).at(r, 1), 1.0, 1e-12);

    // an l2 pull towards a random target exercises the full Jacobian
    auto res = check_gradients({randn({6, 2}, 17)}, [](Tape<double>& tape, const auto& in) {
        return tape.l2_loss(tape.softmax2(in[0]), randn({6, 2}, 999));
    });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(CrossEntropy2, MatchesManualAndGradChecks) {
    Tape<double> t;
    auto x = t.input(Tensor<double>({2, 2}, {2.0, 0.0, -1.0, 3.0}));
    auto loss = t.cross_entropy2(x, {0, 1});
    const double l0 = std::log(1 + std::exp(-2.0));
    const double l1 = std::log(1 + std::exp(-4.0));
    EXPECT_NEAR(t.value(loss).values[0], (l0 + l1) / 2.0, 1e-12);

    auto res = check_gradients({randn({7, 2}, 19)}, [](Tape<double>& tape, const auto& in) {
        return tape.cross_entropy2(in[0], {0, 1, 1, 0, 1, 0, 1});
    });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(L2Loss, ZeroAtTargetAndGradChecks) {
    Tape<double> t;
    auto x = t.input(Tensor<double>({2, 2}, {1, 2, 3, 4}));
    auto loss = t.l2_loss(x, Tensor<double>({2, 2}, {1, 2, 3, 4}));
    EXPECT_DOUBLE_EQ(t.value(loss).values[0], 0.0);

    auto res = check_gradients({randn({5, 3}, 23)}, [](Tape<double>& tape, const auto& in) {
        return tape.l2_loss(in[0], randn({5, 3}, 29));
    });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(StructuralOps, GradCheck) {
    auto res = check_gradients(
        {randn({4, 3}, 31), randn({4, 2}, 37)},
        [](Tape<double>& t, const auto& in) {
            auto g = t.gather_rows(in[0], {2, 0, 0, 3});
            auto cat = t.concat_cols(g, t.gather_rows(in[1], {0, 1, 2, 3}));
            auto r = t.reshape(cat, {2, 10});
            return t.sum_all(t.scale(r, 0.37));
        });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(NormalizeRows, UnitOutputAndGradCheck) {
    Tape<double> t;
    auto x = t.input(randn({6, 3}, 41));
    auto n = t.normalize_rows(x);
    for (std::int64_t r = 0; r < 6; ++r) {
        double s = 0;
        for (int c = 0; c < 3; ++c) s += t.value(n).at(r, c) * t.value(n).at(r, c);
        EXPECT_NEAR(std::sqrt(s), 1.0, 1e-5);
    }
    auto res = check_gradients({randn({5, 3}, 43)}, [](Tape<double>& tape, const auto& in) {
        auto nn = tape.normalize_rows(in[0]);
        return tape.l2_loss(nn, randn({5, 3}, 47));
    });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(ScaleRows, GradCheck) {
    auto res = check_gradients(
        {randn({4, 3}, 53), randn({4, 1}, 59)},
        [](Tape<double>& t, const auto& in) { return t.sum_all(t.scale_rows(in[0], in[1])); });
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(Tape, CompositionDeterministicBitwise) {
    auto run = [](std::vector<double>* grads) {
        Tape<float> t;
        auto xt = randn({3, 4}, 61).cast<float>();
        xt.requires_grad = true;
        auto x = t.input(std::move(xt));
        auto W = t.input(randn({4, 4}, 67).cast<float>());
        auto b = t.input(randn({4}, 71).cast<float>());
        auto y = t.sine(t.linear(x, W, b), 30.f);
        auto loss = t.l2_loss(y, Tensor<float>::zeros({3, 4}));
        t.backward(loss);
        grads->clear();
        for (float g : t.grad(x).values) grads->push_back(double(g));
        return t.value(loss).values[0];
    };
    std::vector<double> g1, g2;
    const float l1 = run(&g1);
    const float l2 = run(&g2);
    EXPECT_EQ(l1, l2);
    EXPECT_EQ(g1, g2);
}
