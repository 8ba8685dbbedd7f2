#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "crm/estimator.hpp"
#include "oracles.hpp"

using namespace crm;

namespace {

SampleSequence constant_sequence(std::size_t N, std::vector<double> z) {
    std::vector<double> flat;
    for (std::size_t i = 0; i < N; ++i) flat.insert(flat.end(), z.begin(), z.end());
    return SampleSequence(z.size(), flat);
}

// z = 0.1, 0.4, 0.35, 0.8, 0.6, 0.2 (k = 1), d = 2, unit Gaussian, b = 0.5,
// target = last two samples. Frozen from a brute-force window script.
const std::vector<double> kSix{0.1, 0.4, 0.35, 0.8, 0.6, 0.2};
const std::vector<double> kSixWeights{0.08911059266796172, 0.1404537443096252, 0.06836617690073507,
                                      0.10668474878015885};

SampleSequence random_sequence(std::mt19937_64& rng, std::size_t N, std::size_t k) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::bernoulli_distribution B(0.5);
    std::vector<double> flat;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j + 1 < k; ++j) flat.push_back(U(rng));
        flat.push_back(k == 1 ? U(rng) : (B(rng) ? 1.0 : 0.0));
    }
    return SampleSequence(k, flat);
}

}  // namespace

TEST(HistoryWeights, ConstantSequenceGivesPeakEverywhere) {
    const auto seq = constant_sequence(10, {0.5});
    const auto k = KernelSpec::squared_exponential(1, 0.3);
    const std::vector<double> target{0.5};
    const auto w = history_weights(seq, 1, k, target);
    ASSERT_EQ(w.n(), 9u);
    for (double v : w.raw_weights) EXPECT_EQ(v, k.K1);
}

TEST(HistoryWeights, SixSampleBruteForce) {
    const SampleSequence seq(1, kSix);
    const auto k = KernelSpec::squared_exponential(2, 0.5);
    const auto target = seq.final_history(2);
    const auto w = history_weights(seq, 2, k, target);
    ASSERT_EQ(w.n(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(w.raw_weights[i], kSixWeights[i], 1e-15);

    const auto brute = oracle::window_weights(oracle::rows_of(seq), 2, 0.5, target,
                                              [](const std::vector<double>& u) { return oracle::gaussian(u); });
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(w.raw_weights[i], brute[i], 1e-15);
}

TEST(HistoryWeights, DistantTargetVanishes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 0.2);
    std::vector<double> flat;
    for (int i = 0; i < 30; ++i) flat.push_back(U(rng));
    const SampleSequence seq(1, flat);
    const std::vector<double> target{0.95, 0.95};
    const auto w = history_weights(seq, 2, KernelSpec::squared_exponential(2, 0.02), target);
    for (double v : w.raw_weights) EXPECT_LT(v, 1e-10);
}

TEST(HistoryWeights, ArgumentErrors) {
    const SampleSequence seq(1, kSix);
    const std::vector<double> t2{0.5, 0.5};
    EXPECT_THROW(history_weights(seq, 2, KernelSpec::squared_exponential(3, 0.5), t2), argument_error);
    EXPECT_THROW(history_weights(seq, 2, KernelSpec::squared_exponential(2, 0.5), std::vector<double>{0.5}),
                 argument_error);
    EXPECT_THROW(history_weights(seq, 5, KernelSpec::squared_exponential(5, 0.5),
                                 std::vector<double>(5, 0.5)),
                 argument_error);  // N < d + 2
    EXPECT_THROW(history_weights(seq, 2, KernelSpec::squared_exponential(2, 0.5), std::vector<double>{0.5, 1.5}),
                 argument_error);
    EXPECT_THROW(history_weights(seq, 1, StratifiedSetSpec{0.3}, std::vector<double>{0.5}), argument_error);
}

TEST(EstimateP, ConstantWeights) {
    const auto seq = constant_sequence(12, {0.3});
    const auto k = KernelSpec::squared_exponential(1, 0.25);
    const std::vector<double> target{0.3};
    EXPECT_NEAR(estimate_p(seq, 1, k, target), k.K1 / 0.25, 1e-15);
}

TEST(EstimateP, SixSampleBruteForce) {
    const SampleSequence seq(1, kSix);
    const auto target = seq.final_history(2);
    EXPECT_NEAR(estimate_p(seq, 2, KernelSpec::squared_exponential(2, 0.5), target), 0.4046152626584809, 1e-12);
}

TEST(EstimateP, StratifiedIdenticalHistories) {
    // only the positive stratum is populated, so each weight is 1/2
    const auto seq = constant_sequence(8, {0.4, 0.6, 1.0});
    EXPECT_DOUBLE_EQ(estimate_p(seq, 3, StratifiedSetSpec{0.2}, seq.final_history(3)), 0.5);

    std::vector<double> flat;
    for (int i = 0; i < 8; ++i) flat.insert(flat.end(), {0.4, 0.6, i % 2 ? 1.0 : 0.0});
    const SampleSequence alt(3, flat);
    // windows alternate between the target pattern and its label-swapped twin
    EXPECT_DOUBLE_EQ(history_weights(alt, 2, StratifiedSetSpec{0.2}, alt.final_history(2)).raw_weights[1], 1.0);
}

TEST(EstimateQ, ConstantLossFactorsOut) {
    std::mt19937_64 rng(9);
    const auto seq = random_sequence(rng, 40, 2);
    const auto k = KernelSpec::squared_exponential(2, 0.4);
    const auto target = seq.final_history(1);
    // clipped-squared loss with a zero predictor is 1/4 for every label
    const Hypothesis quarter{{0.0}, 0.0, LossKind::clipped_squared};
    EXPECT_NEAR(estimate_q(seq, 1, k, target, quarter), 0.25 * estimate_p(seq, 1, k, target), 1e-15);
}

TEST(EstimateQ, ZeroLossGivesZero) {
    // all labels +1 and a predictor that always says +1
    const auto seq = constant_sequence(10, {0.2, 1.0});
    const Hypothesis h{{0.0}, 1.0, LossKind::zero_one};
    const auto target = seq.final_history(2);
    EXPECT_EQ(estimate_q(seq, 2, KernelSpec::squared_exponential(4, 0.3), target, h), 0.0);
}

TEST(EstimateQ, SixSampleBruteForce) {
    const SampleSequence seq(1, kSix);
    const auto target = seq.final_history(2);
    const Hypothesis h{{}, -0.3, LossKind::zero_one};  // always predicts -1
    EXPECT_NEAR(estimate_q(seq, 2, KernelSpec::squared_exponential(2, 0.5), target, h), 0.20881992121036028,
                1e-12);
    EXPECT_NEAR(conditional_risk_estimate(seq, 2, KernelSpec::squared_exponential(2, 0.5), target, h),
                0.5160950178654446, 1e-12);
}

TEST(ConditionalRisk, ConstantSequenceReducesToEmpiricalRisk) {
    // identical histories, successors differ only through the hypothesis
    std::vector<double> flat;
    for (int i = 0; i < 20; ++i) {
        flat.push_back(0.5);
        flat.push_back(1.0);
    }
    const SampleSequence seq(2, flat);
    const Hypothesis h{{1.0}, -0.7, LossKind::clipped_squared};
    const auto target = seq.final_history(2);
    double mean = 0.0;
    for (std::size_t t = 2; t < seq.size(); ++t) mean += loss(h, seq.point(t));
    mean /= static_cast<double>(seq.size() - 2);
    EXPECT_NEAR(conditional_risk_estimate(seq, 2, KernelSpec::squared_exponential(4, 0.1), target, h), mean, 1e-12);
}

TEST(ConditionalRisk, MaximalLoss) {
    std::mt19937_64 rng(4);
    auto seq = random_sequence(rng, 30, 2);
    // force every label to -1 and predict +1 everywhere
    std::vector<double> flat = seq.flat();
    for (std::size_t i = 1; i < flat.size(); i += 2) flat[i] = 0.0;
    seq = SampleSequence(2, flat);
    const Hypothesis h{{0.0}, 1.0, LossKind::zero_one};
    EXPECT_DOUBLE_EQ(conditional_risk_estimate(seq, 1, KernelSpec::squared_exponential(2, 0.3),
                                               seq.final_history(1), h),
                     1.0);
}

TEST(ConditionalRisk, NoEffectiveSamplesIsAnError) {
    std::vector<double> flat;
    for (int i = 0; i < 20; ++i) flat.push_back(0.05 * (i % 3));
    const SampleSequence seq(1, flat);
    const std::vector<double> target{0.9};
    const Hypothesis h{{}, 1.0, LossKind::zero_one};
    EXPECT_THROW(conditional_risk_estimate(seq, 1, KernelSpec::epanechnikov(1, 0.1), target, h), no_effective_samples);
    EXPECT_EQ(estimate_p(seq, 1, KernelSpec::epanechnikov(1, 0.1), target), 0.0);
}

TEST(ConditionalRisk, MatchesNaiveReferenceOnRandomInputs) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 1 + trial % 2, d = 1 + trial % 3, N = 10 + static_cast<std::size_t>(trial);
        const auto seq = random_sequence(rng, N, k);
        std::vector<double> w(k - 1);
        for (double& v : w) v = U(rng);
        const Hypothesis h{w, U(rng) * 0.5, LossKind::zero_one};
        const double b = 0.2 + 0.05 * (trial % 7);
        const auto target = seq.final_history(d);
        const double got = conditional_risk_estimate(seq, d, KernelSpec::squared_exponential(k * d, b), target, h);
        const double want = oracle::conditional_risk(
            oracle::rows_of(seq), d, b, target, [](const std::vector<double>& u) { return oracle::gaussian(u); },
            [&](const std::vector<double>& z) { return oracle::zero_one(w, h.bias, z); });
        EXPECT_NEAR(got, want, 1e-12);
        EXPECT_GE(got, 0.0);
        EXPECT_LE(got, 1.0);
    }
}

TEST(ConditionalRisk, ScaleCancellation) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(25), l(25);
        for (auto& v : w) v = U(rng);
        for (auto& v : l) v = U(rng);
        const double c = std::exp(U(rng) * 20.0 - 10.0);
        std::vector<double> wc(w);
        for (auto& v : wc) v *= c;
        EXPECT_NEAR(weighted_risk(w, l), weighted_risk(wc, l), 1e-12);
    }
}

TEST(ConditionalRisk, MonotoneInLoss) {
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(20), l(20), lbig(20);
        for (auto& v : w) v = U(rng);
        for (std::size_t i = 0; i < 20; ++i) {
            l[i] = U(rng);
            lbig[i] = std::min(1.0, l[i] + U(rng) * 0.3);
        }
        EXPECT_LE(weighted_risk(w, l), weighted_risk(w, lbig));
    }
}

TEST(EmpiricalMarginalRisk, Basics) {
    // all labels +1, score 1 + sqrt(2): clipped-squared loss (sqrt 2)^2 / 4 = 0.5
    const auto seq = constant_sequence(7, {0.3, 1.0});
    const Hypothesis half{{0.0}, 1.0 + std::sqrt(2.0), LossKind::clipped_squared};
    EXPECT_NEAR(empirical_marginal_risk(seq, half), 0.5, 1e-15);

    const SampleSequence two(2, {0.5, 1.0, 0.5, 0.0});
    const Hypothesis plus{{0.0}, 1.0, LossKind::zero_one};
    EXPECT_DOUBLE_EQ(empirical_marginal_risk(two, plus), 0.5);

    EXPECT_THROW(empirical_marginal_risk(SampleSequence(), plus), argument_error);
}

TEST(EmpiricalMarginalRisk, MatchesNaiveLoop) {
    std::mt19937_64 rng(31);
    const auto seq = random_sequence(rng, 100, 3);
    const Hypothesis h{{0.7, -1.1}, 0.2, LossKind::zero_one};
    double s = 0.0;
    for (const auto& z : oracle::rows_of(seq)) s += oracle::zero_one(h.weights, h.bias, z);
    EXPECT_EQ(empirical_marginal_risk(seq, h), s / 100.0);
}

TEST(Loss, SignConventionAndClipping) {
    const Hypothesis zero{{0.0}, 0.0, LossKind::zero_one};
    const std::vector<double> x{0.4};
    EXPECT_EQ(loss(zero, x, 1), 0.0);   // sign(0) = +1
    EXPECT_EQ(loss(zero, x, -1), 1.0);
    const Hypothesis three{{0.0}, 3.0, LossKind::clipped_squared};
    EXPECT_EQ(loss(three, x, 1), 1.0);  // (3-1)^2/4 = 1
    const Hypothesis right{{2.0}, -0.5, LossKind::zero_one};
    EXPECT_EQ(loss(right, x, 1), 0.0);
}
