#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "crm/learners.hpp"
#include "crm/processes.hpp"
#include "oracles.hpp"

using namespace crm;

namespace {

SampleSequence labeled(std::vector<std::pair<std::vector<double>, int>> pts) {
    std::vector<double> flat;
    const std::size_t k = pts.front().first.size() + 1;
    for (auto& [x, y] : pts) {
        flat.insert(flat.end(), x.begin(), x.end());
        flat.push_back(encode_label(y));
    }
    return SampleSequence(k, flat);
}

}  // namespace

TEST(FitWeighted, HandComputedTwoPointInterpolation) {
    // weighted points (0.5, +1) and (0.2, -1); the third point has weight zero
    const auto seq = labeled({{{0.5}, 1}, {{0.2}, -1}, {{0.9}, -1}});
    const std::vector<double> w{1.0, 2.0, 0.0};
    const auto h = fit_weighted(seq, 0, w, 0.0);
    ASSERT_EQ(h.weights.size(), 1u);
    EXPECT_NEAR(h.weights[0], 20.0 / 3.0, 1e-12);
    EXPECT_NEAR(h.bias, -7.0 / 3.0, 1e-12);
}

TEST(FitWeighted, MatchesGaussianEliminationReference) {
    const auto seq = simulate(random_chain(3), 200, 3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> w(200);
    for (auto& v : w) v = U(rng);
    const auto h = fit_weighted(seq, 0, w, 1e-3);
    double mean = 0.0;
    for (double v : w) mean += v / 200.0;
    std::vector<double> wn(w);
    for (auto& v : wn) v /= mean;
    const auto ref = oracle::wls(oracle::rows_of(seq), wn, 1e-3);
    EXPECT_NEAR(h.weights[0], ref[0], 1e-10);
    EXPECT_NEAR(h.weights[1], ref[1], 1e-10);
    EXPECT_NEAR(h.bias, ref[2], 1e-10);
}

TEST(FitWeighted, InvariantToWeightScale) {
    const auto seq = simulate(random_chain(4), 150, 4);
    std::vector<double> w(150), w2(150);
    for (std::size_t i = 0; i < 150; ++i) {
        w[i] = 0.1 + std::sin(static_cast<double>(i)) * 0.05;
        w2[i] = w[i] * 1e6;
    }
    const auto a = fit_weighted(seq, 0, w, 1e-8);
    const auto b = fit_weighted(seq, 0, w2, 1e-8);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a.weights[j], b.weights[j], 1e-9);
    EXPECT_NEAR(a.bias, b.bias, 1e-9);
}

TEST(FitWeighted, IsALocalMinimumOfTheObjective) {
    const auto seq = simulate(random_chain(5), 300, 5);
    std::vector<double> w(300);
    for (std::size_t i = 0; i < 300; ++i) w[i] = 1.0 + static_cast<double>(i % 7);
    const double ridge = 1e-2;
    const auto h = fit_weighted(seq, 0, w, ridge);
    const double best = weighted_objective(seq, 0, w, ridge, h);
    for (std::size_t j = 0; j < 3; ++j) {
        for (double step : {1e-4, -1e-4}) {
            Hypothesis g = h;
            if (j < 2) g.weights[j] += step;
            else g.bias += step;
            EXPECT_GE(weighted_objective(seq, 0, w, ridge, g), best);
        }
    }
}

TEST(FitWeighted, Errors) {
    const auto seq = labeled({{{0.5}, 1}, {{0.5}, -1}, {{0.5}, 1}});
    const std::vector<double> ones(3, 1.0), zeros(3, 0.0), neg{1.0, -1.0, 1.0};
    EXPECT_THROW(fit_weighted(seq, 0, ones, 0.0), degenerate_design);
    EXPECT_NO_THROW(fit_weighted(seq, 0, ones, 1e-6));
    EXPECT_THROW(fit_weighted(seq, 0, zeros, 1e-6), no_effective_samples);
    EXPECT_THROW(fit_weighted(seq, 0, neg, 1e-6), argument_error);
    EXPECT_THROW(fit_weighted(seq, 1, ones, 1e-6), argument_error);
    EXPECT_THROW(fit_weighted(seq, 0, ones, -1.0), argument_error);
    EXPECT_THROW(fit_weighted(SampleSequence(1, {0.2, 0.4}), 0, std::vector<double>{1.0, 1.0}, 0.0), argument_error);
}

TEST(EcrmFit, UniformWeightsEqualErmOnTheSuffix) {
    const auto seq = simulate(random_chain(6), 400, 6);
    const std::size_t d = 3;
    // all-ones weights over rows d..N-1
    const std::vector<double> ones(seq.size() - d, 1.0);
    const auto a = fit_weighted(seq, d, ones, 1e-8);
    const auto b = erm_fit(seq.slice(d, seq.size()), 1e-8);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a.weights[j], b.weights[j], 1e-12);
    EXPECT_NEAR(a.bias, b.bias, 1e-12);

    // a very wide kernel is numerically uniform
    TrainConfig cfg{d, KernelSpec::squared_exponential(3 * d, 1e4), 1e-8, Fallback::error};
    const auto c = ecrm_fit(seq, seq.final_history(d), cfg);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(c.weights[j], b.weights[j], 1e-6);
    EXPECT_NEAR(c.bias, b.bias, 1e-6);
}

TEST(EcrmFit, FallbackPolicy) {
    std::vector<double> flat;
    for (int i = 0; i < 30; ++i) {
        flat.push_back(0.05 + 0.01 * (i % 5));
        flat.push_back(i % 2 ? 1.0 : 0.0);
    }
    const SampleSequence seq(2, flat);
    const std::vector<double> far{0.95, 1.0};
    TrainConfig cfg{1, KernelSpec::epanechnikov(2, 0.05), 1e-8, Fallback::error};
    EXPECT_THROW(ecrm_fit(seq, far, cfg), no_effective_samples);
    cfg.fallback = Fallback::uniform_weights;
    const auto h = ecrm_fit(seq, far, cfg);
    const auto ref = fit_weighted(seq, 1, std::vector<double>(29, 1.0), 1e-8);
    EXPECT_EQ(h, ref);
}

TEST(EcrmFit, LearnsTheActiveStateOfASeparableChain) {
    // two states with opposite labels, sticky transitions; the final history pins the state
    HiddenMarkovSpec s;
    s.transition.resize(2, 2);
    s.transition << 0.95, 0.05, 0.05, 0.95;
    s.affine_labels = {AffineLabel{{1.0, 0.0}, -5.0}, AffineLabel{{-1.0, 0.0}, 5.0}};
    s.initial_distribution = {0.5, 0.5};
    const auto seq = simulate(s, 2000, 21);
    TrainConfig cfg{2, StratifiedSetSpec{0.1}, 1e-8, Fallback::error};
    const auto h = ecrm_fit(seq, seq.final_history(2), cfg);
    const auto post = forward_posterior(s, seq);
    EXPECT_LT(conditional_risk_oracle(s, post, h), 0.1);
    EXPECT_LT(conditional_risk_oracle(s, post, h), conditional_risk_oracle(s, post, erm_fit(seq)));
}

TEST(SlidingWindow, MatchesReferenceOnFinalRows) {
    const auto seq = simulate(random_chain(7), 100, 7);
    for (std::size_t d : {5u, 12u, 40u}) {
        const auto h = sliding_window_fit(seq, d, 1e-8);
        const auto rows = oracle::rows_of(seq.tail(d));
        const auto ref = oracle::wls(rows, std::vector<double>(d, 1.0), 1e-8);
        EXPECT_NEAR(h.weights[0], ref[0], 1e-8);
        EXPECT_NEAR(h.weights[1], ref[1], 1e-8);
        EXPECT_NEAR(h.bias, ref[2], 1e-8);
    }
    EXPECT_THROW(sliding_window_fit(seq, 1), argument_error);
    EXPECT_THROW(sliding_window_fit(seq, 101), argument_error);
}

TEST(ErmFit, OrdinaryLeastSquares) {
    const auto seq = simulate(random_chain(8), 500, 8);
    const auto h = erm_fit(seq, 0.0);
    const auto ref = oracle::wls(oracle::rows_of(seq), std::vector<double>(500, 1.0), 0.0);
    EXPECT_NEAR(h.weights[0], ref[0], 1e-10);
    EXPECT_NEAR(h.weights[1], ref[1], 1e-10);
    EXPECT_NEAR(h.bias, ref[2], 1e-10);
    EXPECT_THROW(erm_fit(seq.slice(0, 1)), argument_error);
}
