#pragma once

/**
 * @file learners.hpp
 * @brief Linear predictors fit by (weighted) least squares on labels in {-1,+1}.
 *
 * ECRM weights every successor sample by the similarity of its history to the
 * target history and solves
 *
 *     min_{w, bias}  sum_t  w_t (w . x_t + bias - y_t)^2  +  ridge |w|^2
 *
 * through the normal equations. Sample weights are divided by their mean
 * first, so a uniform weighting is numerically the unweighted problem and any
 * common positive rescaling leaves the fit unchanged. The bias is never
 * penalized.
 */

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crm/errors.hpp"
#include "crm/estimator.hpp"
#include "crm/sequence.hpp"

namespace crm {

enum class Fallback { error, uniform_weights };

inline Fallback parse_fallback(std::string_view s) {
    if (s == "error") return Fallback::error;
    if (s == "uniform-weights") return Fallback::uniform_weights;
    throw argument_error("unknown fallback policy '" + std::string(s) + "'");
}

struct TrainConfig {
    std::size_t d = 1;
    Weighting kernel = StratifiedSetSpec{};
    double ridge = 1e-8;
    Fallback fallback = Fallback::error;
};

/// Weighted least squares on rows [first_row, first_row + weights.size()).
inline Hypothesis fit_weighted(const SampleSequence& seq, std::size_t first_row,
                               std::span<const double> weights, double ridge) {
    if (seq.dim() < 2) throw argument_error("least squares fit needs labeled samples (k >= 2)");
    if (!(ridge >= 0.0)) throw argument_error("ridge must be non-negative");
    if (first_row + weights.size() > seq.size()) throw argument_error("fit rows out of range");

    double mass = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw argument_error("sample weights must be finite and >= 0");
        mass += w;
    }
    if (!(mass > 0.0)) throw no_effective_samples();
    const double mean = mass / static_cast<double>(weights.size());

    const auto p = static_cast<Eigen::Index>(seq.dim() - 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + 1, p + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd phi(p + 1);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i] / mean;
        if (w == 0.0) continue;
        auto x = seq.features(first_row + i);
        for (Eigen::Index j = 0; j < p; ++j) phi(j) = x[static_cast<std::size_t>(j)];
        phi(p) = 1.0;
        A.selfadjointView<Eigen::Lower>().rankUpdate(phi, w);
        rhs += w * static_cast<double>(seq.label(first_row + i)) * phi;
    }
    A = Eigen::MatrixXd(A.selfadjointView<Eigen::Lower>());
    for (Eigen::Index j = 0; j < p; ++j) A(j, j) += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd D = ldlt.vectorD();
    const bool singular = D.minCoeff() <= 1e-12 * D.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || (ridge == 0.0 && singular))
        throw degenerate_design("normal equations are singular (degenerate design)");
    const Eigen::VectorXd beta = ldlt.solve(rhs);
    if (!beta.allFinite()) throw degenerate_design("least squares solution is not finite");

    Hypothesis h;
    h.weights.assign(beta.data(), beta.data() + p);
    h.bias = beta(p);
    h.loss_kind = LossKind::zero_one;
    return h;
}

/// Value of the weighted squared objective (used for optimality checks).
inline double weighted_objective(const SampleSequence& seq, std::size_t first_row,
                                 std::span<const double> weights, double ridge, const Hypothesis& h) {
    double mass = 0.0;
    for (double w : weights) mass += w;
    const double mean = mass / static_cast<double>(weights.size());
    double obj = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double r = h.score(seq.features(first_row + i)) - seq.label(first_row + i);
        obj += weights[i] / mean * r * r;
    }
    for (double w : h.weights) obj += ridge * w * w;
    return obj;
}

/// Kernel-weighted least squares toward the target history.
inline Hypothesis ecrm_fit(const SampleSequence& seq, std::span<const double> target,
                           const TrainConfig& cfg) {
    WeightVector w = history_weights(seq, cfg.d, cfg.kernel, target);
    if (!(w.total() > 0.0)) {
        if (cfg.fallback == Fallback::error) throw no_effective_samples();
        w.raw_weights.assign(w.n(), 1.0);
    }
    return fit_weighted(seq, w.d, w.raw_weights, cfg.ridge);
}

/// Ordinary least squares over every sample.
inline Hypothesis erm_fit(const SampleSequence& seq, double ridge = 1e-8) {
    if (seq.size() < 2) throw argument_error("ERM needs at least 2 samples");
    const std::vector<double> ones(seq.size(), 1.0);
    return fit_weighted(seq, 0, ones, ridge);
}

/// Ordinary least squares on the final d samples only.
inline Hypothesis sliding_window_fit(const SampleSequence& seq, std::size_t d, double ridge = 1e-8) {
    if (d < 2) throw argument_error("sliding window needs at least 2 samples (d >= 2)");
    if (d > seq.size()) throw argument_error("sliding window longer than the sequence");
    const std::vector<double> ones(d, 1.0);
    return fit_weighted(seq, seq.size() - d, ones, ridge);
}

}  // namespace crm
