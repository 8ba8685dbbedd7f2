#pragma once

/**
 * @file estimator.hpp
 * @brief Kernel-weighted empirical conditional risk.
 *
 * For a sequence z_1..z_N (0-based rows 0..N-1), history length d and target
 * history zbar in [0,1]^{kd}, every row t in {d, ..., N-1} is the successor
 * of the history window rows [t-d, t). Its weight is K((zbar - window)/b),
 * and
 *
 *     q(h) = 1/(n b^d) * sum_t loss(h, z_t) w_t
 *     p    = 1/(n b^d) * sum_t w_t
 *     R(h) = q(h) / p,                       n = N - d.
 *
 * With stratified set weights the 1/b^d factor is dropped; the ratio is
 * unaffected. All sums run sequentially in index order, so results are
 * reproducible bit for bit.
 */

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crm/errors.hpp"
#include "crm/kernels.hpp"
#include "crm/sequence.hpp"

namespace crm {

/// Either a smoothing kernel (with bandwidth) or the stratified set similarity.
using Weighting = std::variant<KernelSpec, StratifiedSetSpec>;

/// Raw history weights for rows d..N-1 of a sequence.
struct WeightVector {
    std::size_t d = 0;
    std::vector<double> raw_weights;

    std::size_t n() const { return raw_weights.size(); }
    /// Row index of the sample that follows history i.
    std::size_t row(std::size_t i) const { return d + i; }

    double total() const {
        double s = 0.0;
        for (double w : raw_weights) s += w;
        return s;
    }
};

namespace detail {

inline LabeledHistory to_labeled(std::span<const double> flat, std::size_t k) {
    LabeledHistory h;
    const std::size_t d = flat.size() / k;
    h.points.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        auto z = flat.subspan(i * k, k);
        h.points.push_back({std::vector<double>(z.begin(), z.end() - 1), decode_label(z.back())});
    }
    return h;
}

inline void check_estimator_inputs(const SampleSequence& seq, std::size_t d,
                                   const Weighting& weighting, std::span<const double> target) {
    const std::size_t k = seq.dim();
    if (d == 0) throw argument_error("history length d must be >= 1");
    if (seq.size() < d + 2)
        throw argument_error("sequence of length " + std::to_string(seq.size()) +
                             " is too short for history length " + std::to_string(d) +
                             " (need N >= d + 2)");
    if (target.size() != k * d)
        throw argument_error("target history has " + std::to_string(target.size()) +
                             " coordinates, expected k*d = " + std::to_string(k * d));
    for (double v : target)
        if (!(v >= 0.0 && v <= 1.0)) throw argument_error("target coordinate outside [0,1]");
    if (const auto* ks = std::get_if<KernelSpec>(&weighting)) {
        if (ks->dim != k * d)
            throw argument_error("kernel dimension " + std::to_string(ks->dim) +
                                 " does not match k*d = " + std::to_string(k * d));
    } else if (k < 2) {
        throw argument_error("stratified set weights need labeled samples (k >= 2)");
    }
}

}  // namespace detail

/// Normalizing factor 1/(n b^d), or 1/n for stratified weights.
inline double estimator_normalization(const Weighting& weighting, std::size_t d, std::size_t n) {
    double scale = static_cast<double>(n);
    if (const auto* ks = std::get_if<KernelSpec>(&weighting))
        scale *= std::pow(ks->bandwidth_b, static_cast<double>(d));
    return 1.0 / scale;
}

inline WeightVector history_weights(const SampleSequence& seq, std::size_t d,
                                    const Weighting& weighting, std::span<const double> target) {
    detail::check_estimator_inputs(seq, d, weighting, target);
    const std::size_t k = seq.dim();
    const std::size_t N = seq.size();

    WeightVector out;
    out.d = d;
    out.raw_weights.reserve(N - d);

    if (const auto* ks = std::get_if<KernelSpec>(&weighting)) {
        std::vector<double> u(k * d);
        for (std::size_t t = d; t < N; ++t) {
            auto hist = seq.window(t, d);
            for (std::size_t j = 0; j < u.size(); ++j)
                u[j] = (target[j] - hist[j]) / ks->bandwidth_b;
            out.raw_weights.push_back(eval_kernel(*ks, u));
        }
    } else {
        const double width = std::get<StratifiedSetSpec>(weighting).base_width;
        const LabeledHistory ref = detail::to_labeled(target, k);
        for (std::size_t t = d; t < N; ++t)
            out.raw_weights.push_back(
                stratified_set_weight(detail::to_labeled(seq.window(t, d), k), ref, width));
    }
    return out;
}

inline double estimate_p(const SampleSequence& seq, std::size_t d, const Weighting& weighting,
                         std::span<const double> target) {
    const WeightVector w = history_weights(seq, d, weighting, target);
    return w.total() * estimator_normalization(weighting, d, w.n());
}

inline double estimate_q(const SampleSequence& seq, std::size_t d, const Weighting& weighting,
                         std::span<const double> target, const Hypothesis& h) {
    const WeightVector w = history_weights(seq, d, weighting, target);
    double s = 0.0;
    for (std::size_t i = 0; i < w.n(); ++i) s += loss(h, seq.point(w.row(i))) * w.raw_weights[i];
    return s * estimator_normalization(weighting, d, w.n());
}

/// sum_i w_i l_i / sum_i w_i; throws no_effective_samples when the weights sum to zero.
inline double weighted_risk(std::span<const double> weights, std::span<const double> losses) {
    if (weights.size() != losses.size()) throw argument_error("weights and losses differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw argument_error("negative sample weight");
        num += losses[i] * weights[i];
        den += weights[i];
    }
    if (!(den > 0.0)) throw no_effective_samples();
    return num / den;
}

/// Weighted mean loss for precomputed weights; any positive rescaling cancels.
inline double risk_from_weights(const SampleSequence& seq, const WeightVector& w,
                                const Hypothesis& h) {
    if (w.d + w.n() != seq.size())
        throw argument_error("weight vector does not match sequence length");
    std::vector<double> losses(w.n());
    for (std::size_t i = 0; i < w.n(); ++i) losses[i] = loss(h, seq.point(w.row(i)));
    return weighted_risk(w.raw_weights, losses);
}

/// q / p; throws no_effective_samples when every weight is zero.
inline double conditional_risk_estimate(const SampleSequence& seq, std::size_t d,
                                        const Weighting& weighting, std::span<const double> target,
                                        const Hypothesis& h) {
    return risk_from_weights(seq, history_weights(seq, d, weighting, target), h);
}

/// (1/N) sum_i loss(h, z_i) over the whole sequence.
inline double empirical_marginal_risk(const SampleSequence& seq, const Hypothesis& h) {
    if (seq.empty()) throw argument_error("empirical risk of an empty sequence");
    double s = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) s += loss(h, seq.point(i));
    return s / static_cast<double>(seq.size());
}

}  // namespace crm
