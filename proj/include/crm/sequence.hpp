#pragma once

/**
 * @file sequence.hpp
 * @brief Observed sample sequences, linear hypotheses and bounded losses.
 *
 * A sample z lives in [0,1]^k. For labeled data the first k-1 coordinates are
 * the features x and the last coordinate encodes the label y in {-1,+1} as
 * (y+1)/2, i.e. 0 for -1 and 1 for +1, so every coordinate stays in [0,1].
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crm/errors.hpp"

namespace crm {

inline double encode_label(int y) { return y > 0 ? 1.0 : 0.0; }
inline int decode_label(double coord) { return coord >= 0.5 ? 1 : -1; }

/// sign with sign(0) = +1
inline int sign_label(double v) { return v >= 0.0 ? 1 : -1; }

class SampleSequence {
public:
    SampleSequence() = default;

    /// `flat` holds N samples of k coordinates each, oldest first.
    SampleSequence(std::size_t k, std::vector<double> flat, std::vector<int> latent_states = {})
        : k_(k), data_(std::move(flat)), latent_(std::move(latent_states)) {
        if (k_ == 0) throw argument_error("sample dimension k must be >= 1");
        if (data_.size() % k_ != 0)
            throw argument_error("sample buffer size is not a multiple of k");
        for (double v : data_)
            if (!(v >= 0.0 && v <= 1.0))
                throw argument_error("sample coordinate outside [0,1]: " + std::to_string(v));
        if (!latent_.empty() && latent_.size() != size())
            throw argument_error("latent state trace length differs from sequence length");
    }

    std::size_t size() const { return k_ == 0 ? 0 : data_.size() / k_; }
    bool empty() const { return size() == 0; }
    std::size_t dim() const { return k_; }

    std::span<const double> point(std::size_t i) const { return {data_.data() + i * k_, k_}; }
    std::span<const double> features(std::size_t i) const {
        return {data_.data() + i * k_, k_ - 1};
    }
    int label(std::size_t i) const { return decode_label(data_[i * k_ + k_ - 1]); }

    /// Samples [end - d, end) flattened oldest-first.
    std::span<const double> window(std::size_t end, std::size_t d) const {
        return {data_.data() + (end - d) * k_, d * k_};
    }

    const std::vector<double>& flat() const { return data_; }
    const std::vector<int>& latent_states() const { return latent_; }
    bool has_latent() const { return !latent_.empty(); }

    /// Samples [first, last) as a new sequence.
    SampleSequence slice(std::size_t first, std::size_t last) const {
        if (first > last || last > size()) throw argument_error("sequence slice out of range");
        std::vector<double> flat(data_.begin() + static_cast<std::ptrdiff_t>(first * k_),
                                 data_.begin() + static_cast<std::ptrdiff_t>(last * k_));
        std::vector<int> lat;
        if (has_latent())
            lat.assign(latent_.begin() + static_cast<std::ptrdiff_t>(first),
                       latent_.begin() + static_cast<std::ptrdiff_t>(last));
        return SampleSequence(k_, std::move(flat), std::move(lat));
    }

    SampleSequence tail(std::size_t d) const {
        if (d > size()) throw argument_error("tail longer than sequence");
        return slice(size() - d, size());
    }

    /// Target history: the final d samples flattened oldest-first.
    std::vector<double> final_history(std::size_t d) const {
        if (d > size()) throw argument_error("history longer than sequence");
        auto w = window(size(), d);
        return {w.begin(), w.end()};
    }

    friend bool operator==(const SampleSequence&, const SampleSequence&) = default;

private:
    std::size_t k_ = 0;
    std::vector<double> data_;
    std::vector<int> latent_;
};

enum class LossKind { zero_one, clipped_squared };

inline std::string_view to_string(LossKind k) {
    return k == LossKind::zero_one ? "zero-one" : "clipped-squared";
}

inline LossKind parse_loss_kind(std::string_view s) {
    if (s == "zero-one") return LossKind::zero_one;
    if (s == "clipped-squared") return LossKind::clipped_squared;
    throw argument_error("unknown loss kind '" + std::string(s) + "'");
}

/// Affine predictor x -> w.x + bias with a loss bounded in [0,1].
struct Hypothesis {
    std::vector<double> weights;
    double bias = 0.0;
    LossKind loss_kind = LossKind::zero_one;

    double score(std::span<const double> x) const {
        if (x.size() != weights.size())
            throw argument_error("hypothesis expects " + std::to_string(weights.size()) +
                                 " features, got " + std::to_string(x.size()));
        double s = bias;
        for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
        return s;
    }

    int predict(std::span<const double> x) const { return sign_label(score(x)); }

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// zero-one: [sign(w.x+b) != y]; clipped-squared: min(1, (w.x+b-y)^2 / 4).
inline double loss(const Hypothesis& h, std::span<const double> x, int y) {
    const double s = h.score(x);
    switch (h.loss_kind) {
        case LossKind::zero_one:
            return sign_label(s) != y ? 1.0 : 0.0;
        case LossKind::clipped_squared: {
            const double r = s - static_cast<double>(y);
            return std::min(1.0, r * r / 4.0);
        }
    }
    return 1.0;
}

/// Loss on a full sample z = (x, encoded label).
inline double loss(const Hypothesis& h, std::span<const double> z) {
    if (z.empty()) throw argument_error("empty sample");
    return loss(h, z.first(z.size() - 1), decode_label(z.back()));
}

}  // namespace crm
