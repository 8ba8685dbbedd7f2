#pragma once

/**
 * @file kernels.hpp
 * @brief Smoothing kernels, a numerical check of their defining axioms, and
 *        the stratified set similarity for labeled histories.
 *
 * A smoothing kernel K on R^dim must
 *   1. integrate to one,
 *   2. be bounded by K1,
 *   3. have zero first moments and second moments bounded by K2,
 *   4. be Hoelder continuous of order gamma with constant L.
 *
 * Both built-in families carry analytic constants. verify_kernel_axioms()
 * recomputes every quantity by tensor-grid midpoint quadrature and random
 * pair sampling so the constants can be checked rather than trusted.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crm/detail/random.hpp"
#include "crm/errors.hpp"

namespace crm {

enum class KernelFamily { squared_exponential, epanechnikov };

inline std::string_view to_string(KernelFamily f) {
    return f == KernelFamily::squared_exponential ? "sqexp" : "epanechnikov";
}

/// Kernel constants (K1, K2, L, gamma) from the smoothing-kernel definition.
struct KernelConstants {
    double K1 = 1.0;
    double K2 = 1.0;
    double lipschitz_L = 1.0;
    double lipschitz_gamma = 1.0;
};

/**
 * A smoothing kernel on R^dim together with its bandwidth.
 *
 * `width` is the family's own scale: the standard deviation of the Gaussian
 * for squared-exponential, the half-support for product-Epanechnikov. The
 * bandwidth b is applied by callers, who evaluate K((target - x) / b).
 */
struct KernelSpec {
    std::size_t dim = 1;
    double bandwidth_b = 1.0;
    KernelFamily family = KernelFamily::squared_exponential;
    double width = 1.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double lipschitz_L = 0.0;
    double lipschitz_gamma = 1.0;

    KernelConstants constants() const { return {K1, K2, lipschitz_L, lipschitz_gamma}; }

    static KernelSpec make(KernelFamily family, std::size_t dim, double bandwidth,
                           double width = 1.0) {
        if (dim == 0) throw argument_error("kernel dimension must be >= 1");
        if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
            throw argument_error("kernel bandwidth must be positive and finite");
        if (!(width > 0.0) || !std::isfinite(width))
            throw argument_error("kernel width must be positive and finite");

        KernelSpec s;
        s.dim = dim;
        s.bandwidth_b = bandwidth;
        s.family = family;
        s.width = width;
        s.lipschitz_gamma = 1.0;
        const double D = static_cast<double>(dim);
        switch (family) {
            case KernelFamily::squared_exponential:
                s.K1 = std::pow(2.0 * std::numbers::pi * width * width, -0.5 * D);
                s.K2 = width * width;
                // max |grad K| is attained at radius == width
                s.lipschitz_L = s.K1 * std::exp(-0.5) / width;
                break;
            case KernelFamily::epanechnikov:
                s.K1 = std::pow(0.75 / width, D);
                s.K2 = width * width / 5.0;
                // |grad K|^2 <= (2 K1 / h)^2 * sum_i s_i^2 prod_{j != i} (1 - s_j^2)^2 and the sum is
                // at most P(exactly one of independent events with probs s_i^2), hence <= 1.
                s.lipschitz_L = 2.0 * s.K1 / width;
                break;
        }
        return s;
    }

    static KernelSpec squared_exponential(std::size_t dim, double bandwidth, double width = 1.0) {
        return make(KernelFamily::squared_exponential, dim, bandwidth, width);
    }
    static KernelSpec epanechnikov(std::size_t dim, double bandwidth, double width = 1.0) {
        return make(KernelFamily::epanechnikov, dim, bandwidth, width);
    }
};

/// K(u) for an already bandwidth-scaled argument u.
inline double eval_kernel(const KernelSpec& spec, std::span<const double> u) {
    if (u.size() != spec.dim)
        throw argument_error("kernel argument has length " + std::to_string(u.size()) +
                             ", expected " + std::to_string(spec.dim));
    switch (spec.family) {
        case KernelFamily::squared_exponential: {
            double r2 = 0.0;
            for (double v : u) r2 += v * v;
            return spec.K1 * std::exp(-0.5 * r2 / (spec.width * spec.width));
        }
        case KernelFamily::epanechnikov: {
            double value = 1.0;
            for (double v : u) {
                const double s = v / spec.width;
                if (!(std::abs(s) < 1.0)) return 0.0;
                value *= 0.75 * (1.0 - s * s) / spec.width;
            }
            return value;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Axiom verification
// ---------------------------------------------------------------------------

struct QuadratureConfig {
    double radius = 8.0;          ///< grid covers [-radius, radius]^dim
    std::size_t resolution = 256; ///< midpoints per axis
    std::size_t holder_pairs = 10000;
    std::uint64_t seed = 1;
    double normalization_tol = 1e-3;
    double first_moment_tol = 1e-6;
    double relative_slack = 1e-9; ///< slack on the K1, K2, L upper bounds
};

struct AxiomReport {
    double integral = 0.0;
    double max_value = 0.0;
    std::vector<double> first_moments;
    double max_abs_first_moment = 0.0;
    double max_second_moment = 0.0;
    double holder_ratio = 0.0;

    bool normalized = false;
    bool bounded = false;
    bool centered = false;
    bool second_moment_ok = false;
    bool holder_ok = false;

    bool all_pass() const {
        return normalized && bounded && centered && second_moment_ok && holder_ok;
    }
};

/**
 * Checks the four smoothing-kernel axioms for an arbitrary callable
 * `double(std::span<const double>)` against claimed constants.
 *
 * Integrals use a midpoint tensor grid over [-R, R]^dim, so mass outside the
 * box is ignored. The Hoelder ratio is the maximum of |K(u)-K(v)| / |u-v|^gamma
 * over random pairs with separations spread log-uniformly over five decades.
 */
template <class Kernel>
AxiomReport verify_kernel_axioms(const Kernel& kernel, std::size_t dim,
                                 const KernelConstants& claimed, const QuadratureConfig& q) {
    if (dim == 0) throw argument_error("kernel dimension must be >= 1");
    if (dim > 4) throw argument_error("axiom quadrature supports dim <= 4");
    if (!(q.radius > 0.0) || q.resolution == 0)
        throw argument_error("quadrature needs a positive radius and resolution");

    const double h = 2.0 * q.radius / static_cast<double>(q.resolution);
    const double cell = std::pow(h, static_cast<double>(dim));

    std::size_t total = 1;
    for (std::size_t i = 0; i < dim; ++i) total *= q.resolution;

    AxiomReport rep;
    rep.first_moments.assign(dim, 0.0);
    std::vector<double> second(dim * dim, 0.0);
    std::array<std::size_t, 4> idx{};
    std::vector<double> u(dim);

    for (std::size_t n = 0; n < total; ++n) {
        for (std::size_t i = 0; i < dim; ++i)
            u[i] = -q.radius + (static_cast<double>(idx[i]) + 0.5) * h;
        const double k = kernel(std::span<const double>(u));
        if (!std::isfinite(k)) throw numeric_error("kernel integrand is not finite");
        rep.integral += k;
        rep.max_value = std::max(rep.max_value, std::abs(k));
        for (std::size_t i = 0; i < dim; ++i) {
            rep.first_moments[i] += u[i] * k;
            for (std::size_t j = i; j < dim; ++j) second[i * dim + j] += u[i] * u[j] * k;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if (++idx[i] < q.resolution) break;
            idx[i] = 0;
        }
    }
    rep.integral *= cell;
    for (std::size_t i = 0; i < dim; ++i) {
        rep.first_moments[i] *= cell;
        rep.max_abs_first_moment = std::max(rep.max_abs_first_moment, std::abs(rep.first_moments[i]));
        for (std::size_t j = i; j < dim; ++j)
            rep.max_second_moment = std::max(rep.max_second_moment, second[i * dim + j] * cell);
    }

    detail::Rng rng(q.seed);
    std::vector<double> v(dim), dir(dim);
    const double log_hi = std::log(q.radius);
    const double log_lo = log_hi - 5.0 * std::numbers::ln10;
    for (std::size_t p = 0; p < q.holder_pairs; ++p) {
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            u[i] = rng.uniform(-q.radius, q.radius);
            dir[i] = rng.uniform(-1.0, 1.0);
            norm += dir[i] * dir[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double step = std::exp(rng.uniform(log_lo, log_hi));
        double dist2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] = u[i] + step * dir[i] / norm;
            dist2 += (v[i] - u[i]) * (v[i] - u[i]);
        }
        const double ku = kernel(std::span<const double>(u));
        const double kv = kernel(std::span<const double>(v));
        if (!std::isfinite(ku) || !std::isfinite(kv))
            throw numeric_error("kernel value is not finite");
        rep.max_value = std::max({rep.max_value, std::abs(ku), std::abs(kv)});
        const double ratio =
            std::abs(ku - kv) / std::pow(std::sqrt(dist2), claimed.lipschitz_gamma);
        rep.holder_ratio = std::max(rep.holder_ratio, ratio);
    }

    const double slack = 1.0 + q.relative_slack;
    rep.normalized = std::abs(rep.integral - 1.0) <= q.normalization_tol;
    rep.bounded = rep.max_value <= claimed.K1 * slack;
    rep.centered = rep.max_abs_first_moment <= q.first_moment_tol;
    rep.second_moment_ok = rep.max_second_moment <= claimed.K2 * slack + q.normalization_tol * claimed.K2;
    rep.holder_ok = rep.holder_ratio <= claimed.lipschitz_L * slack;
    return rep;
}

inline AxiomReport verify_kernel_axioms(const KernelSpec& spec, const QuadratureConfig& q) {
    return verify_kernel_axioms(
        [&spec](std::span<const double> u) { return eval_kernel(spec, u); }, spec.dim,
        spec.constants(), q);
}

// ---------------------------------------------------------------------------
// Stratified set similarity
// ---------------------------------------------------------------------------

struct LabeledPoint {
    std::vector<double> x;
    int y = 1;
};

/// A window of d labeled observations; labels must be -1 or +1.
struct LabeledHistory {
    std::vector<LabeledPoint> points;
};

/// Width of the unnormalized Gaussian base kernel exp(-|x - x'|^2 / w^2).
struct StratifiedSetSpec {
    double base_width = 1.0;
};

inline double stratified_base_kernel(std::span<const double> a, std::span<const double> b,
                                     double width) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        r2 += diff * diff;
    }
    return std::exp(-r2 / (width * width));
}

/**
 * Similarity of two labeled histories: the base kernel averaged over all
 * cross pairs within the positive stratum and within the negative stratum,
 * each average weighted one half. A stratum that is empty in either history
 * contributes zero. Result lies in [0, 1] and is exactly symmetric.
 */
inline double stratified_set_weight(const LabeledHistory& s, const LabeledHistory& t,
                                    double base_width) {
    if (!(base_width > 0.0)) throw argument_error("stratified base width must be positive");
    if (s.points.size() != t.points.size())
        throw argument_error("stratified set histories must have equal length");
    for (const auto* h : {&s, &t})
        for (const auto& p : h->points) {
            if (p.y != 1 && p.y != -1) throw argument_error("history labels must be -1 or +1");
            if (p.x.size() != s.points.front().x.size())
                throw argument_error("history points have mismatched dimension");
        }

    double weight = 0.0;
    std::vector<double> terms;
    for (int label : {1, -1}) {
        terms.clear();
        std::size_t ns = 0, nt = 0;
        for (const auto& p : s.points) ns += (p.y == label);
        for (const auto& p : t.points) nt += (p.y == label);
        if (ns == 0 || nt == 0) continue;
        for (const auto& p : s.points) {
            if (p.y != label) continue;
            for (const auto& r : t.points)
                if (r.y == label) terms.push_back(stratified_base_kernel(p.x, r.x, base_width));
        }
        // Summing in sorted order makes the result independent of argument order.
        std::sort(terms.begin(), terms.end());
        double sum = 0.0;
        for (double v : terms) sum += v;
        weight += sum / (2.0 * static_cast<double>(ns * nt));
    }
    return weight;
}

}  // namespace crm
