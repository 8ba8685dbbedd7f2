#pragma once

/**
 * @file bounds.hpp
 * @brief Finite-sample deviation bound for the conditional risk estimator.
 *
 *   P( sup_{h, zbar} |R_hat - R| > t )
 *       <= 32 (sqrt(kd) t3 / 2)^{kd} N1(t2, H, n) exp(-mu t1^2 b^{2d} / (2048 K1^2))
 *        +  4 (sqrt(kd) t3 / 2)^{kd} (mu - 1) beta(2 a d)
 *
 * with t1 = (t D0 - K2 D2 d^2 b^2) / 6, t2 = t1 b^d / (64 K1 L_H),
 * t3 = (3 L / (b^{d+gamma} t1))^{1/gamma}, 4 mu a d <= N and n = N - d.
 *
 * The covering factor overflows doubles quickly, so both terms are formed in
 * log space and exponentiated last; +inf is a legitimate (vacuous) answer.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "crm/errors.hpp"

namespace crm {

/// j -> upper bound on beta(j)
using MixingFunction = std::function<double(double)>;
/// (theta, n) -> upper bound on the empirical L1 covering number N1(theta, H, n)
using CoveringFunction = std::function<double(double, std::size_t)>;

struct BoundParams {
    double t = 0.5;
    std::size_t N = 0;
    std::size_t k = 1;
    std::size_t d = 1;
    double b = 1.0;
    double K1 = 1.0;
    double K2 = 1.0;
    double L = 1.0;
    double gamma = 1.0;
    double D0 = 1.0;
    double D1 = 1.0;
    double D2 = 1.0;
    double L_H = 1.0;
    std::optional<double> L_R;  ///< only meaningful for the consistency statement
    MixingFunction beta = [](double) { return 0.0; };
    CoveringFunction covering = [](double, std::size_t) { return 1.0; };
    std::size_t mu = 1;
    std::size_t a = 1;

    void validate() const {
        if (!(t > 0.0 && t <= 1.0)) throw argument_error("deviation level t must lie in (0, 1]");
        if (N == 0 || k == 0 || d == 0) throw argument_error("N, k and d must be positive");
        for (double v : {b, K1, K2, L, D0, D1, D2, L_H})
            if (!(v > 0.0) || !std::isfinite(v)) throw argument_error("bound constants must be positive");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw argument_error("Hoelder order gamma must lie in (0, 1]");
        if (mu == 0 || a == 0) throw argument_error("block counts mu and a must be positive");
        if (4 * mu * a * d > N)
            throw argument_error("block schedule violates 4*mu*a*d <= N (" + std::to_string(4 * mu * a * d) +
                                 " > " + std::to_string(N) + ")");
        if (!beta || !covering) throw argument_error("beta and covering functions must be supplied");
    }
};

struct Thresholds {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

inline Thresholds derived_thresholds(const BoundParams& p) {
    p.validate();
    const double d = static_cast<double>(p.d);
    const double margin = p.t * p.D0 - p.K2 * p.D2 * d * d * p.b * p.b;
    if (!(margin > 0.0)) throw vacuous_regime(margin);
    Thresholds th;
    th.t1 = margin / 6.0;
    th.t2 = th.t1 * std::pow(p.b, d) / (64.0 * p.K1 * p.L_H);
    th.t3 = std::pow(3.0 * p.L / (std::pow(p.b, d + p.gamma) * th.t1), 1.0 / p.gamma);
    return th;
}

struct BoundTerms {
    Thresholds thresholds;
    double log_covering = 0.0;  ///< log of (sqrt(kd) t3 / 2)^{kd}
    double covering = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double total = 0.0;
};

inline BoundTerms deviation_bound(const BoundParams& p) {
    BoundTerms out;
    out.thresholds = derived_thresholds(p);
    const auto& th = out.thresholds;
    const double kd = static_cast<double>(p.k * p.d);
    const double d = static_cast<double>(p.d);
    const std::size_t n = p.N - p.d;

    out.log_covering = kd * std::log(std::sqrt(kd) * th.t3 / 2.0);
    out.covering = std::exp(out.log_covering);

    const double n1 = p.covering(th.t2, n);
    if (!(n1 > 0.0)) throw numeric_error("covering number must be positive");
    const double exponent = -static_cast<double>(p.mu) * th.t1 * th.t1 * std::pow(p.b, 2.0 * d) /
                            (2048.0 * p.K1 * p.K1);
    out.term1 = std::exp(std::log(32.0) + out.log_covering + std::log(n1) + exponent);

    const double beta = p.beta(2.0 * static_cast<double>(p.a) * d);
    if (!(beta >= 0.0)) throw numeric_error("beta-mixing coefficient must be non-negative");
    const double blocks = static_cast<double>(p.mu) - 1.0;
    if (blocks == 0.0 || beta == 0.0)
        out.term2 = 0.0;
    else
        out.term2 = std::exp(std::log(4.0) + out.log_covering + std::log(blocks) + std::log(beta));

    out.total = out.term1 + out.term2;
    return out;
}

/// (sqrt(kd) / (2 tau))^{kd}, never below one.
inline double hypercube_covering(std::size_t kd, double tau) {
    if (!(tau > 0.0)) throw argument_error("covering radius must be positive");
    if (kd == 0) throw argument_error("dimension must be positive");
    const double D = static_cast<double>(kd);
    const double log_value = D * std::log(std::sqrt(D) / (2.0 * tau));
    return log_value <= 0.0 ? 1.0 : std::exp(log_value);
}

/**
 * Covering bound for affine predictors x -> w.x + bias on x in [0,1]^p with
 * |(w, bias)|_2 <= R. Their outputs lie in [-B, B] with B = R sqrt(p+1) and the
 * class has pseudo-dimension P = p + 1, giving the Sauer-type bound
 *
 *     N1(theta, H, n) <= max(1, (2 e n B / (theta P))^P),
 *
 * and N1 = 1 once B <= theta (the zero function is within theta of everything).
 */
inline double linear_covering_bound(double theta, double weight_radius, std::size_t input_dim,
                                    std::size_t n) {
    if (!(theta > 0.0)) throw argument_error("covering scale theta must be positive");
    if (!(weight_radius >= 0.0)) throw argument_error("weight radius must be non-negative");
    const double P = static_cast<double>(input_dim + 1);
    const double range = weight_radius * std::sqrt(P);
    if (range <= theta || n == 0) return 1.0;
    const double log_value =
        P * std::log(2.0 * std::numbers::e * static_cast<double>(n) * range / (theta * P));
    return log_value <= 0.0 ? 1.0 : std::exp(log_value);
}

struct BlockSchedule {
    std::size_t mu = 1;
    std::size_t a = 1;
    std::size_t leftover = 0;  ///< N - 4 mu a d points not covered by blocks
};

/**
 * Integers mu, a with 4 mu a d <= N. With a target mu, a = floor(N / (4 d mu)).
 * Otherwise mu * a = floor(N / (4d)) is maximized and, among its divisor
 * pairs, the one with mu closest to (mu a)^{2/3} in log scale is taken.
 */
inline BlockSchedule block_schedule(std::size_t N, std::size_t d,
                                    std::optional<std::size_t> target_mu = std::nullopt) {
    if (d == 0) throw argument_error("history length d must be positive");
    if (N < 4 * d) throw argument_error("sequence too short: N < 4d");
    BlockSchedule s;
    if (target_mu) {
        if (*target_mu == 0) throw argument_error("target mu must be positive");
        s.mu = *target_mu;
        s.a = N / (4 * d * s.mu);
        if (s.a == 0) throw argument_error("target mu too large: 4*d*mu > N");
    } else {
        const std::size_t M = N / (4 * d);
        const double ideal = std::log(std::pow(static_cast<double>(M), 2.0 / 3.0));
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t mu = 1; mu <= M; ++mu) {
            if (M % mu != 0) continue;
            const double dist = std::abs(std::log(static_cast<double>(mu)) - ideal);
            if (dist < best) {
                best = dist;
                s.mu = mu;
                s.a = M / mu;
            }
        }
    }
    s.leftover = N - 4 * s.mu * s.a * d;
    return s;
}

struct ScalingRow {
    std::size_t N = 0;
    std::size_t mu = 0;
    std::size_t a = 0;
    double b = 0.0;
    std::optional<BoundTerms> terms;
    std::string error;  ///< set when this row is vacuous or otherwise invalid
};

/**
 * Evaluates the bound along b = N^{-1/(6d)}, 2ad ~ N^{1/3} and
 * mu = floor(N / (4ad)) ~ N^{2/3}/2. Every other field comes from `base`.
 * Rows whose thresholds are vacuous carry an error instead of terms.
 */
inline std::vector<ScalingRow> scaling_check(const std::vector<std::size_t>& n_grid,
                                             const BoundParams& base) {
    std::vector<ScalingRow> rows;
    rows.reserve(n_grid.size());
    const double d = static_cast<double>(base.d);
    for (std::size_t N : n_grid) {
        ScalingRow row;
        row.N = N;
        const double Nd = static_cast<double>(N);
        row.b = std::pow(Nd, -1.0 / (6.0 * d));
        row.a = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::cbrt(Nd) / (2.0 * d))));
        row.mu = N / (4 * row.a * base.d);
        BoundParams p = base;
        p.N = N;
        p.b = row.b;
        p.a = row.a;
        p.mu = row.mu;
        try {
            if (row.mu == 0) throw argument_error("N too small for the block schedule");
            row.terms = deviation_bound(p);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace crm
