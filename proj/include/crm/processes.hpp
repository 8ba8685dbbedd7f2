#pragma once

/**
 * @file processes.hpp
 * @brief Hidden-Markov data generator with exact conditional oracles.
 *
 * Each latent state i emits x uniformly from an axis-aligned box and the
 * deterministic label y = sign(a_i . x + c_i), sign(0) = +1. Observations
 * are stored rescaled: x maps affinely from the box onto [0,1]^2 and y is
 * encoded as described in sequence.hpp, giving k = 3.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "crm/detail/random.hpp"
#include "crm/errors.hpp"
#include "crm/sequence.hpp"

namespace crm {

struct AffineLabel {
    std::array<double, 2> a{1.0, 0.0};
    double c = 0.0;

    double operator()(double x1, double x2) const { return a[0] * x1 + a[1] * x2 + c; }
};

struct EmissionBox {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{10.0, 10.0};

    double area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }
    double to_box(std::size_t axis, double unit) const { return lo[axis] + unit * (hi[axis] - lo[axis]); }
    double to_unit(std::size_t axis, double v) const { return (v - lo[axis]) / (hi[axis] - lo[axis]); }
};

struct HiddenMarkovSpec {
    Eigen::MatrixXd transition;  ///< row-stochastic, m x m
    std::vector<AffineLabel> affine_labels;
    EmissionBox emission_box;
    std::vector<double> initial_distribution;

    std::size_t num_states() const { return affine_labels.size(); }

    /// Throws argument_error unless every invariant holds.
    void validate() const {
        const auto m = static_cast<Eigen::Index>(num_states());
        if (m == 0) throw argument_error("hidden Markov spec needs at least one state");
        if (transition.rows() != m || transition.cols() != m)
            throw argument_error("transition matrix must be m x m");
        for (Eigen::Index i = 0; i < m; ++i) {
            if ((transition.row(i).array() < 0.0).any() || !transition.row(i).allFinite())
                throw argument_error("transition entries must be finite and non-negative");
            if (std::abs(transition.row(i).sum() - 1.0) > 1e-12)
                throw argument_error("transition row " + std::to_string(i) + " does not sum to 1");
        }
        if (initial_distribution.size() != num_states())
            throw argument_error("initial distribution length differs from number of states");
        double s = 0.0;
        for (double p : initial_distribution) {
            if (!(p >= 0.0)) throw argument_error("initial distribution entries must be >= 0");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw argument_error("initial distribution does not sum to 1");
        for (std::size_t a = 0; a < 2; ++a)
            if (!(emission_box.hi[a] > emission_box.lo[a]))
                throw argument_error("emission box is degenerate");
    }

    int label(std::size_t state, double x1_box, double x2_box) const {
        return sign_label(affine_labels[state](x1_box, x2_box));
    }
};

/// Probability vector over latent states.
struct StatePosterior {
    std::vector<double> probs;
};

// ---------------------------------------------------------------------------

inline SampleSequence simulate(const HiddenMarkovSpec& spec, std::size_t N, std::uint64_t seed) {
    spec.validate();
    if (N == 0) throw argument_error("simulation length must be >= 1");
    detail::Rng rng(seed);
    const std::size_t m = spec.num_states();
    std::vector<std::vector<double>> rows(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            rows[i].push_back(spec.transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));

    std::vector<double> flat;
    flat.reserve(3 * N);
    std::vector<int> states;
    states.reserve(N);
    std::size_t s = rng.categorical(spec.initial_distribution);
    for (std::size_t t = 0; t < N; ++t) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const int y = spec.label(s, spec.emission_box.to_box(0, u1), spec.emission_box.to_box(1, u2));
        flat.push_back(u1);
        flat.push_back(u2);
        flat.push_back(encode_label(y));
        states.push_back(static_cast<int>(s));
        s = rng.categorical(rows[s]);
    }
    return SampleSequence(3, std::move(flat), std::move(states));
}

/// Left eigenvector of the transition matrix for eigenvalue 1, normalized.
inline std::vector<double> stationary_distribution(const HiddenMarkovSpec& spec) {
    const auto m = spec.transition.rows();
    // Solve pi (P - I) = 0 with sum(pi) = 1 as a least squares system.
    Eigen::MatrixXd A(m + 1, m);
    A.topRows(m) = (spec.transition - Eigen::MatrixXd::Identity(m, m)).transpose();
    A.row(m).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = 1.0;
    Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(static_cast<std::size_t>(m));
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += (out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i)));
    for (double& p : out) p /= s;
    return out;
}

/// Emission likelihood of an encoded, rescaled observation under `state`.
inline double emission_likelihood(const HiddenMarkovSpec& spec, std::size_t state,
                                  std::span<const double> z) {
    if (z.size() != 3) throw argument_error("hidden Markov observations have k = 3");
    if (!(z[0] >= 0.0 && z[0] <= 1.0 && z[1] >= 0.0 && z[1] <= 1.0)) return 0.0;
    const int y = spec.label(state, spec.emission_box.to_box(0, z[0]), spec.emission_box.to_box(1, z[1]));
    return y == decode_label(z[2]) ? 1.0 / spec.emission_box.area() : 0.0;
}

/**
 * Forward recursion over `observed`, returning the distribution of the latent
 * state one step after the last observation. `prior` is the distribution of
 * the state at the first observed step: the initial distribution when
 * `observed` starts at time 1, the stationary distribution for a trailing
 * window of a stationary chain.
 */
inline StatePosterior forward_posterior(const HiddenMarkovSpec& spec, const SampleSequence& observed,
                                        std::optional<std::vector<double>> prior = std::nullopt) {
    spec.validate();
    const std::size_t m = spec.num_states();
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(m));
    const std::vector<double>& start = prior ? *prior : spec.initial_distribution;
    if (start.size() != m) throw argument_error("prior length differs from number of states");
    for (std::size_t i = 0; i < m; ++i) alpha(static_cast<Eigen::Index>(i)) = start[i];

    for (std::size_t t = 0; t < observed.size(); ++t) {
        if (t > 0) alpha = (alpha.transpose() * spec.transition).transpose();
        for (std::size_t i = 0; i < m; ++i)
            alpha(static_cast<Eigen::Index>(i)) *= emission_likelihood(spec, i, observed.point(t));
        const double total = alpha.sum();
        if (!(total > 0.0))
            throw inconsistent_observation("observation " + std::to_string(t) +
                                           " has zero likelihood under every latent state");
        alpha /= total;
    }
    Eigen::VectorXd next = observed.empty() ? alpha : Eigen::VectorXd((alpha.transpose() * spec.transition).transpose());
    StatePosterior out;
    out.probs.assign(next.data(), next.data() + next.size());
    double s = 0.0;
    for (double p : out.probs) s += p;
    for (double& p : out.probs) p /= s;
    return out;
}

/// Expected loss of h under state `state`, by midpoint quadrature on a res x res grid.
inline double per_state_risk(const HiddenMarkovSpec& spec, std::size_t state, const Hypothesis& h,
                             std::size_t resolution = 512) {
    if (resolution == 0) throw argument_error("oracle resolution must be >= 1");
    if (h.weights.size() != 2) throw argument_error("hypothesis must act on 2 features");
    const double step = 1.0 / static_cast<double>(resolution);
    double total = 0.0;
    std::array<double, 2> x{};
    for (std::size_t i = 0; i < resolution; ++i) {
        x[0] = (static_cast<double>(i) + 0.5) * step;
        const double b1 = spec.emission_box.to_box(0, x[0]);
        double row = 0.0;
        for (std::size_t j = 0; j < resolution; ++j) {
            x[1] = (static_cast<double>(j) + 0.5) * step;
            const int y = spec.label(state, b1, spec.emission_box.to_box(1, x[1]));
            row += loss(h, x, y);
        }
        total += row;
    }
    return total * step * step;
}

/// sum_i posterior(i) * E_x[loss(h, (x, sign f_i(x)))]
inline double conditional_risk_oracle(const HiddenMarkovSpec& spec, const StatePosterior& posterior,
                                      const Hypothesis& h, std::size_t resolution = 512) {
    if (posterior.probs.size() != spec.num_states())
        throw argument_error("posterior length differs from number of states");
    double r = 0.0;
    for (std::size_t i = 0; i < posterior.probs.size(); ++i)
        if (posterior.probs[i] > 0.0) r += posterior.probs[i] * per_state_risk(spec, i, h, resolution);
    return std::clamp(r, 0.0, 1.0);
}

/**
 * Random 4-state chain: Dirichlet(1) transition rows with 0.2 extra mass on
 * the self-loop before renormalizing, labels from uniformly oriented lines
 * through a uniform point of the [0,10]^2 box, and the stationary
 * distribution as the initial distribution.
 */
inline HiddenMarkovSpec random_chain(std::uint64_t seed) {
    constexpr std::size_t m = 4;
    detail::Rng rng(seed ^ 0x5eed'c4a1'0000'0000ULL);
    HiddenMarkovSpec spec;
    spec.transition.resize(m, m);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j)
            s += (spec.transition(i, j) = rng.exponential());
        spec.transition.row(i) /= s;
        spec.transition(i, i) += 0.2;
        spec.transition.row(i) /= spec.transition.row(i).sum();
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double px = rng.uniform(spec.emission_box.lo[0], spec.emission_box.hi[0]);
        const double py = rng.uniform(spec.emission_box.lo[1], spec.emission_box.hi[1]);
        AffineLabel f;
        f.a = {std::cos(angle), std::sin(angle)};
        f.c = -(f.a[0] * px + f.a[1] * py);
        spec.affine_labels.push_back(f);
    }
    spec.initial_distribution.assign(m, 1.0 / m);
    spec.initial_distribution = stationary_distribution(spec);
    return spec;
}

namespace detail {

inline Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& P) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(P, false);
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(),
              [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
    return ev;
}

}  // namespace detail

/// Second-largest eigenvalue modulus of the transition matrix.
inline double second_eigenvalue_modulus(const Eigen::MatrixXd& P) {
    if (P.rows() < 2) return 0.0;
    return std::abs(detail::sorted_eigenvalues(P)(1));
}

/**
 * Upper bound C * lambda^j on the beta-mixing coefficient of the stationary
 * latent chain, which dominates that of the observations because they are
 * conditionally independent given the states.
 *
 * With P = V diag(lambda_k) V^{-1}, P^j(s,.) - pi = sum_{k>=2} lambda_k^j V(s,k) V^{-1}(k,.),
 * hence TV(P^j(s,.), pi) <= lambda^j * C with
 * C = max_s 1/2 sum_t sum_{k>=2} |V(s,k)| |V^{-1}(k,t)|. The result is clamped to [0,1].
 */
inline double beta_mixing_bound(const HiddenMarkovSpec& spec, std::size_t j) {
    spec.validate();
    const Eigen::MatrixXd& P = spec.transition;
    const auto m = P.rows();
    if (m == 1) return 0.0;

    Eigen::EigenSolver<Eigen::MatrixXd> es(P, true);
    Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();

    // Locate the Perron root; every other eigenvalue must lie strictly inside the unit disc.
    Eigen::Index perron = 0;
    for (Eigen::Index k = 1; k < m; ++k)
        if (std::abs(ev(k) - 1.0) < std::abs(ev(perron) - 1.0)) perron = k;
    double lambda = 0.0;
    for (Eigen::Index k = 0; k < m; ++k)
        if (k != perron) lambda = std::max(lambda, std::abs(ev(k)));
    if (lambda >= 1.0 - 1e-10)
        throw not_mixing("transition matrix has a second eigenvalue of modulus " +
                         std::to_string(lambda) + " (reducible or periodic chain)");

    if (j == 0) return 1.0;
    if (lambda < 1e-14) return 0.0;  // rank-one P mixes in a single step

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
    if (!lu.isInvertible()) return 1.0;  // defective: no spectral constant
    Eigen::MatrixXcd Vinv = lu.inverse();
    double C = 0.0;
    for (Eigen::Index s = 0; s < m; ++s) {
        double row = 0.0;
        for (Eigen::Index t = 0; t < m; ++t)
            for (Eigen::Index k = 0; k < m; ++k)
                if (k != perron) row += std::abs(V(s, k)) * std::abs(Vinv(k, t));
        C = std::max(C, 0.5 * row);
    }
    const double bound = C * std::pow(lambda, static_cast<double>(j));
    return std::clamp(bound, 0.0, 1.0);
}

}  // namespace crm
