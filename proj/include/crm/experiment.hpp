#pragma once

/**
 * @file experiment.hpp
 * @brief ECRM vs ERM vs sliding-window comparison harness and plot exports.
 *
 * Every learner is scored by its exact conditional 0/1 risk for the sample
 * following the training prefix, computed from the forward posterior over
 * the whole prefix and the quadrature oracle.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "crm/estimator.hpp"
#include "crm/learners.hpp"
#include "crm/processes.hpp"

namespace crm {

enum class Learner { ecrm, erm, sliding_window };

inline std::string_view to_string(Learner l) {
    switch (l) {
        case Learner::ecrm: return "ecrm";
        case Learner::erm: return "erm";
        case Learner::sliding_window: return "sliding-window";
    }
    return "?";
}

inline Learner parse_learner(std::string_view s) {
    if (s == "ecrm") return Learner::ecrm;
    if (s == "erm") return Learner::erm;
    if (s == "sliding-window") return Learner::sliding_window;
    throw argument_error("unknown learner '" + std::string(s) + "'");
}

/// Weighting families selectable by name.
enum class WeightFamily { sqexp, epanechnikov, stratified_set };

inline std::string_view to_string(WeightFamily f) {
    switch (f) {
        case WeightFamily::sqexp: return "sqexp";
        case WeightFamily::epanechnikov: return "epanechnikov";
        case WeightFamily::stratified_set: return "stratified-set";
    }
    return "?";
}

inline WeightFamily parse_weight_family(std::string_view s) {
    if (s == "sqexp") return WeightFamily::sqexp;
    if (s == "epanechnikov") return WeightFamily::epanechnikov;
    if (s == "stratified-set") return WeightFamily::stratified_set;
    throw argument_error("unknown kernel family '" + std::string(s) + "'");
}

/// Weighting for histories of d samples in [0,1]^k at bandwidth (or base width) b.
inline Weighting make_weighting(WeightFamily family, std::size_t k, std::size_t d, double b) {
    switch (family) {
        case WeightFamily::sqexp: return KernelSpec::squared_exponential(k * d, b);
        case WeightFamily::epanechnikov: return KernelSpec::epanechnikov(k * d, b);
        case WeightFamily::stratified_set:
            if (!(b > 0.0)) throw argument_error("stratified base width must be positive");
            return StratifiedSetSpec{b};
    }
    throw argument_error("unknown kernel family");
}

struct ExperimentConfig {
    /// Fixed process; when absent each seed selects random_chain(seed).
    std::optional<HiddenMarkovSpec> process_spec;
    std::vector<std::uint64_t> chain_seeds{1};
    std::size_t n_train = 2000;
    std::vector<std::size_t> d_values{1};
    std::vector<double> bandwidths{0.1};
    WeightFamily kernel = WeightFamily::stratified_set;
    std::vector<Learner> learners{Learner::ecrm, Learner::erm, Learner::sliding_window};
    std::size_t oracle_resolution = 512;
    double ridge = 1e-8;
    Fallback fallback = Fallback::error;
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
    bool record_timing = false;

    void validate() const {
        if (learners.empty()) throw argument_error("learner list is empty");
        if (chain_seeds.empty()) throw argument_error("seed list is empty");
        if (d_values.empty() || bandwidths.empty()) throw argument_error("d and bandwidth lists must be non-empty");
        if (n_train == 0) throw argument_error("N_train must be positive");
        for (auto d : d_values)
            if (d == 0) throw argument_error("history lengths must be positive");
        for (double b : bandwidths)
            if (!(b > 0.0)) throw argument_error("bandwidths must be positive");
        if (oracle_resolution == 0) throw argument_error("oracle resolution must be positive");
        if (!(ridge >= 0.0)) throw argument_error("ridge must be non-negative");
        if (process_spec) process_spec->validate();
    }
};

struct ComparisonRow {
    std::uint64_t seed = 0;
    std::size_t d = 0;
    double bandwidth = 0.0;
    Learner learner = Learner::ecrm;
    std::optional<double> conditional_risk;
    std::optional<double> marginal_risk;
    std::optional<double> wall_time_ms;
    std::string error;
};

/// Simulation seed for one chain; independent of thread scheduling.
inline std::uint64_t simulation_seed(std::uint64_t master_seed, std::uint64_t chain_seed) {
    return detail::splitmix64(master_seed ^ detail::splitmix64(chain_seed + 0x243f6a8885a308d3ULL));
}

/// All rows for one chain, in (d, bandwidth, learner) order.
inline std::vector<ComparisonRow> run_chain(const ExperimentConfig& cfg, std::uint64_t seed) {
    const HiddenMarkovSpec spec = cfg.process_spec ? *cfg.process_spec : random_chain(seed);
    const SampleSequence seq = simulate(spec, cfg.n_train, simulation_seed(cfg.master_seed, seed));
    const StatePosterior next = forward_posterior(spec, seq);
    const StatePosterior stationary{stationary_distribution(spec)};

    std::vector<ComparisonRow> rows;
    for (std::size_t d : cfg.d_values) {
        for (double b : cfg.bandwidths) {
            for (Learner learner : cfg.learners) {
                ComparisonRow row{seed, d, b, learner, {}, {}, {}, {}};
                const auto start = std::chrono::steady_clock::now();
                try {
                    Hypothesis h;
                    switch (learner) {
                        case Learner::ecrm: {
                            TrainConfig tc{d, make_weighting(cfg.kernel, seq.dim(), d, b), cfg.ridge, cfg.fallback};
                            h = ecrm_fit(seq, seq.final_history(d), tc);
                            break;
                        }
                        case Learner::erm: h = erm_fit(seq, cfg.ridge); break;
                        case Learner::sliding_window: h = sliding_window_fit(seq, d, cfg.ridge); break;
                    }
                    row.conditional_risk = conditional_risk_oracle(spec, next, h, cfg.oracle_resolution);
                    row.marginal_risk = conditional_risk_oracle(spec, stationary, h, cfg.oracle_resolution);
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                if (cfg.record_timing)
                    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                           std::chrono::steady_clock::now() - start)
                                           .count();
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

/**
 * Runs every (seed, d, bandwidth, learner) cell. Chains are distributed over
 * `cfg.threads` workers; rows come back in seed-list order, then d, bandwidth
 * and learner order, regardless of the thread count.
 */
inline std::vector<ComparisonRow> run_comparison(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t chains = cfg.chain_seeds.size();
    std::vector<std::vector<ComparisonRow>> per_chain(chains);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < chains; i = next++) {
            try {
                per_chain[i] = run_chain(cfg, cfg.chain_seeds[i]);
            } catch (const std::exception& e) {
                // simulation itself failed: still one row per cell
                for (std::size_t d : cfg.d_values)
                    for (double b : cfg.bandwidths)
                        for (Learner l : cfg.learners)
                            per_chain[i].push_back({cfg.chain_seeds[i], d, b, l, {}, {}, {}, e.what()});
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(1, chains));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<ComparisonRow> rows;
    for (auto& c : per_chain)
        for (auto& r : c) rows.push_back(std::move(r));
    return rows;
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

inline std::string format_number(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// RFC 4180 quoting when needed.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    os << "seed,d,bandwidth,learner,conditional_risk,marginal_risk,wall_time_ms,error\r\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : rows) {
        os << r.seed << ',' << r.d << ',' << format_number(r.bandwidth) << ',' << to_string(r.learner) << ','
           << opt(r.conditional_risk) << ',' << opt(r.marginal_risk) << ',' << opt(r.wall_time_ms) << ','
           << csv_field(r.error) << "\r\n";
    }
}

// ---------------------------------------------------------------------------
// Distribution grid and weight trace
// ---------------------------------------------------------------------------

struct GridCell {
    double x1 = 0.0;  ///< rescaled coordinates in [0,1]
    double x2 = 0.0;
    double expected_y = 0.0;
};

/// E[y | x] = sum_i posterior(i) sign f_i(x) at the centers of a res x res grid.
inline std::vector<GridCell> distribution_grid(const HiddenMarkovSpec& spec, const StatePosterior& posterior,
                                               std::size_t resolution) {
    if (resolution == 0) throw argument_error("grid resolution must be positive");
    if (posterior.probs.size() != spec.num_states())
        throw argument_error("posterior length differs from number of states");
    std::vector<GridCell> cells;
    cells.reserve(resolution * resolution);
    const double step = 1.0 / static_cast<double>(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double u1 = (static_cast<double>(i) + 0.5) * step;
        for (std::size_t j = 0; j < resolution; ++j) {
            const double u2 = (static_cast<double>(j) + 0.5) * step;
            double e = 0.0;
            for (std::size_t s = 0; s < spec.num_states(); ++s)
                e += posterior.probs[s] *
                     spec.label(s, spec.emission_box.to_box(0, u1), spec.emission_box.to_box(1, u2));
            cells.push_back({u1, u2, e});
        }
    }
    return cells;
}

/**
 * Grid of E[y_{next} | x, last d observations] for a stationary chain: the
 * trailing window is filtered from the stationary distribution. With
 * `full_history` the whole sequence is filtered from the initial distribution.
 */
inline std::vector<GridCell> emit_distribution_grid(const HiddenMarkovSpec& spec, const SampleSequence& history,
                                                    std::size_t d, std::size_t resolution,
                                                    bool full_history = false) {
    const StatePosterior post =
        full_history ? forward_posterior(spec, history)
                     : forward_posterior(spec, history.tail(d), stationary_distribution(spec));
    return distribution_grid(spec, post, resolution);
}

inline void write_grid_csv(std::ostream& os, const std::vector<GridCell>& cells) {
    os << "x1,x2,expected_y\r\n";
    for (const auto& c : cells)
        os << format_number(c.x1) << ',' << format_number(c.x2) << ',' << format_number(c.expected_y) << "\r\n";
}

struct WeightTraceRow {
    std::size_t index = 0;  ///< 1-based position of the weighted sample
    std::vector<double> x;
    int y = 1;
    double weight = 0.0;
};

/// Weight of every sample z_j (j > d) toward the final d-history of the sequence.
inline std::vector<WeightTraceRow> emit_weight_trace(const SampleSequence& seq, std::size_t d,
                                                     const Weighting& weighting) {
    const std::vector<double> target = seq.final_history(d);
    const WeightVector w = history_weights(seq, d, weighting, target);
    std::vector<WeightTraceRow> rows;
    rows.reserve(w.n());
    for (std::size_t i = 0; i < w.n(); ++i) {
        const std::size_t r = w.row(i);
        auto x = seq.features(r);
        rows.push_back({r + 1, {x.begin(), x.end()}, seq.label(r), w.raw_weights[i]});
    }
    return rows;
}

inline void write_weight_trace_csv(std::ostream& os, const std::vector<WeightTraceRow>& rows) {
    const std::size_t p = rows.empty() ? 0 : rows.front().x.size();
    os << "index";
    for (std::size_t j = 0; j < p; ++j) os << ",x" << (j + 1);
    os << ",y,weight\r\n";
    for (const auto& r : rows) {
        os << r.index;
        for (double v : r.x) os << ',' << format_number(v);
        os << ',' << r.y << ',' << format_number(r.weight, 17) << "\r\n";
    }
}

}  // namespace crm
