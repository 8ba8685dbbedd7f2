#pragma once

/**
 * @file io.hpp
 * @brief Text and JSON formats.
 *
 * Sequence file:
 *
 *     k N
 *     z_1 ... z_k [latent]      (N lines, oldest first)
 *
 * The optional trailing integer on a line is the latent state; either every
 * line has one or none does.
 */

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crm/bounds.hpp"
#include "crm/experiment.hpp"
#include "crm/processes.hpp"
#include "crm/sequence.hpp"

namespace crm {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

inline void write_sequence(std::ostream& os, const SampleSequence& seq) {
    os << seq.dim() << ' ' << seq.size() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto z = seq.point(i);
        for (std::size_t j = 0; j < z.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", z[j]);
            os << (j ? " " : "") << buf;
        }
        if (seq.has_latent()) os << ' ' << seq.latent_states()[i];
        os << '\n';
    }
}

inline SampleSequence read_sequence(std::istream& is) {
    std::string line;
    std::size_t k = 0, n = 0;
    if (!std::getline(is, line)) throw argument_error("sequence file is empty");
    {
        std::istringstream hdr(line);
        if (!(hdr >> k >> n) || k == 0) throw argument_error("sequence header must be 'k N'");
    }
    std::vector<double> flat;
    flat.reserve(k * n);
    std::vector<int> latent;
    std::optional<bool> with_latent;
    std::size_t rows = 0;
    while (rows < n && std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != k && tok.size() != k + 1)
            throw argument_error("sequence line " + std::to_string(rows + 2) + " has " +
                                 std::to_string(tok.size()) + " fields, expected " + std::to_string(k));
        const bool lat = tok.size() == k + 1;
        if (with_latent && *with_latent != lat)
            throw argument_error("latent state column present on some lines only");
        with_latent = lat;
        try {
            for (std::size_t j = 0; j < k; ++j) flat.push_back(std::stod(tok[j]));
            if (lat) latent.push_back(std::stoi(tok[k]));
        } catch (const std::logic_error&) {
            throw argument_error("malformed number on sequence line " + std::to_string(rows + 2));
        }
        ++rows;
    }
    if (rows != n)
        throw argument_error("sequence header announces " + std::to_string(n) + " samples, found " +
                             std::to_string(rows));
    return SampleSequence(k, std::move(flat), std::move(latent));
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

inline json to_json(const HiddenMarkovSpec& spec) {
    json j;
    j["num_states"] = spec.num_states();
    json rows = json::array();
    for (Eigen::Index i = 0; i < spec.transition.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < spec.transition.cols(); ++c) row.push_back(spec.transition(i, c));
        rows.push_back(row);
    }
    j["transition"] = rows;
    json labels = json::array();
    for (const auto& f : spec.affine_labels) labels.push_back({{"a", {f.a[0], f.a[1]}}, {"c", f.c}});
    j["labels"] = labels;
    j["box"] = {{"lo", {spec.emission_box.lo[0], spec.emission_box.lo[1]}},
                {"hi", {spec.emission_box.hi[0], spec.emission_box.hi[1]}}};
    j["initial"] = spec.initial_distribution;
    return j;
}

inline HiddenMarkovSpec spec_from_json(const json& j) {
    try {
        HiddenMarkovSpec spec;
        const auto& rows = j.at("transition");
        const auto m = static_cast<Eigen::Index>(rows.size());
        spec.transition.resize(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != m) throw argument_error("transition matrix must be square");
            for (Eigen::Index c = 0; c < m; ++c) spec.transition(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
        for (const auto& f : j.at("labels")) {
            AffineLabel lab;
            lab.a = {f.at("a").at(0).get<double>(), f.at("a").at(1).get<double>()};
            lab.c = f.at("c").get<double>();
            spec.affine_labels.push_back(lab);
        }
        if (j.contains("box")) {
            const auto& b = j.at("box");
            spec.emission_box.lo = {b.at("lo").at(0).get<double>(), b.at("lo").at(1).get<double>()};
            spec.emission_box.hi = {b.at("hi").at(0).get<double>(), b.at("hi").at(1).get<double>()};
        }
        if (j.contains("initial"))
            spec.initial_distribution = j.at("initial").get<std::vector<double>>();
        else
            spec.initial_distribution = stationary_distribution(spec);
        if (j.contains("num_states") && j.at("num_states").get<std::size_t>() != spec.num_states())
            throw argument_error("num_states disagrees with the label list");
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw argument_error(std::string("invalid process spec: ") + e.what());
    }
}

inline json to_json(const Hypothesis& h) {
    return {{"weights", h.weights}, {"bias", h.bias}, {"loss_kind", std::string(to_string(h.loss_kind))}};
}

inline Hypothesis hypothesis_from_json(const json& j) {
    try {
        Hypothesis h;
        h.weights = j.at("weights").get<std::vector<double>>();
        h.bias = j.at("bias").get<double>();
        h.loss_kind = parse_loss_kind(j.value("loss_kind", std::string("zero-one")));
        return h;
    } catch (const json::exception& e) {
        throw argument_error(std::string("invalid hypothesis: ") + e.what());
    }
}

/**
 * Bound parameters. `beta` is one of
 *   {"kind": "zero"}, {"kind": "exponential", "scale": C, "rate": r}  (C e^{-r j}),
 *   {"kind": "chain", "process": <spec>}  (spectral bound of a hidden Markov chain);
 * `covering` is {"kind": "constant", "value": v} or
 *   {"kind": "linear", "weight_radius": R, "input_dim": p}.
 * mu and a default to block_schedule(N, d).
 */
inline BoundParams bound_params_from_json(const json& j) {
    try {
        BoundParams p;
        p.t = j.value("t", p.t);
        p.N = j.at("N").get<std::size_t>();
        p.k = j.value("k", p.k);
        p.d = j.value("d", p.d);
        p.b = j.value("b", p.b);
        p.K1 = j.value("K1", p.K1);
        p.K2 = j.value("K2", p.K2);
        p.L = j.value("L", p.L);
        p.gamma = j.value("gamma", p.gamma);
        p.D0 = j.value("D0", p.D0);
        p.D1 = j.value("D1", p.D1);
        p.D2 = j.value("D2", p.D2);
        p.L_H = j.value("L_H", p.L_H);
        if (j.contains("L_R")) p.L_R = j.at("L_R").get<double>();

        const json beta = j.value("beta", json{{"kind", "zero"}});
        const std::string bk = beta.at("kind").get<std::string>();
        if (bk == "zero") {
            p.beta = [](double) { return 0.0; };
        } else if (bk == "exponential") {
            const double C = beta.value("scale", 1.0), r = beta.value("rate", 1.0);
            p.beta = [C, r](double jj) { return std::min(1.0, C * std::exp(-r * jj)); };
        } else if (bk == "chain") {
            const HiddenMarkovSpec spec = spec_from_json(beta.at("process"));
            p.beta = [spec](double jj) { return beta_mixing_bound(spec, static_cast<std::size_t>(jj)); };
        } else {
            throw argument_error("unknown beta kind '" + bk + "'");
        }

        const json cov = j.value("covering", json{{"kind", "constant"}, {"value", 1.0}});
        const std::string ck = cov.at("kind").get<std::string>();
        if (ck == "constant") {
            const double v = cov.value("value", 1.0);
            p.covering = [v](double, std::size_t) { return v; };
        } else if (ck == "linear") {
            const double R = cov.at("weight_radius").get<double>();
            const std::size_t dim = cov.at("input_dim").get<std::size_t>();
            p.covering = [R, dim](double theta, std::size_t n) { return linear_covering_bound(theta, R, dim, n); };
        } else {
            throw argument_error("unknown covering kind '" + ck + "'");
        }

        if (j.contains("mu") && j.contains("a")) {
            p.mu = j.at("mu").get<std::size_t>();
            p.a = j.at("a").get<std::size_t>();
        } else {
            std::optional<std::size_t> target;
            if (j.contains("mu")) target = j.at("mu").get<std::size_t>();
            const BlockSchedule s = block_schedule(p.N, p.d, target);
            p.mu = s.mu;
            p.a = s.a;
        }
        return p;
    } catch (const json::exception& e) {
        throw argument_error(std::string("invalid bound parameters: ") + e.what());
    }
}

inline json to_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.process_spec) j["process"] = to_json(*cfg.process_spec);
    j["seeds"] = cfg.chain_seeds;
    j["n_train"] = cfg.n_train;
    j["d"] = cfg.d_values;
    j["bandwidths"] = cfg.bandwidths;
    j["kernel"] = std::string(to_string(cfg.kernel));
    json ls = json::array();
    for (Learner l : cfg.learners) ls.push_back(std::string(to_string(l)));
    j["learners"] = ls;
    j["oracle_resolution"] = cfg.oracle_resolution;
    j["ridge"] = cfg.ridge;
    j["fallback"] = cfg.fallback == Fallback::error ? "error" : "uniform-weights";
    j["master_seed"] = cfg.master_seed;
    return j;
}

/// Fields absent from `j` keep the values already in `cfg`.
inline void merge_experiment_config(ExperimentConfig& cfg, const json& j) {
    try {
        if (j.contains("process")) cfg.process_spec = spec_from_json(j.at("process"));
        if (j.contains("seeds")) cfg.chain_seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("n_train")) cfg.n_train = j.at("n_train").get<std::size_t>();
        if (j.contains("d")) cfg.d_values = j.at("d").get<std::vector<std::size_t>>();
        if (j.contains("bandwidths")) cfg.bandwidths = j.at("bandwidths").get<std::vector<double>>();
        if (j.contains("kernel")) cfg.kernel = parse_weight_family(j.at("kernel").get<std::string>());
        if (j.contains("learners")) {
            cfg.learners.clear();
            for (const auto& l : j.at("learners")) cfg.learners.push_back(parse_learner(l.get<std::string>()));
        }
        if (j.contains("oracle_resolution")) cfg.oracle_resolution = j.at("oracle_resolution").get<std::size_t>();
        if (j.contains("ridge")) cfg.ridge = j.at("ridge").get<double>();
        if (j.contains("fallback")) cfg.fallback = parse_fallback(j.at("fallback").get<std::string>());
        if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw argument_error(std::string("invalid experiment config: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw argument_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw argument_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace crm
