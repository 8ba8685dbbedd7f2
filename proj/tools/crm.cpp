// crm: command-line front end for conditional risk estimation experiments.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crm/crm.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file) throw crm::argument_error("cannot write '" + path + "'");
        os = file.get();
    }
    std::ostream& operator*() { return *os; }
};

crm::SampleSequence load_sequence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw crm::argument_error("cannot open sequence file '" + path + "'");
    return crm::read_sequence(in);
}

crm::HiddenMarkovSpec load_process(const std::string& spec_path, std::uint64_t chain_seed) {
    if (!spec_path.empty()) return crm::spec_from_json(crm::read_json_file(spec_path));
    return crm::random_chain(chain_seed);
}

// `--config` for subcommands other than compare/bounds: a JSON object whose keys are
// long option names. Values become command-line tokens unless the flag is given explicitly.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
    std::string config_path;
    std::size_t sub_pos = args.size();
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
        if (sub_pos == args.size() &&
            std::find(subcommands.begin(), subcommands.end(), args[i]) != subcommands.end())
            sub_pos = i;
    }
    if (config_path.empty() || sub_pos == args.size()) return args;
    const std::string& sub = args[sub_pos];
    if (sub == "compare" || sub == "bounds") return args;

    const crm::json cfg = crm::read_json_file(config_path);
    if (!cfg.is_object()) throw crm::argument_error("--config must hold a JSON object");
    std::vector<std::string> injected;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back(flag);
            continue;
        }
        injected.push_back(flag);
        if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            injected.push_back(joined);
        } else {
            injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
    return out;
}

std::string bound_cell(double v) { return crm::format_number(v, 12); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical conditional risk minimization for dependent processes"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path = "-";
    std::string config_path;
    auto* seed_opt = app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_option("--out", out_path, "Output path ('-' for stdout)");
    app.add_option("--config", config_path, "JSON configuration file");

    // shared option storage
    std::string process_spec, sequence_path, hypothesis_path, params_path;
    std::uint64_t chain_seed = 1;
    std::size_t n = 1000, d = 1, resolution = 512, threads = 1;
    double bandwidth = 0.1, ridge = 1e-8;
    std::string kernel = "stratified-set", learner = "ecrm", fallback = "error", loss_kind = "zero-one";
    std::string spec_out;
    bool full_history = false, timing = false;
    std::optional<std::size_t> eval_d;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> d_list, scaling_grid;
    std::vector<double> bw_list;
    std::vector<std::string> learner_list;
    std::optional<std::size_t> n_train;

    auto add_process = [&](CLI::App* sub) {
        sub->add_option("--process-spec", process_spec, "Hidden Markov spec (JSON)");
        sub->add_option("--chain-seed", chain_seed, "random_chain seed when no spec is given")->capture_default_str();
    };

    auto* simulate = app.add_subcommand("simulate", "Sample a sequence from a hidden Markov process");
    add_process(simulate);
    simulate->add_option("--n", n, "Sequence length")->capture_default_str();
    simulate->add_option("--spec-out", spec_out, "Also write the process spec here");

    auto* train = app.add_subcommand("train", "Fit a predictor to a sequence");
    train->add_option("--sequence", sequence_path, "Sequence file")->required();
    train->add_option("--learner", learner, "ecrm | erm | sliding-window")->capture_default_str();
    train->add_option("--d", d, "History length")->capture_default_str();
    train->add_option("--kernel", kernel, "sqexp | epanechnikov | stratified-set")->capture_default_str();
    train->add_option("--bandwidth", bandwidth, "Bandwidth or stratified base width")->capture_default_str();
    train->add_option("--ridge", ridge, "Ridge penalty")->capture_default_str();
    train->add_option("--fallback", fallback, "error | uniform-weights")->capture_default_str();
    train->add_option("--loss-kind", loss_kind, "zero-one | clipped-squared")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "Score a predictor against the exact oracle");
    add_process(evaluate);
    evaluate->add_option("--sequence", sequence_path, "Observed sequence")->required();
    evaluate->add_option("--hypothesis", hypothesis_path, "Hypothesis JSON")->required();
    evaluate->add_option("--resolution", resolution, "Oracle grid resolution")->capture_default_str();
    evaluate->add_option("--d", eval_d, "Also report the kernel estimate with this history length");
    evaluate->add_option("--kernel", kernel, "Weighting for the kernel estimate")->capture_default_str();
    evaluate->add_option("--bandwidth", bandwidth, "Bandwidth for the kernel estimate")->capture_default_str();

    auto* compare = app.add_subcommand("compare", "ECRM vs ERM vs sliding-window over random chains");
    compare->add_option("--process-spec", process_spec, "Fixed process instead of random chains");
    compare->add_option("--seeds", seeds, "Chain seeds")->delimiter(',');
    compare->add_option("--n-train", n_train, "Training length");
    compare->add_option("--d", d_list, "History lengths")->delimiter(',');
    compare->add_option("--bandwidths", bw_list, "Bandwidths")->delimiter(',');
    auto* cmp_kernel = compare->add_option("--kernel", kernel, "Weighting family");
    compare->add_option("--learners", learner_list, "Learners")->delimiter(',');
    auto* cmp_res = compare->add_option("--resolution", resolution, "Oracle grid resolution");
    auto* cmp_ridge = compare->add_option("--ridge", ridge, "Ridge penalty");
    auto* cmp_fallback = compare->add_option("--fallback", fallback, "error | uniform-weights");
    compare->add_option("--threads", threads, "Worker threads")->capture_default_str();
    compare->add_flag("--timing", timing, "Record wall_time_ms (makes output non-reproducible)");

    auto* bounds = app.add_subcommand("bounds", "Evaluate the finite-sample deviation bound");
    bounds->add_option("--params", params_path, "Bound parameters (JSON)");
    bounds->add_option("--scaling-grid", scaling_grid, "Evaluate along the N-schedule on these N")->delimiter(',');

    auto* grid = app.add_subcommand("grid", "Export E[y | x, history] on a grid");
    add_process(grid);
    grid->add_option("--sequence", sequence_path, "Observed sequence")->required();
    grid->add_option("--d", d, "History length")->capture_default_str();
    grid->add_option("--resolution", resolution, "Cells per axis")->capture_default_str();
    grid->add_flag("--full-history", full_history, "Condition on the whole sequence");

    auto* weights = app.add_subcommand("weights", "Export per-sample kernel weights");
    weights->add_option("--sequence", sequence_path, "Sequence file")->required();
    weights->add_option("--d", d, "History length")->capture_default_str();
    weights->add_option("--kernel", kernel, "Weighting family")->capture_default_str();
    weights->add_option("--bandwidth", bandwidth, "Bandwidth")->capture_default_str();

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(args, {"simulate", "train", "evaluate", "compare", "bounds", "grid", "weights"});
        std::vector<const char*> cargs;
        for (const auto& a : args) cargs.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e);
            return rc == 0 ? 0 : kExitConfig;
        }

        if (*simulate) {
            const auto spec = load_process(process_spec, chain_seed);
            const auto seq = crm::simulate(spec, n, seed);
            Output out(out_path);
            crm::write_sequence(*out, seq);
            if (!spec_out.empty()) {
                Output so(spec_out);
                *so << crm::to_json(spec).dump(2) << '\n';
            }
        } else if (*train) {
            const auto seq = load_sequence(sequence_path);
            crm::Hypothesis h;
            switch (crm::parse_learner(learner)) {
                case crm::Learner::ecrm: {
                    crm::TrainConfig tc{d, crm::make_weighting(crm::parse_weight_family(kernel), seq.dim(), d, bandwidth),
                                        ridge, crm::parse_fallback(fallback)};
                    h = crm::ecrm_fit(seq, seq.final_history(d), tc);
                    break;
                }
                case crm::Learner::erm: h = crm::erm_fit(seq, ridge); break;
                case crm::Learner::sliding_window: h = crm::sliding_window_fit(seq, d, ridge); break;
            }
            h.loss_kind = crm::parse_loss_kind(loss_kind);
            Output out(out_path);
            *out << crm::to_json(h).dump(2) << '\n';
        } else if (*evaluate) {
            const auto spec = load_process(process_spec, chain_seed);
            const auto seq = load_sequence(sequence_path);
            auto h = crm::hypothesis_from_json(crm::read_json_file(hypothesis_path));
            crm::json report;
            const crm::StatePosterior next = crm::forward_posterior(spec, seq);
            report["conditional_risk"] = crm::conditional_risk_oracle(spec, next, h, resolution);
            report["marginal_risk"] =
                crm::conditional_risk_oracle(spec, {crm::stationary_distribution(spec)}, h, resolution);
            report["empirical_risk"] = crm::empirical_marginal_risk(seq, h);
            report["next_state_posterior"] = next.probs;
            if (eval_d) {
                const auto w = crm::make_weighting(crm::parse_weight_family(kernel), seq.dim(), *eval_d, bandwidth);
                report["estimated_conditional_risk"] =
                    crm::conditional_risk_estimate(seq, *eval_d, w, seq.final_history(*eval_d), h);
            }
            Output out(out_path);
            *out << report.dump(2) << '\n';
        } else if (*compare) {
            crm::ExperimentConfig cfg;
            cfg.bandwidths = {0.02, 0.04, 0.08, 0.16, 0.32};
            if (!config_path.empty()) crm::merge_experiment_config(cfg, crm::read_json_file(config_path));
            if (!process_spec.empty()) cfg.process_spec = crm::spec_from_json(crm::read_json_file(process_spec));
            if (!seeds.empty()) cfg.chain_seeds = seeds;
            if (n_train) cfg.n_train = *n_train;
            if (!d_list.empty()) cfg.d_values = d_list;
            if (!bw_list.empty()) cfg.bandwidths = bw_list;
            if (cmp_kernel->count()) cfg.kernel = crm::parse_weight_family(kernel);
            if (!learner_list.empty()) {
                cfg.learners.clear();
                for (const auto& l : learner_list) cfg.learners.push_back(crm::parse_learner(l));
            }
            if (cmp_res->count()) cfg.oracle_resolution = resolution;
            if (cmp_ridge->count()) cfg.ridge = ridge;
            if (cmp_fallback->count()) cfg.fallback = crm::parse_fallback(fallback);
            if (seed_opt->count()) cfg.master_seed = seed;
            cfg.threads = threads;
            cfg.record_timing = timing;

            const auto rows = crm::run_comparison(cfg);
            Output out(out_path);
            crm::write_comparison_csv(*out, rows);
            if (out_path != "-" && !out_path.empty()) {
                Output echo(out_path + ".config.json");
                *echo << crm::to_json(cfg).dump(2) << '\n';
            }
        } else if (*bounds) {
            const std::string path = !params_path.empty() ? params_path : config_path;
            if (path.empty()) throw crm::argument_error("bounds needs --params <json>");
            const auto params = crm::bound_params_from_json(crm::read_json_file(path));
            Output out(out_path);
            if (scaling_grid.empty()) {
                const auto terms = crm::deviation_bound(params);
                *out << "t1,t2,t3,covering,term1,term2,total\r\n"
                     << bound_cell(terms.thresholds.t1) << ',' << bound_cell(terms.thresholds.t2) << ','
                     << bound_cell(terms.thresholds.t3) << ',' << bound_cell(terms.covering) << ','
                     << bound_cell(terms.term1) << ',' << bound_cell(terms.term2) << ','
                     << bound_cell(terms.total) << "\r\n";
            } else {
                *out << "N,mu,a,b,t1,t2,t3,covering,term1,term2,total,log_total,error\r\n";
                for (const auto& row : crm::scaling_check(scaling_grid, params)) {
                    *out << row.N << ',' << row.mu << ',' << row.a << ',' << bound_cell(row.b) << ',';
                    if (row.terms) {
                        const auto& t = *row.terms;
                        *out << bound_cell(t.thresholds.t1) << ',' << bound_cell(t.thresholds.t2) << ','
                             << bound_cell(t.thresholds.t3) << ',' << bound_cell(t.covering) << ','
                             << bound_cell(t.term1) << ',' << bound_cell(t.term2) << ',' << bound_cell(t.total)
                             << ',' << bound_cell(std::log(t.total)) << ",\r\n";
                    } else {
                        *out << ",,,,,,,," << crm::csv_field(row.error) << "\r\n";
                    }
                }
            }
        } else if (*grid) {
            const auto spec = load_process(process_spec, chain_seed);
            const auto seq = load_sequence(sequence_path);
            const auto cells = crm::emit_distribution_grid(spec, seq, d, resolution, full_history);
            Output out(out_path);
            crm::write_grid_csv(*out, cells);
        } else if (*weights) {
            const auto seq = load_sequence(sequence_path);
            const auto w = crm::make_weighting(crm::parse_weight_family(kernel), seq.dim(), d, bandwidth);
            Output out(out_path);
            crm::write_weight_trace_csv(*out, crm::emit_weight_trace(seq, d, w));
        }
    } catch (const crm::argument_error& e) {
        std::cerr << "crm: " << e.what() << '\n';
        return kExitConfig;
    } catch (const crm::numeric_error& e) {
        std::cerr << "crm: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "crm: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
