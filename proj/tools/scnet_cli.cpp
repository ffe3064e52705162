// Experiment runner CLI: config-driven training, paired baseline/SC
// comparisons, oracle verification suites and parameter sweeps.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scnet/config.hpp"
#include "scnet/experiment.hpp"

namespace {

scnet::RunOverrides make_overrides(const std::optional<std::uint64_t>& seed,
                                   const std::optional<std::size_t>& epochs,
                                   const std::string& out_dir) {
    scnet::RunOverrides ov;
    ov.seed = seed;
    ov.epochs = epochs;
    if (!out_dir.empty()) ov.output_dir = out_dir;
    return ov;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) values.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"short-circuit network training and verification"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    app.add_option("--seed", seed, "override the config seed")->group("");

    // run
    auto* run_cmd = app.add_subcommand("run", "train one experiment config");
    std::string run_config;
    std::string run_out;
    run_cmd->add_option("config", run_config, "experiment config file")->required();
    run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--epochs", epochs, "override the epoch count");
    run_cmd->add_option("--out", run_out, "override the output directory");

    // pair
    auto* pair_cmd = app.add_subcommand("pair", "train a baseline/SC pair and compare");
    std::string pair_a, pair_b, pair_out = "pair-out";
    pair_cmd->add_option("config-a", pair_a, "first config (column a)")->required();
    pair_cmd->add_option("config-b", pair_b, "second config (column b)")->required();
    pair_cmd->add_option("--seed", seed, "override both config seeds");
    pair_cmd->add_option("--out", pair_out, "comparison output directory");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "run the oracle suites");
    std::string scope_str = "all";
    std::size_t nets = 40;
    std::uint64_t verify_seed = 2024;
    std::size_t max_params = 20000;
    std::string verify_report_path;
    verify_cmd->add_option("scope", scope_str, "fd | sc-delta | all");
    verify_cmd->add_option("--nets", nets, "networks per suite");
    verify_cmd->add_option("--seed", verify_seed, "suite seed");
    verify_cmd->add_option("--max-params", max_params, "finite-difference budget");
    verify_cmd->add_option("--report", verify_report_path,
                           "write per-layer / per-failure JSON-lines records to this file");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per parameter value");
    std::string sweep_config, sweep_param, sweep_values, sweep_out;
    sweep_cmd->add_option("config", sweep_config, "experiment config file")->required();
    sweep_cmd->add_option("--param", sweep_param, "sc_weight | batch_size")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep_cmd->add_option("--seed", seed, "override the config seed");
    sweep_cmd->add_option("--out", sweep_out, "sweep output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const scnet::ExperimentConfig cfg = scnet::load_experiment_config(run_config);
            const scnet::RunResult result =
                scnet::run_experiment(cfg, make_overrides(seed, epochs, run_out), &std::cout);
            std::cout << "wrote " << result.output_dir << "\n";
        } else if (pair_cmd->parsed()) {
            const scnet::ExperimentConfig a = scnet::load_experiment_config(pair_a);
            const scnet::ExperimentConfig b = scnet::load_experiment_config(pair_b);
            const scnet::PairResult result =
                scnet::run_pair(a, b, pair_out, make_overrides(seed, {}, ""), &std::cout);
            std::cout << "wrote " << result.output_dir << "\n"
                      << "step-0 forward equivalence: "
                      << (result.step0_loss_equal ? "exact" : "MISMATCH") << "\n"
                      << "final train loss a=" << result.a.records.back().train_loss
                      << " b=" << result.b.records.back().train_loss << "\n";
            if (!result.step0_loss_equal) return 1;
        } else if (verify_cmd->parsed()) {
            scnet::VerifyScope scope;
            if (scope_str == "fd") scope = scnet::VerifyScope::fd;
            else if (scope_str == "sc-delta") scope = scnet::VerifyScope::sc_delta;
            else if (scope_str == "all") scope = scnet::VerifyScope::all;
            else {
                std::cerr << "unknown scope '" << scope_str << "' (expected fd, sc-delta, all)\n";
                return 1;
            }
            scnet::VerifyOptions opts;
            opts.nets = nets;
            opts.seed = verify_seed;
            opts.max_parameters = max_params;
            const scnet::VerifyReport report = scnet::run_verify(scope, opts);
            std::cout << report.to_text();
            if (!verify_report_path.empty()) {
                std::ofstream out(verify_report_path);
                out << report.jsonl_records;
            }
            return report.pass ? 0 : 1;
        } else if (sweep_cmd->parsed()) {
            scnet::SweepParameter param;
            if (sweep_param == "sc_weight") param = scnet::SweepParameter::sc_weight;
            else if (sweep_param == "batch_size") param = scnet::SweepParameter::batch_size;
            else {
                std::cerr << "unknown --param '" << sweep_param
                          << "' (expected sc_weight or batch_size)\n";
                return 1;
            }
            const scnet::ExperimentConfig cfg = scnet::load_experiment_config(sweep_config);
            const scnet::SweepResult result = scnet::sweep(
                cfg, param, parse_values(sweep_values), make_overrides(seed, {}, sweep_out),
                &std::cout);
            std::cout << "wrote " << result.output_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
