// ramimo - repeater-assisted massive MIMO link simulator
// Copyright (C) 2026 the ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ramimo/channel.hpp"
#include "ramimo/experiments.hpp"
#include "ramimo/optimizer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConverged = 3;

/// Reads a --set value: JSON literals (numbers, bools, arrays) parse as such,
/// everything else is taken as a plain string.
nlohmann::json parse_literal(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        return nlohmann::json(text);
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    return nlohmann::json::parse(in);
}

/// Merge CLI pieces into one experiment-config JSON: the config file (or
/// bare preset) first, then each `--set key=value` with dotted keys.
nlohmann::json merged_config_json(const std::string& config_path, const std::string& preset,
                                  const std::vector<std::string>& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) j = load_json_file(config_path);
    if (!preset.empty()) j["preset"] = preset;
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        }
        std::string key = kv.substr(0, eq);
        for (auto& c : key) {
            if (c == '.') c = '/';
        }
        j[nlohmann::json::json_pointer("/" + key)] = parse_literal(kv.substr(eq + 1));
    }
    return j;
}

struct ExperimentArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::string out_dir;
};

void add_common_options(CLI::App* sub, ExperimentArgs& args) {
    sub->add_option("--config", args.config_path, "JSON config file (may name a preset)");
    sub->add_option("--preset", args.preset, "built-in preset, e.g. paper-fig1 or desk-fig3");
    sub->add_option("--set", args.overrides,
                    "override a config key, dotted path (e.g. scenario.num_ues=4)");
    sub->add_option("--out", args.out_dir, "output directory")->required();
}

int run_experiment_command(const std::string& name, const ExperimentArgs& args) {
    const nlohmann::json j = merged_config_json(args.config_path, args.preset, args.overrides);
    ramimo::ExperimentConfig config = j.get<ramimo::ExperimentConfig>();
    if (config.experiment.empty()) {
        config.experiment = name;
    } else if (config.experiment != name) {
        throw std::invalid_argument("config experiment '" + config.experiment +
                                    "' does not match subcommand '" + name + "'");
    }
    config.validate();

    const ramimo::MetricRecord record = ramimo::run_experiment(config);

    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path out(args.out_dir);
    ramimo::emit_csv(record, (out / "results.csv").string());
    if (config.emit_trace) ramimo::emit_trace_csv(record, (out / "trace.csv").string());
    ramimo::emit_manifest(config, record, (out / "manifest.json").string());

    std::cout << "wrote " << record.rows.size() << " rows to " << (out / "results.csv").string()
              << "\n";
    if (record.optimizer_runs > 0) {
        std::cout << "optimizer: " << record.optimizer_nonconverged << "/"
                  << record.optimizer_runs << " runs hit the iteration cap\n";
        if (record.nonconverged_fraction() > 0.05) {
            std::cerr << "error: optimizer failed to converge on more than 5% of runs\n";
            return kExitNonConverged;
        }
    }
    return kExitOk;
}

struct SolveArgs {
    std::string input_path;
    std::string mode = "maxmin";
    std::string scenario_path;
    std::vector<std::string> overrides;
    double threshold_db = 4.5;  // per-UE SINR target for minpow
    std::string out_dir;
};

/// One-shot optimizer run on a serialized channel realization, for debugging.
int run_solve_command(const SolveArgs& args) {
    const nlohmann::json rj = load_json_file(args.input_path);
    const auto realization = rj.get<ramimo::ChannelRealization>();

    ramimo::ScenarioConfig cfg = ramimo::scenario_preset("table1");
    cfg.num_bs_antennas = realization.num_antennas();
    cfg.num_repeaters = realization.num_repeaters();
    cfg.num_ues = realization.num_ues();
    nlohmann::json sj = cfg;
    if (!args.scenario_path.empty()) {
        const nlohmann::json user = load_json_file(args.scenario_path);
        for (auto it = user.begin(); it != user.end(); ++it) sj[it.key()] = it.value();
    }
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        }
        sj[kv.substr(0, eq)] = parse_literal(kv.substr(eq + 1));
    }
    cfg = sj.get<ramimo::ScenarioConfig>();
    cfg.validate();

    nlohmann::json out;
    out["mode"] = args.mode;
    bool converged = false;
    if (args.mode == "maxmin") {
        const ramimo::MaxMinResult res = ramimo::maxmin_ccp(realization, cfg);
        converged = res.converged;
        out["alpha"] = std::vector<double>(res.alpha.data(), res.alpha.data() + res.alpha.size());
        out["sinr_floor"] = res.sinr_floor;
        out["sinr_floor_db"] = ramimo::linear_to_db(res.sinr_floor);
        out["converged"] = res.converged;
        out["iterations"] = res.iterations;
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& row : res.trace) {
            trace.push_back({{"iteration", row.iteration},
                             {"objective", row.objective},
                             {"min_sinr", row.min_sinr},
                             {"rel_change", row.rel_change}});
        }
        out["trace"] = trace;
    } else if (args.mode == "minpow") {
        const double thr = ramimo::db_to_linear(args.threshold_db);
        const Eigen::VectorXd thresholds = Eigen::VectorXd::Constant(cfg.num_ues, thr);
        const ramimo::MinPowResult res = ramimo::minpow_fpp(realization, cfg, thresholds);
        converged = res.converged;
        out["alpha"] = std::vector<double>(res.alpha.data(), res.alpha.data() + res.alpha.size());
        out["objective"] = res.objective;
        out["feasible"] = res.feasible;
        out["max_slack"] = res.slacks.size() ? res.slacks.maxCoeff() : 0.0;
        out["converged"] = res.converged;
        out["iterations"] = res.iterations;
    } else {
        throw std::invalid_argument("solve mode must be maxmin or minpow");
    }

    std::filesystem::create_directories(args.out_dir);
    const auto path = (std::filesystem::path(args.out_dir) / "solution.json").string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << out.dump(2) << '\n';
    std::cout << "wrote " << path << "\n";
    return converged ? kExitOk : kExitNonConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ramimo: uplink repeater-assisted massive MIMO link simulator"};
    app.require_subcommand(1);

    static const char* kExperiments[] = {"sinr-cdf", "pruning-sweep", "maxmin-edge",
                                         "energy-tradeoff"};
    ExperimentArgs exp_args[4];
    CLI::App* exp_subs[4];
    for (int i = 0; i < 4; ++i) {
        exp_subs[i] = app.add_subcommand(kExperiments[i]);
        add_common_options(exp_subs[i], exp_args[i]);
    }
    exp_subs[0]->description("per-UE SINR samples across repeater counts, vs mMIMO/cfmMIMO");
    exp_subs[1]->description("max-gain SINR under BS-distance pruning of the repeater grid");
    exp_subs[2]->description("cell-edge min-SINR: mMIMO / cfmMIMO / MaxPow / fairness control");
    exp_subs[3]->description("power vs SE outage for sleep-mode control policies");

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "one-shot optimizer on a saved realization");
    solve->add_option("--input", solve_args.input_path, "channel realization JSON")->required();
    solve->add_option("--mode", solve_args.mode, "maxmin or minpow");
    solve->add_option("--scenario", solve_args.scenario_path, "scenario JSON overriding table1");
    solve->add_option("--set", solve_args.overrides, "override a scenario key (key=value)");
    solve->add_option("--threshold-db", solve_args.threshold_db,
                      "per-UE SINR target in dB (minpow)");
    solve->add_option("--out", solve_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
        for (int i = 0; i < 4; ++i) {
            if (exp_subs[i]->parsed()) return run_experiment_command(kExperiments[i], exp_args[i]);
        }
        return run_solve_command(solve_args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
