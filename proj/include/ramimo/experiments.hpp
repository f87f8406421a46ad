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

#ifndef RAMIMO_EXPERIMENTS_HPP
#define RAMIMO_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ramimo/geometry.hpp"

namespace ramimo {

/// One experiment run: which study, over which scenario, at which scale.
/// Every experiment is a pure function of this struct (the seed lives in the
/// scenario), so re-running a saved config reproduces identical CSVs.
struct ExperimentConfig {
    std::string experiment;  // sinr-cdf | pruning-sweep | maxmin-edge | energy-tradeoff
    ScenarioConfig scenario;
    std::vector<int> repeater_counts{16, 64, 100, 400};  // sinr-cdf sweep
    std::vector<double> prune_thresholds_m{0.0, 400.0, 750.0};  // pruning-sweep
    int drops = 100;
    int blocks_per_drop = 50;
    int observe_blocks = 5;  // activation observation window T
    double se_target = 1.5;  // bit/s/Hz; SINR threshold is 2^se - 1
    bool outage_per_block = false;  // default: per-setup on block-averaged min-SE
    bool emit_trace = false;

    void validate() const;
};

/// Built-in experiment presets: paper-fig1..4 at publication scale and
/// desk-fig1..4 reduced for quick runs. Unknown names throw.
ExperimentConfig experiment_preset(const std::string& name);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Tabular results plus aggregates. Cells are preformatted so emitted CSVs
/// are byte-stable across runs and thread counts.
struct MetricRecord {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> trace_columns;
    std::vector<std::vector<std::string>> trace_rows;
    nlohmann::json summary;
    nlohmann::json stage_seconds;
    long optimizer_runs = 0;
    long optimizer_nonconverged = 0;

    double nonconverged_fraction() const {
        return optimizer_runs == 0 ? 0.0
                                   : static_cast<double>(optimizer_nonconverged) /
                                         static_cast<double>(optimizer_runs);
    }
};

MetricRecord run_sinr_cdf(const ExperimentConfig& config);
MetricRecord run_pruning_sweep(const ExperimentConfig& config);
MetricRecord run_maxmin_edge(const ExperimentConfig& config);
MetricRecord run_energy_tradeoff(const ExperimentConfig& config);

/// Dispatch on config.experiment; also fills stage_seconds["total"].
MetricRecord run_experiment(const ExperimentConfig& config);

void emit_csv(const MetricRecord& record, const std::string& path);
void emit_trace_csv(const MetricRecord& record, const std::string& path);
void emit_manifest(const ExperimentConfig& config, const MetricRecord& record,
                   const std::string& path);

// --- small shared utilities ---------------------------------------------------

/// Linear-interpolation percentile, p in [0, 100]; throws on empty input.
double percentile(std::vector<double> values, double p);

/// Canonical cell formatting for doubles ("%.9g", C locale).
std::string format_cell(double value);

}  // namespace ramimo

#endif  // RAMIMO_EXPERIMENTS_HPP
