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
//
// Benchmark: the same experiment run through the serial reference path
// (threads = 1) and through the OpenMP worker pool, timing both and
// asserting the emitted rows are byte-identical. Usage:
//
//   ramimo_bench [threads] [drops] [blocks]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "ramimo/experiments.hpp"
#include "ramimo/parallel.hpp"

namespace {

double run_once(ramimo::ExperimentConfig config, int threads, ramimo::MetricRecord& out) {
    config.scenario.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    out = ramimo::run_experiment(config);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : ramimo::hardware_threads();
    const int drops = argc > 2 ? std::atoi(argv[2]) : 8;
    const int blocks = argc > 3 ? std::atoi(argv[3]) : 4;

    ramimo::ExperimentConfig config;
    config.experiment = "pruning-sweep";
    config.scenario = ramimo::scenario_preset("table1");
    config.scenario.num_ues = 4;
    config.prune_thresholds_m = {0.0, 400.0, 750.0};
    config.drops = drops;
    config.blocks_per_drop = blocks;
    config.validate();

    std::cout << "workload: pruning-sweep, L=" << config.scenario.num_repeaters
              << ", K=" << config.scenario.num_ues << ", " << drops << " drops x " << blocks
              << " blocks\n";

    ramimo::MetricRecord serial, parallel;
    const double t_serial = run_once(config, 1, serial);
    std::cout << "serial reference:  " << t_serial << " s\n";
    const double t_parallel = run_once(config, threads, parallel);
    std::cout << "worker pool (" << threads << "): " << t_parallel << " s  (speedup "
              << t_serial / t_parallel << "x)\n";

    if (serial.rows != parallel.rows) {
        std::cerr << "FAIL: serial and parallel runs disagree\n";
        return 1;
    }
    std::cout << "PASS: outputs byte-identical across thread counts\n";
    return 0;
}
