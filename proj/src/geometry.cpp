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

#include "ramimo/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ramimo {

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    require(area_side_m > 0, "area_side_m must be positive");
    require(num_bs_antennas > 0, "num_bs_antennas must be positive");
    require(num_repeaters >= 0, "num_repeaters must be nonnegative");
    require(num_ues >= 0, "num_ues must be nonnegative");
    require(uplink_power_w > 0, "uplink_power_w must be positive");
    require(p_max_w > 0, "p_max_w must be positive");
    require(alpha_max > 0, "alpha_max must be positive");
    require(bandwidth_hz > 0, "bandwidth_hz must be positive");
    require(carrier_hz > 0, "carrier_hz must be positive");
    require(epsilon > 0, "epsilon must be positive");
    require(p_stat_w > 0 && p_sleep_w > 0 && p_sleep_w < p_stat_w,
            "power model requires 0 < p_sleep_w < p_stat_w");
    require(delta_p >= 0, "delta_p must be nonnegative");
    require(ccp_max_iterations > 0, "ccp_max_iterations must be positive");
    require(solver_max_iterations > 0, "solver_max_iterations must be positive");
    require(lambda >= 0, "lambda must be nonnegative");
    require(alpha_thr_rel >= 0 && alpha_thr_rel < 1, "alpha_thr_rel must be in [0, 1)");
    require(threads >= 1, "threads must be at least 1");
}

ScenarioConfig scenario_preset(const std::string& name) {
    if (name == "table1" || name == "default") {
        return ScenarioConfig{};  // reference defaults, L = 64
    }
    throw std::invalid_argument("unknown scenario preset: " + name);
}

int Deployment::num_active() const {
    int n = 0;
    for (bool a : active_mask) n += a ? 1 : 0;
    return n;
}

std::vector<Eigen::Vector2d> grid_positions(int count, double area_side_m) {
    if (count <= 0) throw std::invalid_argument("grid requires positive count");
    if (area_side_m <= 0) throw std::invalid_argument("grid requires positive area side");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (side * side != count) throw std::invalid_argument("grid requires square count");

    const double spacing = area_side_m / side;
    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int row = 0; row < side; ++row) {
        for (int col = 0; col < side; ++col) {
            points.emplace_back(spacing * (col + 0.5), spacing * (row + 0.5));
        }
    }
    return points;
}

double alpha_max_lookup_db(int num_repeaters) {
    switch (num_repeaters) {
        case 16:
            return 70.0;
        case 64:
            return 58.0;
        case 100:
            return 54.0;
        case 400:
            return 42.0;
        default:
            throw std::invalid_argument("no stability cap tabulated for L = " +
                                        std::to_string(num_repeaters));
    }
}

Deployment make_grid_deployment(const ScenarioConfig& config) {
    config.validate();
    Deployment d;
    d.bs_position = Eigen::Vector3d(config.bs_x_m, config.bs_y_m, config.bs_height_m);
    const auto grid = grid_positions(config.num_repeaters, config.area_side_m);
    d.repeater_positions.reserve(grid.size());
    for (const auto& p : grid) {
        d.repeater_positions.emplace_back(p.x(), p.y(), config.repeater_height_m);
    }
    d.active_mask.assign(grid.size(), true);
    return d;
}

Deployment prune_by_bs_distance(const Deployment& deployment, double threshold_m) {
    if (threshold_m < 0) throw std::invalid_argument("prune threshold must be nonnegative");
    Deployment out = deployment;
    for (std::size_t l = 0; l < out.repeater_positions.size(); ++l) {
        const double dx = out.repeater_positions[l].x() - out.bs_position.x();
        const double dy = out.repeater_positions[l].y() - out.bs_position.y();
        if (std::hypot(dx, dy) < threshold_m) out.active_mask[l] = false;
    }
    return out;
}

std::vector<Eigen::Vector3d> uniform_ue_drop(int num_ues, const ScenarioConfig& config,
                                             RngStream& rng) {
    std::vector<Eigen::Vector3d> ues;
    ues.reserve(static_cast<std::size_t>(num_ues));
    for (int k = 0; k < num_ues; ++k) {
        const double x = rng.uniform(0.0, config.area_side_m);
        const double y = rng.uniform(0.0, config.area_side_m);
        ues.emplace_back(x, y, config.ue_height_m);
    }
    return ues;
}

std::vector<Eigen::Vector3d> cell_edge_ue_drop(int num_ues, const ScenarioConfig& config,
                                               RngStream& rng) {
    const double lo = 0.9 * config.area_side_m;
    std::vector<Eigen::Vector3d> ues;
    ues.reserve(static_cast<std::size_t>(num_ues));
    for (int k = 0; k < num_ues; ++k) {
        const double x = rng.uniform(lo, config.area_side_m);
        const double y = rng.uniform(lo, config.area_side_m);
        ues.emplace_back(x, y, config.ue_height_m);
    }
    return ues;
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
    j = nlohmann::json{{"area_side_m", c.area_side_m},
                       {"bs_x_m", c.bs_x_m},
                       {"bs_y_m", c.bs_y_m},
                       {"bs_height_m", c.bs_height_m},
                       {"num_bs_antennas", c.num_bs_antennas},
                       {"num_repeaters", c.num_repeaters},
                       {"num_ues", c.num_ues},
                       {"repeater_height_m", c.repeater_height_m},
                       {"ue_height_m", c.ue_height_m},
                       {"uplink_power_w", c.uplink_power_w},
                       {"p_max_w", c.p_max_w},
                       {"alpha_max", c.alpha_max},
                       {"bandwidth_hz", c.bandwidth_hz},
                       {"carrier_hz", c.carrier_hz},
                       {"noise_figure_db", c.noise_figure_db},
                       {"k_factor_db", c.k_factor_db},
                       {"p_stat_w", c.p_stat_w},
                       {"delta_p", c.delta_p},
                       {"p_sleep_w", c.p_sleep_w},
                       {"epsilon", c.epsilon},
                       {"rng_seed", c.rng_seed},
                       {"ccp_max_iterations", c.ccp_max_iterations},
                       {"solver_max_iterations", c.solver_max_iterations},
                       {"lambda", c.lambda},
                       {"alpha_thr_rel", c.alpha_thr_rel},
                       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
    static const ScenarioConfig defaults;
    auto get = [&j](const char* key, auto fallback) {
        using T = decltype(fallback);
        return j.contains(key) ? j.at(key).get<T>() : fallback;
    };
    // Unknown keys are configuration errors: catch typos early.
    static const char* known[] = {
        "area_side_m",     "bs_x_m",          "bs_y_m",        "bs_height_m",
        "num_bs_antennas", "num_repeaters",   "num_ues",       "repeater_height_m",
        "ue_height_m",     "uplink_power_w",  "p_max_w",       "alpha_max",
        "bandwidth_hz",    "carrier_hz",      "noise_figure_db", "k_factor_db",
        "p_stat_w",        "delta_p",         "p_sleep_w",     "epsilon",
        "rng_seed",        "ccp_max_iterations", "solver_max_iterations", "lambda",
        "alpha_thr_rel",   "threads"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || (it.key() == k);
        if (!ok) throw std::invalid_argument("unknown scenario key: " + it.key());
    }
    c.area_side_m = get("area_side_m", defaults.area_side_m);
    c.bs_x_m = get("bs_x_m", defaults.bs_x_m);
    c.bs_y_m = get("bs_y_m", defaults.bs_y_m);
    c.bs_height_m = get("bs_height_m", defaults.bs_height_m);
    c.num_bs_antennas = get("num_bs_antennas", defaults.num_bs_antennas);
    c.num_repeaters = get("num_repeaters", defaults.num_repeaters);
    c.num_ues = get("num_ues", defaults.num_ues);
    c.repeater_height_m = get("repeater_height_m", defaults.repeater_height_m);
    c.ue_height_m = get("ue_height_m", defaults.ue_height_m);
    c.uplink_power_w = get("uplink_power_w", defaults.uplink_power_w);
    c.p_max_w = get("p_max_w", defaults.p_max_w);
    c.alpha_max = get("alpha_max", defaults.alpha_max);
    c.bandwidth_hz = get("bandwidth_hz", defaults.bandwidth_hz);
    c.carrier_hz = get("carrier_hz", defaults.carrier_hz);
    c.noise_figure_db = get("noise_figure_db", defaults.noise_figure_db);
    c.k_factor_db = get("k_factor_db", defaults.k_factor_db);
    c.p_stat_w = get("p_stat_w", defaults.p_stat_w);
    c.delta_p = get("delta_p", defaults.delta_p);
    c.p_sleep_w = get("p_sleep_w", defaults.p_sleep_w);
    c.epsilon = get("epsilon", defaults.epsilon);
    c.rng_seed = get("rng_seed", defaults.rng_seed);
    c.ccp_max_iterations = get("ccp_max_iterations", defaults.ccp_max_iterations);
    c.solver_max_iterations = get("solver_max_iterations", defaults.solver_max_iterations);
    c.lambda = get("lambda", defaults.lambda);
    c.alpha_thr_rel = get("alpha_thr_rel", defaults.alpha_thr_rel);
    c.threads = get("threads", defaults.threads);
}

void to_json(nlohmann::json& j, const Deployment& d) {
    auto points = [](const std::vector<Eigen::Vector3d>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : v) arr.push_back({p.x(), p.y(), p.z()});
        return arr;
    };
    j = nlohmann::json{{"bs_position", {d.bs_position.x(), d.bs_position.y(), d.bs_position.z()}},
                       {"repeater_positions", points(d.repeater_positions)},
                       {"ue_positions", points(d.ue_positions)},
                       {"active_mask", d.active_mask}};
}

void from_json(const nlohmann::json& j, Deployment& d) {
    auto points = [](const nlohmann::json& arr) {
        std::vector<Eigen::Vector3d> v;
        v.reserve(arr.size());
        for (const auto& p : arr) {
            v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        }
        return v;
    };
    const auto& bs = j.at("bs_position");
    d.bs_position =
        Eigen::Vector3d(bs.at(0).get<double>(), bs.at(1).get<double>(), bs.at(2).get<double>());
    d.repeater_positions = points(j.at("repeater_positions"));
    d.ue_positions = points(j.at("ue_positions"));
    d.active_mask = j.at("active_mask").get<std::vector<bool>>();
    if (d.active_mask.size() != d.repeater_positions.size()) {
        throw std::invalid_argument("active_mask length must match repeater count");
    }
}

}  // namespace ramimo
