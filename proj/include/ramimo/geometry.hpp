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

#ifndef RAMIMO_GEOMETRY_HPP
#define RAMIMO_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ramimo/rng.hpp"

#include <json.hpp>

namespace ramimo {

// --- unit helpers ---------------------------------------------------------

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Converts a configured amplification cap in dB into the linear gain used by
/// the signal model. Single definition so the convention is set in one place.
inline double amplification_from_db(double db) { return std::pow(10.0, db / 10.0); }

// --- scenario configuration ------------------------------------------------

/// Geometry, radio, optimizer, and power-model parameters for one scenario.
/// Defaults are the simulator's reference setup; load named variants through
/// scenario_preset().
struct ScenarioConfig {
    double area_side_m = 2000.0;
    double bs_x_m = 1000.0;
    double bs_y_m = 1000.0;
    double bs_height_m = 25.0;
    int num_bs_antennas = 64;  // M
    int num_repeaters = 64;    // L
    int num_ues = 8;           // K
    double repeater_height_m = 15.0;
    double ue_height_m = 1.5;
    double uplink_power_w = dbm_to_watts(20.0);  // per-UE transmit power rho_u
    double p_max_w = dbm_to_watts(38.0);         // repeater output-power cap
    double alpha_max = amplification_from_db(58.0);  // stability cap, linear
    double bandwidth_hz = 20e6;
    double carrier_hz = 3.5e9;
    double noise_figure_db = 5.0;  // repeater and BS alike
    double k_factor_db = 9.0;      // Rician K-factor on LOS links
    double p_stat_w = 24.26;       // static active-mode consumption
    double delta_p = 2.0;          // load-dependent consumption slope
    double p_sleep_w = 4.72;       // sleep-mode consumption
    double epsilon = 1e-5;         // CCP relative-change stopping tolerance
    std::uint64_t rng_seed = 1;

    // Optimizer knobs (all exposed; zero lambda means "auto").
    int ccp_max_iterations = 50;
    int solver_max_iterations = 100;
    double lambda = 0.0;          // slack penalty; 0 -> 10*K*max_k(threshold)
    // Activation threshold as a fraction of each gain's box upper bound.
    // Power-minimizing solves leave unused gains at the interior-point floor
    // (~1e-7..1e-6 of the box) while gains that carry signal come out at
    // 1e-4 and above; 1e-5 sits in the empty decade between the two modes.
    double alpha_thr_rel = 1e-5;
    int threads = 1;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Named presets. "table1" (alias "default") is the reference parameter set
/// above with L = 64; unknown names throw std::invalid_argument.
ScenarioConfig scenario_preset(const std::string& name);

// --- deployments ------------------------------------------------------------

struct Deployment {
    Eigen::Vector3d bs_position{1000.0, 1000.0, 25.0};
    std::vector<Eigen::Vector3d> repeater_positions;
    std::vector<Eigen::Vector3d> ue_positions;
    std::vector<bool> active_mask;  // one flag per repeater

    int num_repeaters() const { return static_cast<int>(repeater_positions.size()); }
    int num_active() const;
};

/// Centers of a sqrt(count) x sqrt(count) square-cell partition of the area,
/// row-major: spacing s = area_side/sqrt(count), first point (s/2, s/2).
/// Throws std::invalid_argument if count is not a perfect square.
std::vector<Eigen::Vector2d> grid_positions(int count, double area_side_m);

/// Tabulated amplification stability cap in dB for a grid of L repeaters in
/// the reference area. Only L in {16, 64, 100, 400} is tabulated; other
/// values throw (no interpolation).
double alpha_max_lookup_db(int num_repeaters);

/// Grid of repeaters at repeater height plus the BS at the configured
/// position; all repeaters active, no UEs.
Deployment make_grid_deployment(const ScenarioConfig& config);

/// Clears active_mask for every repeater whose 2D ground distance to the BS
/// is strictly below threshold_m. Positions are left untouched.
Deployment prune_by_bs_distance(const Deployment& deployment, double threshold_m);

/// K i.i.d. uniform UE positions over the full area square, at UE height.
std::vector<Eigen::Vector3d> uniform_ue_drop(int num_ues, const ScenarioConfig& config,
                                             RngStream& rng);

/// K i.i.d. uniform UE positions in the far-corner band
/// [0.9*side, side] x [0.9*side, side], at UE height.
std::vector<Eigen::Vector3d> cell_edge_ue_drop(int num_ues, const ScenarioConfig& config,
                                               RngStream& rng);

// --- JSON serialization ------------------------------------------------------

void to_json(nlohmann::json& j, const ScenarioConfig& c);
void from_json(const nlohmann::json& j, ScenarioConfig& c);
void to_json(nlohmann::json& j, const Deployment& d);
void from_json(const nlohmann::json& j, Deployment& d);

}  // namespace ramimo

#endif  // RAMIMO_GEOMETRY_HPP
