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

#ifndef RAMIMO_ENERGY_HPP
#define RAMIMO_ENERGY_HPP

#include <Eigen/Dense>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/geometry.hpp"

namespace ramimo {

enum class RepeaterState { active, sleep };

struct PowerModel {
    double p_stat_w = 24.26;  // static consumption while active
    double delta_p = 2.0;     // slope of the load-dependent consumption
    double p_sleep_w = 4.72;  // sleep-mode consumption
};

PowerModel power_model_from(const ScenarioConfig& config);

/// Consumption of one repeater: p_stat + delta_p * p_out while active,
/// p_sleep regardless of load while sleeping.
double repeater_power(RepeaterState state, double p_out_w, const PowerModel& model);

/// True iff the gain strictly exceeds the activation threshold.
bool activation_indicator(double alpha, double alpha_thr);

/// Active iff the repeater was above threshold in any observed block.
RepeaterState or_rule(const std::vector<bool>& indicators);

/// Active iff the repeater was above threshold in strictly more than half of
/// the observed blocks; ties sleep.
RepeaterState majority_rule(const std::vector<bool>& indicators);

/// Per-repeater states plus the per-block gain assignments they induce.
/// Sleeping repeaters hold alpha = 0 in every block.
struct SleepSchedule {
    std::vector<RepeaterState> states;  // L
    Eigen::MatrixXd alpha_per_block;    // L x num_blocks
    std::vector<bool> block_feasible;   // per block; always true for long-term
};

/// Long-term control: active repeaters run at their per-block maximum
/// feasible gain, sleeping ones at zero.
SleepSchedule long_term_schedule(const std::vector<RepeaterState>& states,
                                 const std::vector<ChannelRealization>& blocks,
                                 const ScenarioConfig& config);

/// Short-term control: per block, power-minimizing gains over the active
/// subset only, meeting the given per-UE SINR thresholds (linear). Infeasible
/// blocks fall back to maximum feasible gains on the active subset and are
/// flagged false in block_feasible. When given, the counters accumulate how
/// many per-block solves ran and how many of them stopped at the iteration
/// cap (for run bookkeeping; they are added to, not reset).
SleepSchedule short_term_schedule(const std::vector<RepeaterState>& states,
                                  const std::vector<ChannelRealization>& blocks,
                                  const Eigen::VectorXd& sinr_thresholds,
                                  const ScenarioConfig& config,
                                  long* nonconverged_solves = nullptr,
                                  long* total_solves = nullptr);

/// Mean over blocks of the summed per-repeater consumption.
double total_power(const SleepSchedule& schedule, const std::vector<ChannelRealization>& blocks,
                   double rho_u_w, const PowerModel& model);

void to_json(nlohmann::json& j, const SleepSchedule& s);
void from_json(const nlohmann::json& j, SleepSchedule& s);

}  // namespace ramimo

#endif  // RAMIMO_ENERGY_HPP
