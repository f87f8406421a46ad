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

#include "ramimo/energy.hpp"

#include <stdexcept>

#include <json.hpp>

#include "ramimo/mimo.hpp"
#include "ramimo/optimizer.hpp"

namespace ramimo {

PowerModel power_model_from(const ScenarioConfig& config) {
    return PowerModel{config.p_stat_w, config.delta_p, config.p_sleep_w};
}

double repeater_power(RepeaterState state, double p_out_w, const PowerModel& model) {
    if (p_out_w < 0) throw std::invalid_argument("output power must be nonnegative");
    if (state == RepeaterState::sleep) return model.p_sleep_w;
    return model.p_stat_w + model.delta_p * p_out_w;
}

bool activation_indicator(double alpha, double alpha_thr) { return alpha > alpha_thr; }

RepeaterState or_rule(const std::vector<bool>& indicators) {
    for (bool i : indicators) {
        if (i) return RepeaterState::active;
    }
    return RepeaterState::sleep;
}

RepeaterState majority_rule(const std::vector<bool>& indicators) {
    int count = 0;
    for (bool i : indicators) count += i ? 1 : 0;
    return 2 * count > static_cast<int>(indicators.size()) ? RepeaterState::active
                                                           : RepeaterState::sleep;
}

namespace {

std::vector<bool> active_mask(const std::vector<RepeaterState>& states) {
    std::vector<bool> mask(states.size());
    for (std::size_t l = 0; l < states.size(); ++l) {
        mask[l] = states[l] == RepeaterState::active;
    }
    return mask;
}

void check_blocks(const std::vector<RepeaterState>& states,
                  const std::vector<ChannelRealization>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("schedule needs at least one block");
    for (const auto& b : blocks) {
        if (b.num_repeaters() != static_cast<int>(states.size())) {
            throw std::invalid_argument("state count must match repeater count");
        }
    }
}

}  // namespace

SleepSchedule long_term_schedule(const std::vector<RepeaterState>& states,
                                 const std::vector<ChannelRealization>& blocks,
                                 const ScenarioConfig& config) {
    check_blocks(states, blocks);
    const int L = static_cast<int>(states.size());
    const int T = static_cast<int>(blocks.size());
    const std::vector<bool> mask = active_mask(states);

    SleepSchedule s;
    s.states = states;
    s.alpha_per_block.resize(L, T);
    s.block_feasible.assign(static_cast<std::size_t>(T), true);
    for (int t = 0; t < T; ++t) {
        s.alpha_per_block.col(t) = max_feasible_alpha_all(
            blocks[static_cast<std::size_t>(t)], config.alpha_max, config.p_max_w,
            config.uplink_power_w, &mask);
    }
    return s;
}

SleepSchedule short_term_schedule(const std::vector<RepeaterState>& states,
                                  const std::vector<ChannelRealization>& blocks,
                                  const Eigen::VectorXd& sinr_thresholds,
                                  const ScenarioConfig& config,
                                  long* nonconverged_solves, long* total_solves) {
    check_blocks(states, blocks);
    const int L = static_cast<int>(states.size());
    const int T = static_cast<int>(blocks.size());
    const std::vector<bool> mask = active_mask(states);

    SleepSchedule s;
    s.states = states;
    s.alpha_per_block.resize(L, T);
    s.block_feasible.assign(static_cast<std::size_t>(T), true);
    for (int t = 0; t < T; ++t) {
        const auto& block = blocks[static_cast<std::size_t>(t)];
        const MinPowResult res = minpow_fpp(block, config, sinr_thresholds, &mask);
        if (total_solves) ++*total_solves;
        if (nonconverged_solves && !res.converged) ++*nonconverged_solves;
        if (res.feasible) {
            s.alpha_per_block.col(t) = res.alpha;
        } else {
            // Keep the block well-defined: fall back to maximum gains on the
            // active subset and record the miss.
            s.alpha_per_block.col(t) = max_feasible_alpha_all(
                block, config.alpha_max, config.p_max_w, config.uplink_power_w, &mask);
            s.block_feasible[static_cast<std::size_t>(t)] = false;
        }
    }
    return s;
}

double total_power(const SleepSchedule& schedule, const std::vector<ChannelRealization>& blocks,
                   double rho_u_w, const PowerModel& model) {
    check_blocks(schedule.states, blocks);
    const int L = static_cast<int>(schedule.states.size());
    const int T = static_cast<int>(blocks.size());
    if (schedule.alpha_per_block.rows() != L || schedule.alpha_per_block.cols() != T) {
        throw std::invalid_argument("schedule/block shape mismatch");
    }
    double sum = 0.0;
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd alpha = schedule.alpha_per_block.col(t);
        for (int l = 0; l < L; ++l) {
            const double p_out =
                repeater_output_power(blocks[static_cast<std::size_t>(t)], alpha, rho_u_w, l);
            sum += repeater_power(schedule.states[static_cast<std::size_t>(l)], p_out, model);
        }
    }
    return sum / T;
}

void to_json(nlohmann::json& j, const SleepSchedule& s) {
    nlohmann::json states = nlohmann::json::array();
    for (RepeaterState st : s.states) {
        states.push_back(st == RepeaterState::active ? "active" : "sleep");
    }
    nlohmann::json alpha = nlohmann::json::array();
    for (Eigen::Index t = 0; t < s.alpha_per_block.cols(); ++t) {
        nlohmann::json col = nlohmann::json::array();
        for (Eigen::Index l = 0; l < s.alpha_per_block.rows(); ++l) {
            col.push_back(s.alpha_per_block(l, t));
        }
        alpha.push_back(col);
    }
    j = nlohmann::json{
        {"states", states}, {"alpha_per_block", alpha}, {"block_feasible", s.block_feasible}};
}

void from_json(const nlohmann::json& j, SleepSchedule& s) {
    s.states.clear();
    for (const auto& st : j.at("states")) {
        const auto name = st.get<std::string>();
        if (name == "active") {
            s.states.push_back(RepeaterState::active);
        } else if (name == "sleep") {
            s.states.push_back(RepeaterState::sleep);
        } else {
            throw std::invalid_argument("unknown repeater state: " + name);
        }
    }
    const auto& alpha = j.at("alpha_per_block");
    const auto T = static_cast<Eigen::Index>(alpha.size());
    const auto L = static_cast<Eigen::Index>(s.states.size());
    s.alpha_per_block.resize(L, T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& col = alpha.at(static_cast<std::size_t>(t));
        if (static_cast<Eigen::Index>(col.size()) != L) {
            throw std::invalid_argument("alpha_per_block column length mismatch");
        }
        for (Eigen::Index l = 0; l < L; ++l) {
            s.alpha_per_block(l, t) = col.at(static_cast<std::size_t>(l)).get<double>();
        }
    }
    s.block_feasible = j.at("block_feasible").get<std::vector<bool>>();
}

}  // namespace ramimo
