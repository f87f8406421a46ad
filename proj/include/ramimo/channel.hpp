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

#ifndef RAMIMO_CHANNEL_HPP
#define RAMIMO_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>

#include "ramimo/geometry.hpp"
#include "ramimo/rng.hpp"

namespace ramimo {

enum class LinkClass { ue_bs, ue_rep, rep_bs };

/// TR 38.901 UMa pathloss in dB (positive loss). The higher endpoint plays
/// the BS role, the lower one the UT role; d2d below 1 m is clamped to 1 m.
/// The effective environment height is the deterministic 1 m value, which is
/// exact for ground-level UTs and immaterial for the elevated links here
/// (their breakpoint distance exceeds the service area).
double uma_pathloss_db(double d2d_m, double h_a_m, double h_b_m, double carrier_hz, bool los);

/// TR 38.901 UMa line-of-sight probability. Elevated infrastructure-to-BS
/// links are always LOS; user links follow the published distance law.
double los_probability(double d2d_m, LinkClass link);

/// Thermal noise floor (-174 dBm/Hz) over the bandwidth plus noise figure,
/// in watts.
double noise_power_w(double bandwidth_hz, double noise_figure_db);

/// Rician sample: sqrt(beta) * ( sqrt(kf/(1+kf)) e^{j phi} steering
///                              + sqrt(1/(1+kf)) w ),  w ~ CN(0, I).
/// phi is a uniform common phase, drawn even when kf = 0 so that the stream
/// layout does not depend on the LOS state.
Eigen::VectorXcd rician_draw(double beta, double k_factor_linear,
                             const Eigen::VectorXcd& steering, RngStream& rng);

/// Uniform linear array along the x-axis, half-wavelength spacing; azimuth is
/// measured from broadside, so azimuth 0 gives the all-ones vector.
Eigen::VectorXcd array_response(double azimuth_rad, int num_antennas);

/// Large-scale state for one UE drop: linear power gains (pathloss +
/// shadowing) and frozen LOS flags for every link. Deterministic given the
/// positions and the drop-level stream.
struct LargeScale {
    Eigen::MatrixXd beta_ue_rep;  // L x K
    Eigen::VectorXd beta_rep_bs;  // L
    Eigen::VectorXd beta_ue_bs;   // K
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> los_ue_rep;  // L x K
    Eigen::Array<bool, Eigen::Dynamic, 1> los_rep_bs;               // L (always true)
    Eigen::Array<bool, Eigen::Dynamic, 1> los_ue_bs;                // K
};

LargeScale compute_large_scale(const ScenarioConfig& config, const Deployment& deployment,
                               const RngStream& drop_rng);

/// One coherence block's channels. h(l,k): UE k -> repeater l (scalar link);
/// g.col(l): repeater l -> BS; h_bar.col(k): UE k -> BS.
struct ChannelRealization {
    Eigen::MatrixXcd h;      // L x K
    Eigen::MatrixXcd g;      // M x L
    Eigen::MatrixXcd h_bar;  // M x K
    double noise_rep_w = 0.0;  // sigma_r^2
    double noise_bs_w = 0.0;   // sigma_bs^2

    int num_repeaters() const { return static_cast<int>(g.cols()); }
    int num_antennas() const { return static_cast<int>(g.rows()); }
    int num_ues() const { return static_cast<int>(h_bar.cols()); }
};

/// Draws one coherence block. Channels for inactive repeaters are still
/// generated (activation is applied downstream through the gain vector), and
/// each matrix uses its own derived substream, so e.g. the direct-path
/// columns do not depend on the repeater count.
ChannelRealization draw_channels(const ScenarioConfig& config, const Deployment& deployment,
                                 const LargeScale& large_scale, const RngStream& block_rng);

// --- JSON serialization (regression bundles, CLI `solve` input) -------------

void to_json(nlohmann::json& j, const ChannelRealization& r);
void from_json(const nlohmann::json& j, ChannelRealization& r);

}  // namespace ramimo

#endif  // RAMIMO_CHANNEL_HPP
