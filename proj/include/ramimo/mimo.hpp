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

#ifndef RAMIMO_MIMO_HPP
#define RAMIMO_MIMO_HPP

#include <Eigen/Dense>

#include "ramimo/channel.hpp"
#include "ramimo/geometry.hpp"

namespace ramimo {

// All gain vectors alpha are length L with entries in [0, alpha_max];
// sleeping or pruned repeaters carry alpha_l = 0, which is numerically
// identical to removing them from the scenario. Matrix solves throughout use
// Hermitian factorizations, never explicit inverses.

/// Per-UE stacked channel: column l is h(l,k) * g.col(l); the last column is
/// the direct path h_bar.col(k). Size M x (L+1).
Eigen::MatrixXcd stack_H(const ChannelRealization& r, int k);

/// Composite channels for all UEs: z.col(k) = sum_l alpha_l h(l,k) g_l +
/// h_bar.col(k). Size M x K.
Eigen::MatrixXcd composite_channel(const ChannelRealization& r, const Eigen::VectorXd& alpha);

/// Covariance of everything UE k's combiner treats as noise: other UEs'
/// signals, amplified repeater noise, and BS thermal noise.
/// C_k = rho_u sum_{i != k} z_i z_i^H + sigma_r^2 sum_l alpha_l^2 g_l g_l^H
///       + sigma_bs^2 I.
Eigen::MatrixXcd colored_noise_cov(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                                   double rho_u_w, int k);

/// Post-combining SINR of UE k under the LMMSE combiner:
/// rho_u z_k^H C_k^{-1} z_k.
double lmmse_sinr(const ChannelRealization& r, const Eigen::VectorXd& alpha, double rho_u_w,
                  int k);

/// All K SINRs sharing the factored per-block precomputations; equals the
/// per-UE path up to floating-point summation order.
Eigen::VectorXd lmmse_sinr_all(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                               double rho_u_w);

/// Unnormalized LMMSE combiner w_k = C_k^{-1} z_k.
Eigen::VectorXcd lmmse_combiner(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                                double rho_u_w, int k);

/// c_l = sqrt(rho_u ||h_l||^2 + sigma_r^2): repeater l's output amplitude per
/// unit gain; P_out,l = c_l^2 alpha_l^2.
double repeater_c(const ChannelRealization& r, double rho_u_w, int l);

double repeater_output_power(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                             double rho_u_w, int l);

/// Largest admissible gain for repeater l: min(alpha_max, sqrt(p_max)/c_l).
double max_feasible_alpha(const ChannelRealization& r, double alpha_max, double p_max_w,
                          double rho_u_w, int l);

/// Per-repeater box uppers; zero where active is false. Passing no mask means
/// all active. This is also the MaxPow gain assignment.
Eigen::VectorXd max_feasible_alpha_all(const ChannelRealization& r, double alpha_max,
                                       double p_max_w, double rho_u_w,
                                       const std::vector<bool>* active = nullptr);

/// MMSE SINRs under white noise: SINR_k = rho h_k^H (sum_{i!=k} rho h_i h_i^H
/// + sigma2 I)^{-1} h_k, for the columns of H. Shared by the cell-free
/// baseline and equivalent to lmmse_sinr with L = 0.
Eigen::VectorXd mmse_sinr_white(const Eigen::MatrixXcd& H, double rho_w, double sigma2_w);

// --- cell-free baseline ------------------------------------------------------

/// Large-scale state for the distributed-AP baseline (per-AP/UE gains and
/// frozen LOS flags, same link model as UE-to-repeater links).
struct CfLargeScale {
    Eigen::MatrixXd beta;                                        // M_aps x K
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> los;     // M_aps x K
};

CfLargeScale cf_large_scale(const ScenarioConfig& config,
                            const std::vector<Eigen::Vector3d>& ap_positions,
                            const std::vector<Eigen::Vector3d>& ue_positions,
                            const RngStream& drop_rng);

/// One coherence block of AP-UE channels (M_aps x K).
Eigen::MatrixXcd cf_draw_channels(const ScenarioConfig& config, const CfLargeScale& ls,
                                  const RngStream& block_rng);

/// Grid APs at repeater height with centralized MMSE combining. The AP count
/// must equal the BS antenna count so the baselines use the same number of
/// receive chains. Draws large-scale and one fading block from rng.
Eigen::VectorXd cfmmimo_sinr(const std::vector<Eigen::Vector3d>& ap_positions,
                             const std::vector<Eigen::Vector3d>& ue_positions,
                             const ScenarioConfig& config, const RngStream& rng);

}  // namespace ramimo

#endif  // RAMIMO_MIMO_HPP
