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

#ifndef RAMIMO_OPTIMIZER_HPP
#define RAMIMO_OPTIMIZER_HPP

#include <Eigen/Dense>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/geometry.hpp"
#include "ramimo/mimo.hpp"

namespace ramimo {

// The nonconvex quantity being optimized is, per UE k, the quadratic form
// z_k^H C_k^{-1} z_k (the SINR divided by the UE power). Around an expansion
// gain vector alpha0 it admits the concave global under-estimator
//     lhs_k(alpha) = 2 Re(b_k^H z_k(alpha)) - tr(D_k C_k(alpha)),
// with b_k = C_k(alpha0)^{-1} z_k(alpha0) and D_k = b_k b_k^H, which is tight
// at alpha0. Written over the L free gains it is a concave quadratic with PSD
// curvature, so each convexified subproblem is SOC-representable and solved
// by the interior-point method in solver.hpp.

/// Expansion data: column k holds b_k (D_k = b_k b_k^H is implicit, rank 1).
struct LinearizationPoint {
    Eigen::MatrixXcd b;  // M x K
};

LinearizationPoint linearize(const ChannelRealization& r, const Eigen::VectorXd& alpha0,
                             double rho_u_w);

/// Real coefficients of lhs_k over the L free gains:
///     lhs_k(a) = c0 + lin' a - a' quad a,   quad symmetric PSD.
/// The fixed unit direct-path entry has been eliminated algebraically. The
/// building blocks are kept for inspection: r = 2 Re(Htilde_k^H b_k) over the
/// stacked L+1 coordinates, g_tilde_l = sigma_r^2 |g_l^H b_k|^2, and
/// d = sigma_bs^2 ||b_k||^2.
struct ConstraintCoeffs {
    double c0 = 0.0;
    Eigen::VectorXd lin;      // L
    Eigen::MatrixXd quad;     // L x L
    Eigen::VectorXd r;        // L + 1
    Eigen::VectorXd g_tilde;  // L, nonnegative
    double d = 0.0;           // nonnegative

    double surrogate(const Eigen::VectorXd& alpha) const;
};

ConstraintCoeffs assemble_coeffs(const ChannelRealization& r, const LinearizationPoint& lin,
                                 double rho_u_w, int k);

/// All K constraint coefficient sets, sharing the stacked-channel
/// precomputation across UEs.
std::vector<ConstraintCoeffs> assemble_all_coeffs(const ChannelRealization& r,
                                                  const LinearizationPoint& lin, double rho_u_w);

// --- convex subproblems -------------------------------------------------------

enum class SubStatus { optimal, infeasible, max_iterations };

struct SubproblemSolution {
    Eigen::VectorXd alpha;   // L (zeros on eliminated indices)
    double t = 0.0;          // max-min objective value (lhs units)
    Eigen::VectorXd slacks;  // K (min-pow only)
    SubStatus status = SubStatus::optimal;
};

struct SubproblemOptions {
    double tol = 1e-8;        // duality-gap target, relative
    int max_iterations = 100;  // Newton steps per barrier stage
};

/// max t  s.t.  lhs_k(alpha) >= t for all k,  0 <= alpha <= box_upper.
/// Indices with box_upper = 0 are eliminated before the solve. Always
/// feasible, so status is never `infeasible`.
SubproblemSolution solve_maxmin_subproblem(const std::vector<ConstraintCoeffs>& coeffs,
                                           const Eigen::VectorXd& box_upper,
                                           const Eigen::VectorXd* warm_start = nullptr,
                                           const SubproblemOptions& options = {});

/// min sum_l cost_c(l) alpha_l + lambda sum_k f_k
/// s.t. lhs_k(alpha) + f_k >= threshold_over_rho(k), f >= 0, boxes.
/// The slacks keep the program feasible from any start.
SubproblemSolution solve_minpow_subproblem(const std::vector<ConstraintCoeffs>& coeffs,
                                           const Eigen::VectorXd& box_upper,
                                           const Eigen::VectorXd& cost_c,
                                           const Eigen::VectorXd& threshold_over_rho,
                                           double lambda,
                                           const Eigen::VectorXd* warm_start = nullptr,
                                           const SubproblemOptions& options = {});

// --- iterative drivers --------------------------------------------------------

/// Stopping statistic ||a_new - a_old||^2 / ||a_old||^2, falling back to the
/// absolute ||a_new||^2 when a_old is the zero vector.
double relative_change(const Eigen::VectorXd& alpha_new, const Eigen::VectorXd& alpha_old);

struct TraceRow {
    int iteration = 0;
    double objective = 0.0;        // subproblem objective (t or power sum)
    double min_sinr = 0.0;         // true evaluated floor, linear
    double max_slack = 0.0;        // min-pow only
    double rel_change = 0.0;
};

struct MaxMinResult {
    Eigen::VectorXd alpha;
    double sinr_floor = 0.0;  // true min-UE SINR at alpha, linear
    bool converged = false;
    int iterations = 0;
    std::vector<TraceRow> trace;
};

/// Iterated linearize / assemble / solve, started from the per-repeater
/// maximum gains, stopped on relative change <= config.epsilon or the
/// iteration cap. Inactive repeaters (mask false) are held at zero.
MaxMinResult maxmin_ccp(const ChannelRealization& r, const ScenarioConfig& config,
                        const std::vector<bool>* active = nullptr);

struct MinPowResult {
    Eigen::VectorXd alpha;
    Eigen::VectorXd slacks;
    double objective = 0.0;  // sum_l c_l alpha_l at the final point
    bool feasible = false;   // max slack <= 1e-4 at convergence
    bool converged = false;
    int iterations = 0;
    std::vector<TraceRow> trace;
};

/// Slack-regularized power minimization meeting per-UE SINR thresholds
/// (linear). lambda of zero in the config selects the automatic value
/// 10 * K * max_k(threshold_k / rho_u).
MinPowResult minpow_fpp(const ChannelRealization& r, const ScenarioConfig& config,
                        const Eigen::VectorXd& sinr_thresholds,
                        const std::vector<bool>* active = nullptr);

}  // namespace ramimo

#endif  // RAMIMO_OPTIMIZER_HPP
