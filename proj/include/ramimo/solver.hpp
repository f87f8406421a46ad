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

#ifndef RAMIMO_SOLVER_HPP
#define RAMIMO_SOLVER_HPP

#include <Eigen/Dense>
#include <vector>

namespace ramimo {

// Convex program
//     minimize    cost' x
//     subject to  q_j(x) = c0_j + b_j' x - x' A_j x >= 0     (A_j symmetric PSD)
//                 lo_i <= x_i <= hi_i                         (either side may be inf)
// solved by a log-barrier interior-point method with damped Newton centering.
// Every constraint here is second-order-cone representable (the quadratic
// parts are negated PSD forms), so the barrier is self-concordant and the
// standard duality-gap bound (#log terms)/tau applies at the central points.

struct QcqpConstraint {
    double c0 = 0.0;
    Eigen::VectorXd b;
    Eigen::MatrixXd A;  // symmetric PSD; may be empty (0x0) meaning zero

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;  // b - 2 A x
};

struct QcqpProblem {
    Eigen::VectorXd cost;
    std::vector<QcqpConstraint> constraints;
    Eigen::VectorXd lo;  // -inf entries mean unbounded below
    Eigen::VectorXd hi;  // +inf entries mean unbounded above
};

struct QcqpOptions {
    double tol = 1e-6;        // relative duality-gap target
    double tau0 = 1.0;        // initial barrier weight on the objective
    // Barrier weight growth per stage.  Kept moderate: the damped-Newton
    // distance between consecutive central-path points grows like
    // m*(mu - 1 - log mu), so large factors blow past any fixed per-stage
    // Newton budget once the constraint count reaches the tens.
    double mu = 5.0;
    int max_newton_per_stage = 100;
    int max_stages = 64;
    double center_tol = 1e-9;  // Newton-decrement^2 / 2 threshold
};

enum class SolveStatus { optimal, max_iterations };

struct QcqpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    double gap = 0.0;  // certified duality-gap bound at the final point
    SolveStatus status = SolveStatus::optimal;
    int newton_steps = 0;
};

/// x0 must be strictly feasible (all q_j(x0) > 0, boxes strict); throws
/// std::invalid_argument otherwise. Callers construct such starts explicitly.
QcqpResult solve_qcqp(const QcqpProblem& problem, const Eigen::VectorXd& x0,
                      const QcqpOptions& options = {});

}  // namespace ramimo

#endif  // RAMIMO_SOLVER_HPP
