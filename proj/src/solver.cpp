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

#include "ramimo/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ramimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool has_quadratic(const QcqpConstraint& c) { return c.A.size() > 0; }

}  // namespace

double QcqpConstraint::value(const Eigen::VectorXd& x) const {
    double v = c0 + b.dot(x);
    if (has_quadratic(*this)) v -= x.dot(A * x);
    return v;
}

Eigen::VectorXd QcqpConstraint::gradient(const Eigen::VectorXd& x) const {
    if (!has_quadratic(*this)) return b;
    return b - 2.0 * (A * x);
}

QcqpResult solve_qcqp(const QcqpProblem& problem, const Eigen::VectorXd& x0,
                      const QcqpOptions& options) {
    const int n = static_cast<int>(problem.cost.size());
    const int m_q = static_cast<int>(problem.constraints.size());
    if (x0.size() != n || problem.lo.size() != n || problem.hi.size() != n) {
        throw std::invalid_argument("qcqp: inconsistent dimensions");
    }
    for (const auto& c : problem.constraints) {
        if (c.b.size() != n || (has_quadratic(c) && (c.A.rows() != n || c.A.cols() != n))) {
            throw std::invalid_argument("qcqp: constraint dimension mismatch");
        }
    }

    QcqpResult result;
    if (n == 0) {
        result.x = Eigen::VectorXd();
        return result;
    }

    // Count barrier log terms: constraints plus finite box sides.
    int m_total = m_q;
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(problem.lo(i))) ++m_total;
        if (std::isfinite(problem.hi(i))) ++m_total;
    }
    if (m_total == 0) {
        throw std::invalid_argument("qcqp: problem needs at least one constraint or finite bound");
    }

    // Strict feasibility of the start.
    for (int i = 0; i < n; ++i) {
        if (!(x0(i) > problem.lo(i) && x0(i) < problem.hi(i))) {
            throw std::invalid_argument("qcqp: start violates box constraints strictly");
        }
    }
    for (const auto& c : problem.constraints) {
        if (!(c.value(x0) > 0)) {
            throw std::invalid_argument("qcqp: start is not strictly feasible");
        }
    }

    Eigen::VectorXd x = x0;

    // Barrier value along x (box and constraint logs), used by the line search.
    auto barrier_at = [&](const Eigen::VectorXd& pt, double tau) {
        double phi = tau * problem.cost.dot(pt);
        for (const auto& c : problem.constraints) {
            const double q = c.value(pt);
            if (q <= 0) return kInf;
            phi -= std::log(q);
        }
        for (int i = 0; i < n; ++i) {
            if (std::isfinite(problem.lo(i))) {
                const double s = pt(i) - problem.lo(i);
                if (s <= 0) return kInf;
                phi -= std::log(s);
            }
            if (std::isfinite(problem.hi(i))) {
                const double s = problem.hi(i) - pt(i);
                if (s <= 0) return kInf;
                phi -= std::log(s);
            }
        }
        return phi;
    };

    double tau = options.tau0;
    Eigen::VectorXd grad(n), dx(n);
    Eigen::MatrixXd hess(n, n);
    std::vector<double> q_vals(m_q), s1(m_q), s2(m_q);
    std::vector<Eigen::VectorXd> q_grads(m_q);

    for (int stage = 0; stage < options.max_stages; ++stage) {
        // --- center at the current tau -------------------------------------
        bool centered = false;
        for (int it = 0; it < options.max_newton_per_stage; ++it) {
            grad = tau * problem.cost;
            hess.setZero();
            for (int j = 0; j < m_q; ++j) {
                const auto& c = problem.constraints[j];
                q_vals[j] = c.value(x);
                q_grads[j] = c.gradient(x);
                const double inv_q = 1.0 / q_vals[j];
                grad.noalias() -= inv_q * q_grads[j];
                hess.noalias() += (inv_q * inv_q) * (q_grads[j] * q_grads[j].transpose());
                if (has_quadratic(c)) hess.noalias() += (2.0 * inv_q) * c.A;
            }
            for (int i = 0; i < n; ++i) {
                if (std::isfinite(problem.lo(i))) {
                    const double inv_s = 1.0 / (x(i) - problem.lo(i));
                    grad(i) -= inv_s;
                    hess(i, i) += inv_s * inv_s;
                }
                if (std::isfinite(problem.hi(i))) {
                    const double inv_s = 1.0 / (problem.hi(i) - x(i));
                    grad(i) += inv_s;
                    hess(i, i) += inv_s * inv_s;
                }
            }

            // Newton step. The barrier Hessian is PD by construction, so try
            // the plain factorization first; fall back to a ridge scaled per
            // coordinate, since barrier curvatures span many orders and an
            // absolute ridge would crush the flat directions.
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            if (!(ldlt.info() == Eigen::Success && ldlt.isPositive())) {
                const Eigen::VectorXd diag_scale =
                    hess.diagonal().cwiseAbs().cwiseMax(1e-300);
                double ridge = 1e-14;
                for (int attempt = 0; attempt < 8; ++attempt) {
                    ldlt.compute(hess +
                                 (ridge * diag_scale).asDiagonal().toDenseMatrix());
                    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
                    ridge *= 100.0;
                }
            }
            dx = ldlt.solve(-grad);
            const double decrement2 = -grad.dot(dx);
            if (std::isfinite(decrement2) && decrement2 >= 0 &&
                0.5 * decrement2 <= options.center_tol) {
                centered = true;
                break;
            }
            if (!(decrement2 > 0)) break;  // factorization failed us; uncentered

            // Largest step keeping everything strictly feasible; all the
            // needed quantities are quadratic along the ray.
            double t_max = 1.0 / 0.99;
            for (int j = 0; j < m_q; ++j) {
                const auto& c = problem.constraints[j];
                s1[j] = q_grads[j].dot(dx);
                s2[j] = has_quadratic(c) ? dx.dot(c.A * dx) : 0.0;
                if (s2[j] > 0) {
                    const double disc = s1[j] * s1[j] + 4.0 * s2[j] * q_vals[j];
                    t_max = std::min(t_max, (s1[j] + std::sqrt(disc)) / (2.0 * s2[j]));
                } else if (s1[j] < 0) {
                    t_max = std::min(t_max, -q_vals[j] / s1[j]);
                }
            }
            for (int i = 0; i < n; ++i) {
                if (dx(i) < 0 && std::isfinite(problem.lo(i))) {
                    t_max = std::min(t_max, (problem.lo(i) - x(i)) / dx(i));
                } else if (dx(i) > 0 && std::isfinite(problem.hi(i))) {
                    t_max = std::min(t_max, (problem.hi(i) - x(i)) / dx(i));
                }
            }
            double t = std::min(1.0, 0.99 * t_max);

            const double phi0 = barrier_at(x, tau);
            const double slope = grad.dot(dx);  // = -decrement2 < 0
            while (t > 1e-13 && barrier_at(x + t * dx, tau) > phi0 + 0.25 * t * slope) {
                t *= 0.5;
            }
            if (t <= 1e-13) break;  // stalled before reaching the center
            x += t * dx;
            ++result.newton_steps;
        }

        // The m/tau gap bound only certifies points near the central path; an
        // uncentered stage must not certify optimality.
        if (!centered) {
            result.x = x;
            result.objective = problem.cost.dot(x);
            result.gap = m_total / tau;
            result.status = SolveStatus::max_iterations;
            return result;
        }

        // --- check the certified gap and tighten ---------------------------
        result.objective = problem.cost.dot(x);
        result.gap = m_total / tau;
        if (result.gap <= options.tol * (1.0 + std::abs(result.objective))) {
            result.x = x;
            result.status = SolveStatus::optimal;
            return result;
        }
        tau *= options.mu;
    }

    result.x = x;
    result.status = SolveStatus::max_iterations;
    return result;
}

}  // namespace ramimo
