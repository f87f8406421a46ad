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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/geometry.hpp"
#include "ramimo/mimo.hpp"
#include "ramimo/optimizer.hpp"
#include "ramimo/rng.hpp"

using namespace ramimo;

namespace {

struct Instance {
    ScenarioConfig config;
    ChannelRealization r;
};

// Synthetic channels at physically plausible scales: the repeater path
// dominates the direct path once gains are at the power-cap level, and the
// amplified repeater noise lands near the BS noise floor.
Instance make_instance(int m, int l, int k, std::uint64_t seed) {
    Instance inst;
    inst.config = scenario_preset("table1");
    inst.config.num_bs_antennas = m;
    inst.config.num_repeaters = l;
    inst.config.num_ues = k;
    inst.config.alpha_max = amplification_from_db(70.0);
    RngStream rng(seed);
    inst.r.h = Eigen::MatrixXcd(l, k);
    inst.r.g = Eigen::MatrixXcd(m, l);
    inst.r.h_bar = Eigen::MatrixXcd(m, k);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < k; ++j) inst.r.h(i, j) = rng.cnormal() * 1e-4;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < l; ++j) inst.r.g(i, j) = rng.cnormal() * 1e-5;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) inst.r.h_bar(i, j) = rng.cnormal() * 1e-6;
    inst.r.noise_rep_w = 2.5e-13;
    inst.r.noise_bs_w = 2.5e-13;
    return inst;
}

// The quantity the surrogate under-estimates: z_k^H C_k^{-1} z_k = SINR_k/rho.
double quadratic_form(const ChannelRealization& r, const Eigen::VectorXd& alpha, double rho,
                      int k) {
    return lmmse_sinr(r, alpha, rho, k) / rho;
}

// The surrogate evaluated from its definition rather than its coefficients:
// 2 Re(b^H z(alpha)) - b^H C(alpha) b. Built from scratch (not through the
// library's composite/covariance entry points) because the polynomial is
// defined for any real alpha while the public API rejects negative gains,
// and the finite-difference probes below step in both directions.
double surrogate_by_definition(const ChannelRealization& r, const Eigen::VectorXcd& b,
                               const Eigen::VectorXd& alpha, double rho, int k) {
    const int m = r.num_antennas();
    const int n_ues = r.num_ues();
    const int n_reps = r.num_repeaters();
    Eigen::MatrixXcd z = r.h_bar;
    for (int l = 0; l < n_reps; ++l) z.noalias() += alpha(l) * r.g.col(l) * r.h.row(l);
    Eigen::MatrixXcd c = r.noise_bs_w * Eigen::MatrixXcd::Identity(m, m);
    for (int i = 0; i < n_ues; ++i) {
        if (i == k) continue;
        c.noalias() += rho * z.col(i) * z.col(i).adjoint();
    }
    for (int l = 0; l < n_reps; ++l) {
        c.noalias() += (alpha(l) * alpha(l) * r.noise_rep_w) * r.g.col(l) * r.g.col(l).adjoint();
    }
    return 2.0 * b.dot(z.col(k)).real() - b.dot(c * b).real();
}

}  // namespace

TEST_CASE("surrogate is tight at the expansion point and below elsewhere") {
    const double rho = 0.1;
    for (std::uint64_t seed : {11, 12, 13, 14, 15, 16, 17, 18, 19, 20}) {
        const Instance inst = make_instance(6, 4, 3, seed);
        RngStream rng(seed * 1000);
        const Eigen::VectorXd box =
            max_feasible_alpha_all(inst.r, inst.config.alpha_max, inst.config.p_max_w, rho);
        Eigen::VectorXd alpha0(4);
        for (int l = 0; l < 4; ++l) alpha0(l) = rng.uniform(0.0, box(l));
        const LinearizationPoint lin = linearize(inst.r, alpha0, rho);
        const auto coeffs = assemble_all_coeffs(inst.r, lin, rho);
        REQUIRE(coeffs.size() == 3);
        for (int k = 0; k < 3; ++k) {
            const double truth = quadratic_form(inst.r, alpha0, rho, k);
            CHECK(coeffs[k].surrogate(alpha0) ==
                  doctest::Approx(truth).epsilon(1e-9));
        }
        for (int t = 0; t < 10; ++t) {
            Eigen::VectorXd alpha(4);
            for (int l = 0; l < 4; ++l) alpha(l) = rng.uniform(0.0, box(l));
            for (int k = 0; k < 3; ++k) {
                const double truth = quadratic_form(inst.r, alpha, rho, k);
                CHECK(coeffs[k].surrogate(alpha) <= truth * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

TEST_CASE("coefficients reproduce the defining matrix expression") {
    const double rho = 0.1;
    const Instance inst = make_instance(5, 3, 2, 31);
    RngStream rng(32);
    Eigen::VectorXd alpha0(3);
    for (int l = 0; l < 3; ++l) alpha0(l) = rng.uniform(0.0, 5e4);
    const LinearizationPoint lin = linearize(inst.r, alpha0, rho);
    const auto coeffs = assemble_all_coeffs(inst.r, lin, rho);
    for (int k = 0; k < 2; ++k) {
        for (int t = 0; t < 8; ++t) {
            Eigen::VectorXd alpha(3);
            for (int l = 0; l < 3; ++l) alpha(l) = rng.uniform(0.0, 8e4);
            const double by_def =
                surrogate_by_definition(inst.r, lin.b.col(k), alpha, rho, k);
            CHECK(coeffs[k].surrogate(alpha) == doctest::Approx(by_def).epsilon(1e-8));
        }
    }
}

TEST_CASE("expansion at zero gain uses the direct-path whitened channel") {
    const double rho = 0.1;
    const Instance inst = make_instance(5, 3, 2, 41);
    const LinearizationPoint lin = linearize(inst.r, Eigen::VectorXd::Zero(3), rho);
    for (int k = 0; k < 2; ++k) {
        const Eigen::MatrixXcd c = colored_noise_cov(inst.r, Eigen::VectorXd::Zero(3), rho, k);
        const Eigen::VectorXcd expect = c.ldlt().solve(inst.r.h_bar.col(k));
        CHECK((lin.b.col(k) - expect).norm() / expect.norm() < 1e-10);
    }
}

TEST_CASE("coefficient polynomial identities hold exactly") {
    // The surrogate is a quadratic in alpha, so exact finite differences at
    // unit-scale steps recover c0, lin, and quad from function values of the
    // defining matrix expression.
    const double rho = 0.1;
    const Instance inst = make_instance(4, 3, 1, 51);
    RngStream rng(52);
    Eigen::VectorXd alpha0(3);
    for (int l = 0; l < 3; ++l) alpha0(l) = rng.uniform(0.0, 3e4);
    const LinearizationPoint lin = linearize(inst.r, alpha0, rho);
    const ConstraintCoeffs cc = assemble_coeffs(inst.r, lin, rho, 0);
    const auto f = [&](const Eigen::VectorXd& a) {
        return surrogate_by_definition(inst.r, lin.b.col(0), a, rho, 0);
    };
    const double s = 1e3;  // step in gain units
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(cc.c0 == doctest::Approx(f(zero)).epsilon(1e-9));
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd ep = zero, em = zero;
        ep(i) = s;
        em(i) = -s;
        CHECK(cc.lin(i) == doctest::Approx((f(ep) - f(em)) / (2.0 * s)).epsilon(1e-7));
        CHECK(cc.quad(i, i) ==
              doctest::Approx(-(f(ep) + f(em) - 2.0 * f(zero)) / (2.0 * s * s))
                  .epsilon(1e-6));
        for (int j = i + 1; j < 3; ++j) {
            Eigen::VectorXd eij = zero, ei = zero, ej = zero;
            eij(i) = s;
            eij(j) = s;
            ei(i) = s;
            ej(j) = s;
            const double cross = -(f(eij) - f(ei) - f(ej) + f(zero)) / (2.0 * s * s);
            CHECK(cc.quad(i, j) == doctest::Approx(cross).epsilon(1e-6));
            CHECK(cc.quad(i, j) == doctest::Approx(cc.quad(j, i)).epsilon(1e-12));
        }
    }
    // Curvature is PSD, as the solver requires.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cc.quad);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
}

TEST_CASE("a common phase rotation of the BS-side channels changes nothing") {
    const double rho = 0.1;
    const Instance inst = make_instance(5, 3, 2, 61);
    Instance rotated = inst;
    const std::complex<double> phase = std::polar(1.0, 1.234);
    rotated.r.g *= phase;
    rotated.r.h_bar *= phase;
    RngStream rng(62);
    Eigen::VectorXd alpha0(3);
    for (int l = 0; l < 3; ++l) alpha0(l) = rng.uniform(0.0, 5e4);
    const auto c1 = assemble_all_coeffs(inst.r, linearize(inst.r, alpha0, rho), rho);
    const auto c2 =
        assemble_all_coeffs(rotated.r, linearize(rotated.r, alpha0, rho), rho);
    for (int k = 0; k < 2; ++k) {
        CHECK(c1[k].c0 == doctest::Approx(c2[k].c0).epsilon(1e-12));
        CHECK((c1[k].lin - c2[k].lin).norm() <= 1e-12 * (1.0 + c1[k].lin.norm()));
        CHECK((c1[k].quad - c2[k].quad).norm() <= 1e-12 * (1.0 + c1[k].quad.norm()));
    }
}

TEST_CASE("max-min subproblem respects boxes and eliminates fixed indices") {
    const double rho = 0.1;
    const Instance inst = make_instance(6, 4, 3, 71);
    const Eigen::VectorXd full_box =
        max_feasible_alpha_all(inst.r, inst.config.alpha_max, inst.config.p_max_w, rho);
    Eigen::VectorXd box = full_box;
    box(2) = 0.0;  // deactivated repeater
    const LinearizationPoint lin = linearize(inst.r, Eigen::VectorXd::Zero(4), rho);
    const auto coeffs = assemble_all_coeffs(inst.r, lin, rho);
    const SubproblemSolution sol = solve_maxmin_subproblem(coeffs, box);
    CHECK(sol.status == SubStatus::optimal);
    CHECK(sol.alpha(2) == 0.0);
    CHECK(sol.alpha.minCoeff() >= -1e-10);
    for (int l = 0; l < 4; ++l) CHECK(sol.alpha(l) <= box(l) + 1e-8 * (1.0 + box(l)));
    // The reported objective is attained by the returned point.
    double floor_lhs = std::numeric_limits<double>::infinity();
    for (const auto& c : coeffs) floor_lhs = std::min(floor_lhs, c.surrogate(sol.alpha));
    CHECK(floor_lhs >= sol.t - 1e-6 * (1.0 + std::abs(sol.t)));
}

TEST_CASE("relative change statistic") {
    Eigen::VectorXd a(2), b(2), z(2);
    a << 1.0, 1.0;
    b << 1.0, 0.0;
    z << 0.0, 0.0;
    CHECK(relative_change(a, b) == doctest::Approx(1.0));
    CHECK(relative_change(a, a) == doctest::Approx(0.0));
    CHECK(relative_change(b, z) == doctest::Approx(1.0));  // fallback: ||new||^2
    CHECK(relative_change(z, z) == doctest::Approx(0.0));
}

TEST_CASE("fairness iteration raises the floor monotonically") {
    for (std::uint64_t seed : {81, 82, 83, 84, 85}) {
        const Instance inst = make_instance(8, 4, 2, seed);
        const MaxMinResult res = maxmin_ccp(inst.r, inst.config);
        REQUIRE(res.trace.size() >= 1);
        CHECK(res.converged);
        // True floor never decreases across iterations (up to solver gap).
        for (std::size_t i = 1; i < res.trace.size(); ++i) {
            CHECK(res.trace[i].min_sinr >=
                  res.trace[i - 1].min_sinr * (1.0 - 1e-6) - 1e-12);
        }
        // The reported floor is the true floor of the returned gains.
        const Eigen::VectorXd sinrs =
            lmmse_sinr_all(inst.r, res.alpha, inst.config.uplink_power_w);
        CHECK(res.sinr_floor == doctest::Approx(sinrs.minCoeff()).epsilon(1e-9));
        // And it beats both all-off and all-max gain assignments.
        const Eigen::VectorXd box = max_feasible_alpha_all(
            inst.r, inst.config.alpha_max, inst.config.p_max_w, inst.config.uplink_power_w);
        const Eigen::VectorXd off =
            lmmse_sinr_all(inst.r, Eigen::VectorXd::Zero(4), inst.config.uplink_power_w);
        const Eigen::VectorXd maxp = lmmse_sinr_all(inst.r, box, inst.config.uplink_power_w);
        CHECK(res.sinr_floor >= off.minCoeff() * (1.0 - 1e-6));
        CHECK(res.sinr_floor >= maxp.minCoeff() * (1.0 - 1e-6));
    }
}

TEST_CASE("fairness control with every repeater masked off is the plain array") {
    const Instance inst = make_instance(8, 4, 2, 91);
    const std::vector<bool> none(4, false);
    const MaxMinResult res = maxmin_ccp(inst.r, inst.config, &none);
    CHECK(res.alpha.norm() == 0.0);
    const Eigen::VectorXd sinrs =
        lmmse_sinr_all(inst.r, Eigen::VectorXd::Zero(4), inst.config.uplink_power_w);
    CHECK(res.sinr_floor == doctest::Approx(sinrs.minCoeff()).epsilon(1e-9));
}

TEST_CASE("fairness control with zero repeaters degenerates cleanly") {
    const Instance inst = make_instance(8, 0, 2, 92);
    const MaxMinResult res = maxmin_ccp(inst.r, inst.config);
    CHECK(res.alpha.size() == 0);
    CHECK(res.converged);
    const Eigen::VectorXd sinrs =
        lmmse_sinr_all(inst.r, Eigen::VectorXd(0), inst.config.uplink_power_w);
    CHECK(res.sinr_floor == doctest::Approx(sinrs.minCoeff()).epsilon(1e-9));
}

TEST_CASE("power control meets feasible targets with room to spare") {
    for (std::uint64_t seed : {101, 102, 103}) {
        const Instance inst = make_instance(8, 4, 2, seed);
        const MaxMinResult fair = maxmin_ccp(inst.r, inst.config);
        REQUIRE(fair.sinr_floor > 0.0);
        // Targets 3 dB below the achievable floor are comfortably feasible.
        const Eigen::VectorXd thresholds =
            Eigen::VectorXd::Constant(2, fair.sinr_floor / 2.0);
        const MinPowResult res = minpow_fpp(inst.r, inst.config, thresholds);
        CHECK(res.feasible);
        CHECK(res.converged);
        CHECK(res.slacks.maxCoeff() <= 1e-4);
        const Eigen::VectorXd sinrs =
            lmmse_sinr_all(inst.r, res.alpha, inst.config.uplink_power_w);
        for (int k = 0; k < 2; ++k) {
            CHECK(sinrs(k) >=
                  thresholds(k) - inst.config.uplink_power_w * 2e-4 -
                      1e-6 * thresholds(k));
        }
        // Spending the full budget would also meet the target; the optimizer
        // must do so at strictly lower amplification cost.
        const Eigen::VectorXd box = max_feasible_alpha_all(
            inst.r, inst.config.alpha_max, inst.config.p_max_w, inst.config.uplink_power_w);
        double full_cost = 0.0;
        for (int l = 0; l < 4; ++l)
            full_cost += repeater_c(inst.r, inst.config.uplink_power_w, l) * box(l);
        CHECK(res.objective < full_cost);
        CHECK(res.alpha.minCoeff() >= -1e-12);
        for (int l = 0; l < 4; ++l) CHECK(res.alpha(l) <= box(l) * (1.0 + 1e-8));
    }
}

TEST_CASE("near-zero targets cost near-zero amplification") {
    const Instance inst = make_instance(8, 4, 2, 111);
    const Eigen::VectorXd thresholds = Eigen::VectorXd::Constant(2, 1e-6);
    const MinPowResult res = minpow_fpp(inst.r, inst.config, thresholds);
    CHECK(res.feasible);
    const Eigen::VectorXd box = max_feasible_alpha_all(
        inst.r, inst.config.alpha_max, inst.config.p_max_w, inst.config.uplink_power_w);
    double full_cost = 0.0;
    for (int l = 0; l < 4; ++l)
        full_cost += repeater_c(inst.r, inst.config.uplink_power_w, l) * box(l);
    CHECK(res.objective <= 1e-3 * full_cost);
}

TEST_CASE("impossible targets are reported infeasible") {
    const Instance inst = make_instance(8, 4, 2, 121);
    const MaxMinResult fair = maxmin_ccp(inst.r, inst.config);
    const Eigen::VectorXd thresholds =
        Eigen::VectorXd::Constant(2, fair.sinr_floor * 100.0);
    const MinPowResult res = minpow_fpp(inst.r, inst.config, thresholds);
    CHECK_FALSE(res.feasible);
    CHECK(res.slacks.maxCoeff() > 1e-4);
}

TEST_CASE("deactivated repeaters stay at zero gain through power control") {
    const Instance inst = make_instance(8, 4, 2, 131);
    const std::vector<bool> active{true, false, true, false};
    const Eigen::VectorXd thresholds = Eigen::VectorXd::Constant(2, 0.5);
    const MinPowResult res = minpow_fpp(inst.r, inst.config, thresholds, &active);
    CHECK(res.alpha(1) == 0.0);
    CHECK(res.alpha(3) == 0.0);
}
