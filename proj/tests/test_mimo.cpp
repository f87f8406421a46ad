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
#include "ramimo/rng.hpp"

using namespace ramimo;

namespace {

// A random realization with realistic noise levels and unit-order gains.
ChannelRealization random_realization(int m, int l, int k, std::uint64_t seed) {
    RngStream rng(seed);
    ChannelRealization r;
    r.h = Eigen::MatrixXcd(l, k);
    r.g = Eigen::MatrixXcd(m, l);
    r.h_bar = Eigen::MatrixXcd(m, k);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < k; ++j) r.h(i, j) = rng.cnormal() * 1e-4;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < l; ++j) r.g(i, j) = rng.cnormal() * 1e-5;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) r.h_bar(i, j) = rng.cnormal() * 1e-6;
    r.noise_rep_w = 2.5e-13;
    r.noise_bs_w = 2.5e-13;
    return r;
}

// Deleting repeater l entirely from a realization.
ChannelRealization drop_repeater(const ChannelRealization& r, int l) {
    const int L = r.num_repeaters();
    ChannelRealization out = r;
    out.h = Eigen::MatrixXcd(L - 1, r.num_ues());
    out.g = Eigen::MatrixXcd(r.num_antennas(), L - 1);
    int w = 0;
    for (int i = 0; i < L; ++i) {
        if (i == l) continue;
        out.h.row(w) = r.h.row(i);
        out.g.col(w) = r.g.col(i);
        ++w;
    }
    return out;
}

}  // namespace

TEST_CASE("stacked channel matrix columns are the per-repeater products") {
    const ChannelRealization r = random_realization(4, 3, 2, 101);
    const Eigen::MatrixXcd H = stack_H(r, 1);
    REQUIRE(H.rows() == 4);
    REQUIRE(H.cols() == 4);  // L + 1
    for (int l = 0; l < 3; ++l) {
        CHECK((H.col(l) - r.h(l, 1) * r.g.col(l)).norm() == doctest::Approx(0.0));
    }
    CHECK((H.col(3) - r.h_bar.col(1)).norm() == doctest::Approx(0.0));
    // The direct path is recovered by the fixed unit entry.
    Eigen::VectorXcd sel = Eigen::VectorXcd::Zero(4);
    sel(3) = 1.0;
    CHECK((H * sel - r.h_bar.col(1)).norm() == doctest::Approx(0.0));
}

TEST_CASE("stacking with zero repeaters reduces to the direct channel") {
    const ChannelRealization r = random_realization(4, 0, 2, 102);
    const Eigen::MatrixXcd H = stack_H(r, 0);
    REQUIRE(H.cols() == 1);
    CHECK((H.col(0) - r.h_bar.col(0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("composite channel at zero gain is the direct channel") {
    const ChannelRealization r = random_realization(5, 4, 3, 103);
    const Eigen::MatrixXcd z = composite_channel(r, Eigen::VectorXd::Zero(4));
    CHECK((z - r.h_bar).norm() / r.h_bar.norm() < 1e-14);
}

TEST_CASE("single repeater with unit gain and no direct path") {
    ChannelRealization r = random_realization(4, 1, 1, 104);
    r.h_bar.setZero();
    const Eigen::MatrixXcd z = composite_channel(r, Eigen::VectorXd::Ones(1));
    CHECK((z.col(0) - r.h(0, 0) * r.g.col(0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("composite channel agrees with the stacked-matrix product") {
    const ChannelRealization r = random_realization(6, 5, 3, 105);
    RngStream rng(9);
    Eigen::VectorXd alpha(5);
    for (int l = 0; l < 5; ++l) alpha(l) = rng.uniform(0.0, 100.0);
    const Eigen::MatrixXcd z = composite_channel(r, alpha);
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd a1(6);
        a1.head(5) = alpha;
        a1(5) = 1.0;
        const Eigen::VectorXcd via_stack = stack_H(r, k) * a1;
        CHECK((z.col(k) - via_stack).norm() / via_stack.norm() < 1e-12);
    }
}

TEST_CASE("colored noise covariance has the advertised structure") {
    const double rho = 0.1;
    SUBCASE("single UE, zero gains: white noise only") {
        const ChannelRealization r = random_realization(4, 3, 1, 106);
        const Eigen::MatrixXcd c = colored_noise_cov(r, Eigen::VectorXd::Zero(3), rho, 0);
        CHECK((c - r.noise_bs_w * Eigen::MatrixXcd::Identity(4, 4)).norm() ==
              doctest::Approx(0.0));
    }
    SUBCASE("two UEs, zero gains: one rank-one interference term") {
        const ChannelRealization r = random_realization(4, 2, 2, 107);
        const Eigen::MatrixXcd c = colored_noise_cov(r, Eigen::VectorXd::Zero(2), rho, 0);
        const Eigen::MatrixXcd expect =
            rho * r.h_bar.col(1) * r.h_bar.col(1).adjoint() +
            r.noise_bs_w * Eigen::MatrixXcd::Identity(4, 4);
        CHECK((c - expect).norm() / expect.norm() < 1e-14);
    }
    SUBCASE("trace identity on a random instance") {
        const ChannelRealization r = random_realization(5, 4, 3, 108);
        RngStream rng(10);
        Eigen::VectorXd alpha(4);
        for (int l = 0; l < 4; ++l) alpha(l) = rng.uniform(0.0, 50.0);
        const Eigen::MatrixXcd z = composite_channel(r, alpha);
        const int k = 1;
        double expect = 5 * r.noise_bs_w;
        for (int i = 0; i < 3; ++i)
            if (i != k) expect += rho * z.col(i).squaredNorm();
        for (int l = 0; l < 4; ++l)
            expect += alpha(l) * alpha(l) * r.noise_rep_w * r.g.col(l).squaredNorm();
        const Eigen::MatrixXcd c = colored_noise_cov(r, alpha, rho, k);
        CHECK(c.trace().real() == doctest::Approx(expect).epsilon(1e-12));
        CHECK((c - c.adjoint()).norm() < 1e-14 * c.norm());
        // Positive definite with the white floor.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
        CHECK(es.eigenvalues().minCoeff() >= r.noise_bs_w * (1.0 - 1e-9));
    }
}

TEST_CASE("LMMSE SINR equals the matched-filter bound for one UE at zero gain") {
    const ChannelRealization r = random_realization(4, 3, 1, 109);
    const double rho = 0.1;
    const double sinr = lmmse_sinr(r, Eigen::VectorXd::Zero(3), rho, 0);
    CHECK(sinr ==
          doctest::Approx(rho * r.h_bar.col(0).squaredNorm() / r.noise_bs_w).epsilon(1e-10));
}

TEST_CASE("scalar-antenna SINR matches the closed-form expression") {
    // M = 1, K = 1, L = 1: SINR = rho |a h g + hbar|^2 / (a^2 |g|^2 s_r + s_bs).
    ChannelRealization r = random_realization(1, 1, 1, 110);
    const double rho = 0.1;
    const double a = 2.0e4;
    const std::complex<double> num = a * r.h(0, 0) * r.g(0, 0) + r.h_bar(0, 0);
    const double expect = rho * std::norm(num) /
                          (a * a * std::norm(r.g(0, 0)) * r.noise_rep_w + r.noise_bs_w);
    Eigen::VectorXd alpha(1);
    alpha << a;
    CHECK(lmmse_sinr(r, alpha, rho, 0) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("raising interferer power never helps the SINR") {
    const ChannelRealization r = random_realization(6, 4, 3, 111);
    RngStream rng(11);
    Eigen::VectorXd alpha(4);
    for (int l = 0; l < 4; ++l) alpha(l) = rng.uniform(0.0, 1e4);
    const double rho = 0.1;
    const Eigen::MatrixXcd z = composite_channel(r, alpha);
    const int k = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (double rho_i : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        // Covariance with interferer power rho_i, own signal power fixed.
        Eigen::MatrixXcd c =
            r.noise_bs_w * Eigen::MatrixXcd::Identity(6, 6);
        for (int i = 0; i < 3; ++i)
            if (i != k) c += rho_i * z.col(i) * z.col(i).adjoint();
        for (int l = 0; l < 4; ++l)
            c += alpha(l) * alpha(l) * r.noise_rep_w * r.g.col(l) * r.g.col(l).adjoint();
        const double sinr =
            rho * z.col(k).dot(c.ldlt().solve(z.col(k))).real();
        CHECK(sinr <= prev * (1.0 + 1e-12));
        prev = sinr;
    }
}

TEST_CASE("combiner is consistent with the SINR value") {
    const ChannelRealization r = random_realization(5, 3, 2, 112);
    RngStream rng(12);
    Eigen::VectorXd alpha(3);
    for (int l = 0; l < 3; ++l) alpha(l) = rng.uniform(0.0, 1e4);
    const double rho = 0.1;
    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXcd w = lmmse_combiner(r, alpha, rho, k);
        const Eigen::MatrixXcd z = composite_channel(r, alpha);
        const double via_w = rho * w.dot(z.col(k)).real();
        CHECK(lmmse_sinr(r, alpha, rho, k) == doctest::Approx(via_w).epsilon(1e-10));
    }
}

TEST_CASE("combiner for one UE at zero gain aligns with the direct channel") {
    const ChannelRealization r = random_realization(4, 2, 1, 113);
    const Eigen::VectorXcd w = lmmse_combiner(r, Eigen::VectorXd::Zero(2), 0.1, 0);
    const Eigen::VectorXcd hb = r.h_bar.col(0);
    CHECK(std::abs(w.dot(hb)) == doctest::Approx(w.norm() * hb.norm()).epsilon(1e-12));
}

TEST_CASE("zero channel produces a zero combiner") {
    ChannelRealization r = random_realization(4, 2, 1, 114);
    r.h_bar.setZero();
    r.h.setZero();
    const Eigen::VectorXcd w = lmmse_combiner(r, Eigen::VectorXd::Ones(2), 0.1, 0);
    CHECK(w.norm() == doctest::Approx(0.0));
}

TEST_CASE("repeater output power follows the quadratic identity") {
    const ChannelRealization r = random_realization(4, 3, 2, 115);
    const double rho = 0.1;
    SUBCASE("zero gain emits nothing") {
        CHECK(repeater_output_power(r, Eigen::VectorXd::Zero(3), rho, 1) ==
              doctest::Approx(0.0));
    }
    SUBCASE("no UEs leaves pure noise amplification") {
        const ChannelRealization rn = random_realization(4, 3, 0, 116);
        Eigen::VectorXd alpha = Eigen::VectorXd::Constant(3, 5.0);
        CHECK(repeater_output_power(rn, alpha, rho, 2) ==
              doctest::Approx(25.0 * rn.noise_rep_w).epsilon(1e-12));
    }
    SUBCASE("random instance equals c_l^2 alpha_l^2") {
        Eigen::VectorXd alpha(3);
        alpha << 3.0, 7.0, 11.0;
        for (int l = 0; l < 3; ++l) {
            const double c = repeater_c(r, rho, l);
            CHECK(repeater_output_power(r, alpha, rho, l) ==
                  doctest::Approx(c * c * alpha(l) * alpha(l)).epsilon(1e-12));
        }
    }
}

TEST_CASE("max feasible gain respects both caps") {
    const ChannelRealization r = random_realization(4, 3, 2, 117);
    const double rho = 0.1;
    SUBCASE("huge power budget leaves the stability cap binding") {
        for (int l = 0; l < 3; ++l) {
            CHECK(max_feasible_alpha(r, 123.0, 1e30, rho, l) == doctest::Approx(123.0));
        }
    }
    SUBCASE("huge stability cap leaves the power budget binding") {
        for (int l = 0; l < 3; ++l) {
            const double c = repeater_c(r, rho, l);
            CHECK(max_feasible_alpha(r, 1e30, 2.5, rho, l) ==
                  doctest::Approx(std::sqrt(2.5) / c).epsilon(1e-12));
        }
    }
    SUBCASE("resulting output power never exceeds the budget") {
        const double p_max = 6.3;
        Eigen::VectorXd alpha = max_feasible_alpha_all(r, 1e5, p_max, rho);
        for (int l = 0; l < 3; ++l) {
            CHECK(alpha(l) <= 1e5);
            CHECK(repeater_output_power(r, alpha, rho, l) <= p_max * (1.0 + 1e-9));
        }
    }
    SUBCASE("inactive repeaters are pinned to zero") {
        std::vector<bool> active{true, false, true};
        Eigen::VectorXd alpha = max_feasible_alpha_all(r, 1e5, 6.3, rho, &active);
        CHECK(alpha(1) == 0.0);
        CHECK(alpha(0) > 0.0);
        CHECK(alpha(2) > 0.0);
    }
}

TEST_CASE("deactivating a repeater is identical to deleting it") {
    const double rho = 0.1;
    for (std::uint64_t seed : {201, 202, 203}) {
        const ChannelRealization r = random_realization(5, 4, 3, seed);
        RngStream rng(seed + 50);
        Eigen::VectorXd alpha(4);
        for (int l = 0; l < 4; ++l) alpha(l) = rng.uniform(0.0, 2e4);
        const int drop = static_cast<int>(seed % 4);
        alpha(drop) = 0.0;

        Eigen::VectorXd alpha_rest(3);
        int w = 0;
        for (int l = 0; l < 4; ++l)
            if (l != drop) alpha_rest(w++) = alpha(l);
        const ChannelRealization sub = drop_repeater(r, drop);

        const Eigen::VectorXd full = lmmse_sinr_all(r, alpha, rho);
        const Eigen::VectorXd reduced = lmmse_sinr_all(sub, alpha_rest, rho);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(full(k) - reduced(k)) <= 1e-12 * std::abs(reduced(k)));
        }
    }
}

TEST_CASE("white-noise MMSE SINR matches the matched filter for one UE") {
    RngStream rng(301);
    Eigen::MatrixXcd h(6, 1);
    for (int i = 0; i < 6; ++i) h(i, 0) = rng.cnormal();
    const Eigen::VectorXd s = mmse_sinr_white(h, 0.1, 2.5e-13);
    CHECK(s(0) == doctest::Approx(0.1 * h.col(0).squaredNorm() / 2.5e-13).epsilon(1e-10));
}

TEST_CASE("co-located AP array reproduces the direct-path LMMSE formula") {
    // The distributed-MMSE formula with the AP channels stacked into h_bar
    // and no repeaters is the same expression evaluated by lmmse_sinr.
    RngStream rng(302);
    const int m = 5, k = 3;
    Eigen::MatrixXcd h(m, k);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) h(i, j) = rng.cnormal() * 1e-5;
    ChannelRealization r;
    r.h = Eigen::MatrixXcd(0, k);
    r.g = Eigen::MatrixXcd(m, 0);
    r.h_bar = h;
    r.noise_rep_w = 2.5e-13;
    r.noise_bs_w = 2.5e-13;
    const Eigen::VectorXd via_lmmse = lmmse_sinr_all(r, Eigen::VectorXd(0), 0.1);
    const Eigen::VectorXd via_white = mmse_sinr_white(h, 0.1, 2.5e-13);
    for (int j = 0; j < k; ++j) {
        CHECK(via_lmmse(j) == doctest::Approx(via_white(j)).epsilon(1e-9));
    }
}

TEST_CASE("distributed APs beat the co-located array for edge users") {
    ScenarioConfig c = scenario_preset("table1");
    c.num_bs_antennas = 16;
    c.num_ues = 2;
    c.num_repeaters = 16;
    const auto aps = [&] {
        std::vector<Eigen::Vector3d> v;
        for (const auto& p : grid_positions(16, c.area_side_m)) {
            v.push_back({p.x(), p.y(), c.repeater_height_m});
        }
        return v;
    }();
    const Deployment dep = make_grid_deployment(c);
    RngStream master(7);
    int cf_wins = 0;
    const int trials = 21;
    for (int t = 0; t < trials; ++t) {
        RngStream drop = master.derive(t);
        RngStream ue_rng = drop.derive(1);
        const auto ues = cell_edge_ue_drop(c.num_ues, c, ue_rng);
        const Eigen::VectorXd cf = cfmmimo_sinr(aps, ues, c, drop.derive(2));
        Deployment d = dep;
        d.ue_positions = ues;
        const LargeScale ls = compute_large_scale(c, d, drop.derive(3));
        const ChannelRealization r = draw_channels(c, d, ls, drop.derive(4));
        const Eigen::VectorXd mm = lmmse_sinr_all(r, Eigen::VectorXd::Zero(16), c.uplink_power_w);
        if (cf.minCoeff() > mm.minCoeff()) ++cf_wins;
    }
    CHECK(cf_wins > trials / 2);
}

TEST_CASE("AP count must match the configured antenna count") {
    ScenarioConfig c = scenario_preset("table1");
    c.num_bs_antennas = 16;
    std::vector<Eigen::Vector3d> aps(9, Eigen::Vector3d{100.0, 100.0, 15.0});
    std::vector<Eigen::Vector3d> ues(2, Eigen::Vector3d{500.0, 500.0, 1.5});
    CHECK_THROWS_AS(cfmmimo_sinr(aps, ues, c, RngStream(1)), std::invalid_argument);
}
