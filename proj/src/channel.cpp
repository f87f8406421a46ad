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

#include "ramimo/channel.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ramimo {

namespace {

constexpr double kPropagationSpeed = 3.0e8;  // TR 38.901 uses c = 3e8 m/s
constexpr double kEffEnvHeight = 1.0;        // deterministic UMa h_E

// Stream tags. Fixed constants so every draw has a stable address in the
// stream hierarchy regardless of evaluation order or unrelated dimensions.
constexpr std::uint64_t kTagLsUeBs = 0xA1;
constexpr std::uint64_t kTagLsUeRep = 0xA2;
constexpr std::uint64_t kTagLsRepBs = 0xA3;
constexpr std::uint64_t kTagFadeH = 1;
constexpr std::uint64_t kTagFadeG = 2;
constexpr std::uint64_t kTagFadeHbar = 3;

double horizontal_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::hypot(a.x() - b.x(), a.y() - b.y());
}

double azimuth_from_broadside(const Eigen::Vector3d& from_bs, const Eigen::Vector3d& node) {
    // Array axis along x; broadside along +y.
    return std::atan2(node.x() - from_bs.x(), node.y() - from_bs.y());
}

struct ShadowSigma {
    double los_db = 4.0;
    double nlos_db = 6.0;
};

// One link's large-scale draw: LOS decision, shadowing, combined linear gain.
std::pair<double, bool> link_gain(const ScenarioConfig& cfg, const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b, LinkClass link, RngStream rng) {
    const double d2d = horizontal_distance(a, b);
    const double p_los = los_probability(d2d, link);
    bool los;
    if (p_los >= 1.0) {
        los = true;
    } else {
        los = rng.uniform() < p_los;
    }
    const ShadowSigma sigma;
    const double shadow_db = rng.normal() * (los ? sigma.los_db : sigma.nlos_db);
    const double pl_db = uma_pathloss_db(d2d, a.z(), b.z(), cfg.carrier_hz, los);
    const double beta = std::min(1.0, db_to_linear(-(pl_db + shadow_db)));
    return {beta, los};
}

}  // namespace

double uma_pathloss_db(double d2d_m, double h_a_m, double h_b_m, double carrier_hz, bool los) {
    if (carrier_hz <= 0) throw std::invalid_argument("carrier frequency must be positive");
    const double d2d = std::max(d2d_m, 1.0);
    const double h_bs = std::max(h_a_m, h_b_m);
    const double h_ut = std::min(h_a_m, h_b_m);
    const double dh = h_bs - h_ut;
    const double d3d = std::hypot(d2d, dh);
    const double f_ghz = carrier_hz / 1e9;

    // LOS branch with the dual-slope breakpoint.
    const double d_bp =
        4.0 * (h_bs - kEffEnvHeight) * (h_ut - kEffEnvHeight) * carrier_hz / kPropagationSpeed;
    double pl_los;
    if (d2d <= d_bp) {
        pl_los = 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(f_ghz);
    } else {
        pl_los = 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(f_ghz) -
                 9.0 * std::log10(d_bp * d_bp + dh * dh);
    }
    if (los) return pl_los;

    const double pl_nlos = 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(f_ghz) -
                           0.6 * (h_ut - 1.5);
    return std::max(pl_los, pl_nlos);
}

double los_probability(double d2d_m, LinkClass link) {
    if (link == LinkClass::rep_bs) return 1.0;  // elevated fixed endpoints
    const double d = std::max(d2d_m, 0.0);
    if (d <= 18.0) return 1.0;
    return 18.0 / d + std::exp(-d / 63.0) * (1.0 - 18.0 / d);
}

double noise_power_w(double bandwidth_hz, double noise_figure_db) {
    if (bandwidth_hz <= 0) throw std::invalid_argument("bandwidth must be positive");
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return dbm_to_watts(dbm);
}

Eigen::VectorXcd rician_draw(double beta, double k_factor_linear,
                             const Eigen::VectorXcd& steering, RngStream& rng) {
    if (beta <= 0) throw std::invalid_argument("rician_draw requires beta > 0");
    if (k_factor_linear < 0) throw std::invalid_argument("rician_draw requires k_factor >= 0");
    const auto n = steering.size();
    if (std::abs(steering.squaredNorm() - static_cast<double>(n)) > 1e-6 * std::max<double>(n, 1)) {
        throw std::invalid_argument("steering vector must have squared norm n");
    }
    // Common phase is always consumed so the stream layout is LOS-independent.
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double los_amp = std::sqrt(k_factor_linear / (1.0 + k_factor_linear));
    const double nlos_amp = std::sqrt(1.0 / (1.0 + k_factor_linear));
    Eigen::VectorXcd out(n);
    const std::complex<double> los_term = std::polar(los_amp, phi);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = los_term * steering(i) + nlos_amp * rng.cnormal();
    }
    return std::sqrt(beta) * out;
}

Eigen::VectorXcd array_response(double azimuth_rad, int num_antennas) {
    if (num_antennas <= 0) throw std::invalid_argument("array needs at least one antenna");
    Eigen::VectorXcd a(num_antennas);
    const double phase_step = M_PI * std::sin(azimuth_rad);
    for (int m = 0; m < num_antennas; ++m) {
        a(m) = std::polar(1.0, phase_step * m);
    }
    return a;
}

LargeScale compute_large_scale(const ScenarioConfig& config, const Deployment& deployment,
                               const RngStream& drop_rng) {
    const int L = deployment.num_repeaters();
    const int K = static_cast<int>(deployment.ue_positions.size());
    LargeScale ls;
    ls.beta_ue_rep.resize(L, K);
    ls.beta_rep_bs.resize(L);
    ls.beta_ue_bs.resize(K);
    ls.los_ue_rep.resize(L, K);
    ls.los_rep_bs.resize(L);
    ls.los_ue_bs.resize(K);

    const RngStream s_ue_bs = drop_rng.derive(kTagLsUeBs);
    const RngStream s_ue_rep = drop_rng.derive(kTagLsUeRep);
    const RngStream s_rep_bs = drop_rng.derive(kTagLsRepBs);

    for (int k = 0; k < K; ++k) {
        auto [beta, los] = link_gain(config, deployment.ue_positions[k], deployment.bs_position,
                                     LinkClass::ue_bs, s_ue_bs.derive(k));
        ls.beta_ue_bs(k) = beta;
        ls.los_ue_bs(k) = los;
    }
    for (int l = 0; l < L; ++l) {
        auto [beta, los] = link_gain(config, deployment.repeater_positions[l],
                                     deployment.bs_position, LinkClass::rep_bs, s_rep_bs.derive(l));
        ls.beta_rep_bs(l) = beta;
        ls.los_rep_bs(l) = los;
        for (int k = 0; k < K; ++k) {
            auto [b_lk, los_lk] =
                link_gain(config, deployment.ue_positions[k], deployment.repeater_positions[l],
                          LinkClass::ue_rep, s_ue_rep.derive(l, k));
            ls.beta_ue_rep(l, k) = b_lk;
            ls.los_ue_rep(l, k) = los_lk;
        }
    }
    return ls;
}

ChannelRealization draw_channels(const ScenarioConfig& config, const Deployment& deployment,
                                 const LargeScale& large_scale, const RngStream& block_rng) {
    const int L = deployment.num_repeaters();
    const int K = static_cast<int>(deployment.ue_positions.size());
    const int M = config.num_bs_antennas;
    const double kf = db_to_linear(config.k_factor_db);

    ChannelRealization r;
    r.h.resize(L, K);
    r.g.resize(M, L);
    r.h_bar.resize(M, K);
    r.noise_rep_w = noise_power_w(config.bandwidth_hz, config.noise_figure_db);
    r.noise_bs_w = noise_power_w(config.bandwidth_hz, config.noise_figure_db);

    const RngStream s_h = block_rng.derive(kTagFadeH);
    const RngStream s_g = block_rng.derive(kTagFadeG);
    const RngStream s_hbar = block_rng.derive(kTagFadeHbar);
    const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1);

    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            RngStream rng = s_h.derive(l, k);
            const double kf_lk = large_scale.los_ue_rep(l, k) ? kf : 0.0;
            r.h(l, k) = rician_draw(large_scale.beta_ue_rep(l, k), kf_lk, one, rng)(0);
        }
    }
    for (int l = 0; l < L; ++l) {
        RngStream rng = s_g.derive(l);
        const Eigen::VectorXcd steer = array_response(
            azimuth_from_broadside(deployment.bs_position, deployment.repeater_positions[l]), M);
        const double kf_l = large_scale.los_rep_bs(l) ? kf : 0.0;
        r.g.col(l) = rician_draw(large_scale.beta_rep_bs(l), kf_l, steer, rng);
    }
    for (int k = 0; k < K; ++k) {
        RngStream rng = s_hbar.derive(k);
        const Eigen::VectorXcd steer = array_response(
            azimuth_from_broadside(deployment.bs_position, deployment.ue_positions[k]), M);
        const double kf_k = large_scale.los_ue_bs(k) ? kf : 0.0;
        r.h_bar.col(k) = rician_draw(large_scale.beta_ue_bs(k), kf_k, steer, rng);
    }
    return r;
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            data.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::invalid_argument("matrix data length mismatch");
    }
    Eigen::MatrixXcd m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index jj = 0; jj < cols; ++jj, ++idx) {
            m(i, jj) = {data.at(idx).at(0).get<double>(), data.at(idx).at(1).get<double>()};
        }
    }
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const ChannelRealization& r) {
    j = nlohmann::json{{"h", matrix_to_json(r.h)},
                       {"g", matrix_to_json(r.g)},
                       {"h_bar", matrix_to_json(r.h_bar)},
                       {"noise_rep_w", r.noise_rep_w},
                       {"noise_bs_w", r.noise_bs_w}};
}

void from_json(const nlohmann::json& j, ChannelRealization& r) {
    r.h = matrix_from_json(j.at("h"));
    r.g = matrix_from_json(j.at("g"));
    r.h_bar = matrix_from_json(j.at("h_bar"));
    r.noise_rep_w = j.at("noise_rep_w").get<double>();
    r.noise_bs_w = j.at("noise_bs_w").get<double>();
    if (r.h.rows() != r.g.cols() || r.g.rows() != r.h_bar.rows() ||
        r.h.cols() != r.h_bar.cols()) {
        throw std::invalid_argument("inconsistent channel matrix shapes");
    }
}

}  // namespace ramimo
