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

#include "ramimo/mimo.hpp"

#include <cmath>
#include <stdexcept>

namespace ramimo {

namespace {

constexpr std::uint64_t kTagCfLargeScale = 0x15;
constexpr std::uint64_t kTagCfFading = 0x25;

void check_alpha(const ChannelRealization& r, const Eigen::VectorXd& alpha) {
    if (alpha.size() != r.num_repeaters()) {
        throw std::invalid_argument("alpha length must equal repeater count");
    }
    if ((alpha.array() < 0).any()) throw std::invalid_argument("alpha must be nonnegative");
}

void check_finite(const Eigen::MatrixXcd& m, const char* name) {
    if (!m.allFinite()) throw std::runtime_error(std::string(name) + " has non-finite entries");
}

}  // namespace

Eigen::MatrixXcd stack_H(const ChannelRealization& r, int k) {
    const int L = r.num_repeaters();
    const int M = r.num_antennas();
    if (k < 0 || k >= r.num_ues()) throw std::invalid_argument("UE index out of range");
    Eigen::MatrixXcd H(M, L + 1);
    for (int l = 0; l < L; ++l) {
        H.col(l) = r.h(l, k) * r.g.col(l);
    }
    H.col(L) = r.h_bar.col(k);
    return H;
}

Eigen::MatrixXcd composite_channel(const ChannelRealization& r, const Eigen::VectorXd& alpha) {
    check_alpha(r, alpha);
    if (r.num_repeaters() == 0) return r.h_bar;
    return r.h_bar + r.g * (alpha.asDiagonal() * r.h);
}

Eigen::MatrixXcd colored_noise_cov(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                                   double rho_u_w, int k) {
    check_alpha(r, alpha);
    const int M = r.num_antennas();
    const int K = r.num_ues();
    if (k < 0 || k >= K) throw std::invalid_argument("UE index out of range");
    const Eigen::MatrixXcd z = composite_channel(r, alpha);
    Eigen::MatrixXcd C = r.noise_bs_w * Eigen::MatrixXcd::Identity(M, M);
    for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        C.noalias() += rho_u_w * z.col(i) * z.col(i).adjoint();
    }
    for (int l = 0; l < r.num_repeaters(); ++l) {
        const double a2 = alpha(l) * alpha(l);
        if (a2 == 0.0) continue;
        C.noalias() += (a2 * r.noise_rep_w) * r.g.col(l) * r.g.col(l).adjoint();
    }
    return C;
}

double lmmse_sinr(const ChannelRealization& r, const Eigen::VectorXd& alpha, double rho_u_w,
                  int k) {
    check_finite(r.g, "g");
    check_finite(r.h_bar, "h_bar");
    check_finite(r.h, "h");
    const Eigen::MatrixXcd C = colored_noise_cov(r, alpha, rho_u_w, k);
    const Eigen::VectorXcd z_k = composite_channel(r, alpha).col(k);
    Eigen::LLT<Eigen::MatrixXcd> llt(C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("noise covariance not PD");
    const Eigen::VectorXcd x = llt.solve(z_k);
    return rho_u_w * z_k.dot(x).real();
}

Eigen::VectorXd lmmse_sinr_all(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                               double rho_u_w) {
    check_alpha(r, alpha);
    const int M = r.num_antennas();
    const int K = r.num_ues();
    const Eigen::MatrixXcd z = composite_channel(r, alpha);

    // Shared part: amplified repeater noise + thermal + all-UE signal sum.
    Eigen::MatrixXcd base = r.noise_bs_w * Eigen::MatrixXcd::Identity(M, M);
    if (r.num_repeaters() > 0) {
        const Eigen::VectorXd w = r.noise_rep_w * alpha.array().square().matrix();
        base.noalias() += r.g * w.asDiagonal() * r.g.adjoint();
    }
    // The interference sum is accumulated leave-one-out per UE rather than
    // downdated from the all-UE total: subtracting a dominant UE's own
    // rank-one term back out of the total leaves a cancellation residue of
    // order eps * rho * ||z_k||^2, which can swamp the noise floor when one
    // UE carries most of the received energy.
    Eigen::VectorXd sinr(K);
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXcd C = base;
        for (int i = 0; i < K; ++i) {
            if (i == k) continue;
            C.noalias() += rho_u_w * z.col(i) * z.col(i).adjoint();
        }
        Eigen::LLT<Eigen::MatrixXcd> llt(C);
        if (llt.info() != Eigen::Success) throw std::runtime_error("noise covariance not PD");
        sinr(k) = rho_u_w * z.col(k).dot(llt.solve(z.col(k))).real();
    }
    return sinr;
}

Eigen::VectorXcd lmmse_combiner(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                                double rho_u_w, int k) {
    const Eigen::MatrixXcd C = colored_noise_cov(r, alpha, rho_u_w, k);
    const Eigen::VectorXcd z_k = composite_channel(r, alpha).col(k);
    Eigen::LLT<Eigen::MatrixXcd> llt(C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("noise covariance not PD");
    return llt.solve(z_k);
}

double repeater_c(const ChannelRealization& r, double rho_u_w, int l) {
    if (l < 0 || l >= r.num_repeaters()) throw std::invalid_argument("repeater index out of range");
    return std::sqrt(rho_u_w * r.h.row(l).squaredNorm() + r.noise_rep_w);
}

double repeater_output_power(const ChannelRealization& r, const Eigen::VectorXd& alpha,
                             double rho_u_w, int l) {
    check_alpha(r, alpha);
    const double c = repeater_c(r, rho_u_w, l);
    return c * c * alpha(l) * alpha(l);
}

double max_feasible_alpha(const ChannelRealization& r, double alpha_max, double p_max_w,
                          double rho_u_w, int l) {
    if (alpha_max <= 0 || p_max_w <= 0) {
        throw std::invalid_argument("alpha_max and p_max must be positive");
    }
    return std::min(alpha_max, std::sqrt(p_max_w) / repeater_c(r, rho_u_w, l));
}

Eigen::VectorXd max_feasible_alpha_all(const ChannelRealization& r, double alpha_max,
                                       double p_max_w, double rho_u_w,
                                       const std::vector<bool>* active) {
    const int L = r.num_repeaters();
    if (active && static_cast<int>(active->size()) != L) {
        throw std::invalid_argument("active mask length must equal repeater count");
    }
    Eigen::VectorXd a(L);
    for (int l = 0; l < L; ++l) {
        a(l) = (!active || (*active)[l]) ? max_feasible_alpha(r, alpha_max, p_max_w, rho_u_w, l)
                                         : 0.0;
    }
    return a;
}

Eigen::VectorXd mmse_sinr_white(const Eigen::MatrixXcd& H, double rho_w, double sigma2_w) {
    if (sigma2_w <= 0) throw std::invalid_argument("noise power must be positive");
    const int M = static_cast<int>(H.rows());
    const int K = static_cast<int>(H.cols());
    // Leave-one-out accumulation, not total-minus-own downdating; see
    // lmmse_sinr_all for the cancellation this avoids.
    Eigen::VectorXd sinr(K);
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXcd C = sigma2_w * Eigen::MatrixXcd::Identity(M, M);
        for (int i = 0; i < K; ++i) {
            if (i == k) continue;
            C.noalias() += rho_w * H.col(i) * H.col(i).adjoint();
        }
        Eigen::LLT<Eigen::MatrixXcd> llt(C);
        if (llt.info() != Eigen::Success) throw std::runtime_error("covariance not PD");
        sinr(k) = rho_w * H.col(k).dot(llt.solve(H.col(k))).real();
    }
    return sinr;
}

CfLargeScale cf_large_scale(const ScenarioConfig& config,
                            const std::vector<Eigen::Vector3d>& ap_positions,
                            const std::vector<Eigen::Vector3d>& ue_positions,
                            const RngStream& drop_rng) {
    const int M = static_cast<int>(ap_positions.size());
    const int K = static_cast<int>(ue_positions.size());
    CfLargeScale ls;
    ls.beta.resize(M, K);
    ls.los.resize(M, K);
    const RngStream s = drop_rng.derive(kTagCfLargeScale);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            RngStream rng = s.derive(m, k);
            const double d2d = std::hypot(ap_positions[m].x() - ue_positions[k].x(),
                                          ap_positions[m].y() - ue_positions[k].y());
            const double p_los = los_probability(d2d, LinkClass::ue_rep);
            const bool los = (p_los >= 1.0) ? true : (rng.uniform() < p_los);
            const double shadow_db = rng.normal() * (los ? 4.0 : 6.0);
            const double pl_db = uma_pathloss_db(d2d, ap_positions[m].z(), ue_positions[k].z(),
                                                 config.carrier_hz, los);
            ls.beta(m, k) = std::min(1.0, db_to_linear(-(pl_db + shadow_db)));
            ls.los(m, k) = los;
        }
    }
    return ls;
}

Eigen::MatrixXcd cf_draw_channels(const ScenarioConfig& config, const CfLargeScale& ls,
                                  const RngStream& block_rng) {
    const int M = static_cast<int>(ls.beta.rows());
    const int K = static_cast<int>(ls.beta.cols());
    const double kf = db_to_linear(config.k_factor_db);
    const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1);
    const RngStream s = block_rng.derive(kTagCfFading);
    Eigen::MatrixXcd H(M, K);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            RngStream rng = s.derive(m, k);
            H(m, k) = rician_draw(ls.beta(m, k), ls.los(m, k) ? kf : 0.0, one, rng)(0);
        }
    }
    return H;
}

Eigen::VectorXd cfmmimo_sinr(const std::vector<Eigen::Vector3d>& ap_positions,
                             const std::vector<Eigen::Vector3d>& ue_positions,
                             const ScenarioConfig& config, const RngStream& rng) {
    if (static_cast<int>(ap_positions.size()) != config.num_bs_antennas) {
        throw std::invalid_argument("AP count must equal the BS antenna count");
    }
    const CfLargeScale ls = cf_large_scale(config, ap_positions, ue_positions, rng);
    const Eigen::MatrixXcd H = cf_draw_channels(config, ls, rng);
    const double sigma2 = noise_power_w(config.bandwidth_hz, config.noise_figure_db);
    return mmse_sinr_white(H, config.uplink_power_w, sigma2);
}

}  // namespace ramimo
