// SPDX-License-Identifier: Apache-2.0
//
// mimopc: uplink massive MIMO power control under nonorthogonal pilots
// Copyright (C) 2026 The mimopc authors
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

#pragma once

#include "mimopc/pilots.hpp"

namespace mimopc {

// One realization of the small-scale fading. h[j] is M x (sum K_i); column u
// is h_{j,u}, the channel from user u to BS j.
struct ChannelDraw {
    std::vector<CMat> h;
    std::uint64_t index = 0;

    const CMat& at_bs(int j) const { return h[static_cast<std::size_t>(j)]; }
};

// MMSE estimates of every BS's own-cell channels.
struct ChannelEstimate {
    std::vector<CMat> hhat; // hhat[i] is M x K_i
    RVec rho;               // per-antenna estimate variance v_{i,u}^2 phi_u^* U_i^{-1} phi_u

    auto of_user(const UserLayout& users, int u) const
    {
        return hhat[static_cast<std::size_t>(users.cell_of(u))].col(users.slot_of(u));
    }
};

inline ChannelDraw sample_channel(const NetworkScenario& sc, Rng& rng, std::uint64_t index = 0)
{
    ChannelDraw d;
    d.index = index;
    const int m = sc.antennas();
    d.h.reserve(static_cast<std::size_t>(sc.num_cells()));
    for (int j = 0; j < sc.num_cells(); ++j) {
        CMat g(m, sc.num_users());
        fill_complex_normal(g, rng);
        for (int u = 0; u < sc.num_users(); ++u)
            g.col(u) *= std::sqrt(sc.large_scale(j, u));
        d.h.push_back(std::move(g));
    }
    return d;
}

// Y_i = sum_j H_ij Phi_j^T + Z_i with Z_i ~ CN(0, noise_std^2). Passing
// noise_std = 0 gives the noiseless pilot phase.
inline std::vector<CMat> pilot_phase_rx(const ChannelDraw& draw, const PilotBook& book, Rng& rng, double noise_std)
{
    std::vector<CMat> y;
    y.reserve(draw.h.size());
    for (const CMat& hj : draw.h) {
        CMat yj = hj * book.sequences.transpose();
        if (noise_std > 0.0) {
            for (Eigen::Index c = 0; c < yj.cols(); ++c)
                for (Eigen::Index r = 0; r < yj.rows(); ++r)
                    yj(r, c) += noise_std * complex_normal(rng);
        }
        y.push_back(std::move(yj));
    }
    return y;
}

inline std::vector<CMat> pilot_phase_rx(const ChannelDraw& draw, const PilotBook& book, const NetworkScenario& sc,
                                        Rng& rng)
{
    return pilot_phase_rx(draw, book, rng, std::sqrt(sc.noise_power));
}

// Linear MMSE estimator of H_ii from Y_i. Uses
//   (A kron I_M) vec(X) = vec(X A^T)
// so the ML x ML Kronecker system collapses to Hhat_ii = Y_i W_i with the
// L x K_i filter W_i = conj(U_i^{-1} Phi_i) V_ii, computed once per scenario.
class MmseEstimator {
  public:
    MmseEstimator(const PilotBook& book, const NetworkScenario& sc, const PilotGram& gram) : users_(sc.users)
    {
        rho_.resize(sc.num_users());
        for (int i = 0; i < sc.num_cells(); ++i) {
            const auto phi = book.cell(i);
            const CMat x = gram.solve(i, phi);
            const RVec v = sc.large_scale.row(i).segment(sc.users.offset(i), sc.users.users_in(i)).transpose();
            filters_.push_back(x.conjugate() * v.asDiagonal());
            for (int k = 0; k < sc.users.users_in(i); ++k) {
                const double q = phi.col(k).dot(x.col(k)).real();
                rho_(sc.users.index(i, k)) = v(k) * v(k) * q;
            }
        }
    }

    ChannelEstimate estimate(const std::vector<CMat>& y) const
    {
        ChannelEstimate est;
        est.rho = rho_;
        est.hhat.reserve(filters_.size());
        for (std::size_t i = 0; i < filters_.size(); ++i)
            est.hhat.push_back(y[i] * filters_[i]);
        return est;
    }

    const RVec& rho() const { return rho_; }
    const CMat& filter(int bs) const { return filters_[static_cast<std::size_t>(bs)]; }

  private:
    UserLayout users_;
    std::vector<CMat> filters_;
    RVec rho_;
};

inline ChannelEstimate mmse_estimate(const std::vector<CMat>& y, const PilotBook& book, const NetworkScenario& sc)
{
    const PilotGram gram(book, sc);
    return MmseEstimator(book, sc, gram).estimate(y);
}

// Genie estimate: hhat equals the true own-cell channel.
inline ChannelEstimate perfect_estimate(const ChannelDraw& draw, const NetworkScenario& sc)
{
    ChannelEstimate est;
    est.rho = RVec::Zero(sc.num_users());
    for (int i = 0; i < sc.num_cells(); ++i) {
        est.hhat.push_back(draw.at_bs(i).middleCols(sc.users.offset(i), sc.users.users_in(i)));
        for (int k = 0; k < sc.users.users_in(i); ++k) {
            const int u = sc.users.index(i, k);
            est.rho(u) = sc.large_scale(i, u);
        }
    }
    return est;
}

struct Realization {
    ChannelDraw draw;
    ChannelEstimate estimate;
};

// Draw t of a reproducible channel stream: fading, pilot-phase noise and the
// MMSE estimate all come from the engine keyed by (seed, t).
class ChannelStream {
  public:
    ChannelStream(const NetworkScenario& sc, const PilotBook& book, std::uint64_t seed, bool perfect_csi = false)
        : sc_(&sc), book_(&book), gram_(book, sc), estimator_(book, sc, gram_), seed_(seed), perfect_(perfect_csi)
    {
    }

    Realization operator()(std::uint64_t t) const
    {
        Rng rng = stream_rng(seed_, StreamTag::Channel, t);
        Realization r;
        r.draw = sample_channel(*sc_, rng, t);
        if (perfect_) {
            r.estimate = perfect_estimate(r.draw, *sc_);
        } else {
            const auto y = pilot_phase_rx(r.draw, *book_, *sc_, rng);
            r.estimate = estimator_.estimate(y);
        }
        return r;
    }

    const NetworkScenario& scenario() const { return *sc_; }
    const PilotGram& gram() const { return gram_; }
    const MmseEstimator& estimator() const { return estimator_; }
    std::uint64_t seed() const { return seed_; }

  private:
    const NetworkScenario* sc_;
    const PilotBook* book_;
    PilotGram gram_;
    MmseEstimator estimator_;
    std::uint64_t seed_;
    bool perfect_;
};

} // namespace mimopc
