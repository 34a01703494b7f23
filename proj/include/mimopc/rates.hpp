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

#include "mimopc/channel.hpp"

namespace mimopc {

inline bool is_feasible(const PowerVector& p, double pmax)
{
    return (p.array() >= 0.0).all() && (p.array() <= pmax).all();
}

inline double weighted_sum(const RVec& rates, const RVec& weights) { return weights.dot(rates); }

// ---- instantaneous MRC rates --------------------------------------------

// Per-draw quantities that determine every user's MRC SINR:
//   gamma_u = signal_u p_u / (sum_v cross(u,v) p_v + noise_u)
// with signal_u = |hhat_u|^4, cross(u,v) = |hhat_u^* h_{i,v}|^2 for v != u,
// cross(u,u) = |hhat_u^* (h_{i,u} - hhat_u)|^2 and noise_u = sigma^2 |hhat_u|^2.
struct InstantRateContext {
    RVec signal;
    RMat cross;
    RVec noise;
    RVec weights;

    int num_users() const { return static_cast<int>(signal.size()); }
};

inline InstantRateContext make_instant_context(const ChannelDraw& draw, const ChannelEstimate& est,
                                               const UserLayout& users, double noise_power, const RVec& weights)
{
    const int n = users.num_users();
    if (weights.size() != n)
        throw std::invalid_argument("weights size does not match user count");
    InstantRateContext ctx;
    ctx.signal.resize(n);
    ctx.noise.resize(n);
    ctx.cross.resize(n, n);
    ctx.weights = weights;
    for (int i = 0; i < users.num_cells(); ++i) {
        const CMat& hh = est.hhat[static_cast<std::size_t>(i)];
        const CMat proj = hh.adjoint() * draw.at_bs(i);
        for (int k = 0; k < users.users_in(i); ++k) {
            const int u = users.index(i, k);
            const double e = hh.col(k).squaredNorm();
            ctx.signal(u) = e * e;
            ctx.noise(u) = noise_power * e;
            for (int v = 0; v < n; ++v)
                ctx.cross(u, v) = std::norm(proj(k, v));
            ctx.cross(u, u) = std::norm(proj(k, u) - e);
        }
    }
    return ctx;
}

inline InstantRateContext make_instant_context(const Realization& r, const NetworkScenario& sc, const RVec& weights)
{
    return make_instant_context(r.draw, r.estimate, sc.users, sc.noise_power, weights);
}

inline RVec instant_sinr(const PowerVector& p, const InstantRateContext& ctx)
{
    const RVec den = ctx.cross * p + ctx.noise;
    RVec g(ctx.num_users());
    for (int u = 0; u < ctx.num_users(); ++u) {
        const double num = ctx.signal(u) * p(u);
        g(u) = (num > 0.0 && den(u) > 0.0) ? num / den(u) : 0.0;
    }
    return g;
}

inline double rate_from_sinr(double sinr) { return std::log2(1.0 + sinr); }

inline RVec instant_rate(const PowerVector& p, const InstantRateContext& ctx)
{
    return instant_sinr(p, ctx).unaryExpr([](double g) { return rate_from_sinr(g); });
}

// J(u, v) = dR_u / dp_v in bits per watt. Writing T_u = D_u + signal_u p_u
// for the total received term, R_u = log2 T_u - log2 D_u, hence
//   dR_u/dp_v = (cross(u,v) + signal_u [u==v]) / (T_u ln 2) - cross(u,v) / (D_u ln 2).
inline RMat instant_rate_grad(const PowerVector& p, const InstantRateContext& ctx)
{
    const int n = ctx.num_users();
    const RVec den = ctx.cross * p + ctx.noise;
    RMat j = RMat::Zero(n, n);
    for (int u = 0; u < n; ++u) {
        if (ctx.signal(u) <= 0.0 || den(u) <= 0.0)
            continue;
        const double total = den(u) + ctx.signal(u) * p(u);
        for (int v = 0; v < n; ++v)
            j(u, v) = (ctx.cross(u, v) / total - ctx.cross(u, v) / den(u)) / kLn2;
        j(u, u) += ctx.signal(u) / (total * kLn2);
    }
    return j;
}

// ---- deterministic (use-and-then-forget) rates --------------------------

struct DetRateCoeffs {
    int antennas = 0;
    double noise_power = 0.0;
    RVec rho;        // v_{i,u}^2 phi_u^* U_i^{-1} phi_u
    RVec a;          // M^2 rho_u^2
    RMat b;          // b(u, v) = M rho_u v_{i,v} + M^2 v_{i,u}^2 v_{i,v}^2 |phi_u^* U_i^{-1} phi_v|^2
    RVec noise_term; // M rho_u sigma^2

    int num_users() const { return static_cast<int>(a.size()); }
};

inline DetRateCoeffs det_coeffs(const PilotBook& book, const NetworkScenario& sc, const PilotGram& gram)
{
    const int n = sc.num_users();
    const double m = sc.antennas();
    DetRateCoeffs c;
    c.antennas = sc.antennas();
    c.noise_power = sc.noise_power;
    c.rho.resize(n);
    c.a.resize(n);
    c.noise_term.resize(n);
    c.b.resize(n, n);
    for (int i = 0; i < sc.num_cells(); ++i) {
        // q(k, v) = phi_{(i,k)}^* U_i^{-1} phi_v
        const CMat x = gram.solve(i, book.sequences);
        const CMat q = book.cell(i).adjoint() * x;
        for (int k = 0; k < sc.users.users_in(i); ++k) {
            const int u = sc.users.index(i, k);
            const double vu = sc.large_scale(i, u);
            c.rho(u) = vu * vu * q(k, u).real();
            c.a(u) = m * m * c.rho(u) * c.rho(u);
            c.noise_term(u) = m * c.rho(u) * sc.noise_power;
            for (int v = 0; v < n; ++v) {
                const double vv = sc.large_scale(i, v);
                c.b(u, v) = m * c.rho(u) * vv + m * m * vu * vu * vv * vv * std::norm(q(k, v));
            }
        }
    }
    return c;
}

inline DetRateCoeffs det_coeffs(const PilotBook& book, const NetworkScenario& sc)
{
    return det_coeffs(book, sc, PilotGram(book, sc));
}

// Denominator of the deterministic SINR: sum_v b(u,v) p_v + M rho_u sigma^2 - a_u p_u.
inline RVec det_interference(const PowerVector& p, const DetRateCoeffs& c)
{
    return c.b * p + c.noise_term - c.a.cwiseProduct(p);
}

inline RVec det_sinr(const PowerVector& p, const DetRateCoeffs& c)
{
    const RVec den = det_interference(p, c);
    RVec g(c.num_users());
    for (int u = 0; u < c.num_users(); ++u) {
        if (!(den(u) > 0.0))
            throw NumericalError("deterministic SINR denominator is not positive for user " + std::to_string(u));
        g(u) = c.a(u) * p(u) / den(u);
    }
    return g;
}

inline RVec det_rate(const PowerVector& p, const DetRateCoeffs& c)
{
    return det_sinr(p, c).unaryExpr([](double g) { return rate_from_sinr(g); });
}

// dRhat_u / dp_v, same log-difference form as instant_rate_grad.
inline RMat det_rate_jacobian(const PowerVector& p, const DetRateCoeffs& c)
{
    const int n = c.num_users();
    const RVec total = c.b * p + c.noise_term;
    const RVec den = total - c.a.cwiseProduct(p);
    RMat j(n, n);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            const double interf = c.b(u, v) - (u == v ? c.a(u) : 0.0);
            j(u, v) = (c.b(u, v) / total(u) - interf / den(u)) / kLn2;
        }
    }
    return j;
}

inline RVec det_wsr_gradient(const PowerVector& p, const DetRateCoeffs& c, const RVec& weights)
{
    return det_rate_jacobian(p, c).transpose() * weights;
}

} // namespace mimopc
