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

#include "mimopc/rates.hpp"

#include <chrono>
#include <optional>

namespace mimopc {

struct TraceRow {
    int iter = 0;
    double objective_bits = 0.0;
    double max_power_w = 0.0;
    double min_power_w = 0.0;
    double wall_ms = 0.0;
};

namespace detail {

class Stopwatch {
  public:
    double ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double clamp_power(double x, double pmax) { return std::max(0.0, std::min(x, pmax)); }

} // namespace detail

// ==== Deterministic WMMSE power control ===================================
//
// Weighted sum of the deterministic rates is maximized through the
// equivalent problem
//   min  sum_u w_u (mu_u eta_u - ln mu_u)
//   eta_u = g_u^2 (sum_v b(u,v) p_v + M rho_u sigma^2) + 1 - 2 g_u sqrt(a_u p_u)
// by exact block updates of mu, p and the scalar receive gain g. At g = 1
// eta is the plain MSE expression, and the optimal g makes min over (g, mu)
// equal sum_u w_u (1 - ln 2 * Rhat_u).

struct WmmseState {
    PowerVector p;
    RVec mu;
    RVec eta;
    RVec gain;
    double objective = 0.0; // sum_u w_u Rhat_u in bits
    int iterations = 0;
    bool converged = false;
};

struct WmmseOptions {
    double eps = 1e-4;
    int max_iter = 2000;
    double monotone_tol = 1e-9;
    // When positive, stopping also requires projected_gradient_norm <= this.
    double stationarity_tol = 0.0;
    std::optional<PowerVector> init; // defaults to full power
};

struct WmmseResult {
    WmmseState state;
    double initial_objective = 0.0;
    std::vector<TraceRow> trace;
    std::vector<double> cost_trace; // equivalent-problem cost after each iteration
};

// Unit receive gain: the literal MSE expression.
inline RVec wmmse_eta(const PowerVector& p, const DetRateCoeffs& c)
{
    return (c.b * p + c.noise_term).array() + 1.0 - 2.0 * (c.a.cwiseProduct(p)).array().sqrt();
}

inline RVec wmmse_eta(const PowerVector& p, const RVec& gain, const DetRateCoeffs& c)
{
    const RVec total = c.b * p + c.noise_term;
    const RVec amp = c.a.cwiseProduct(p).cwiseSqrt();
    return gain.cwiseAbs2().cwiseProduct(total).array() + 1.0 - 2.0 * gain.cwiseProduct(amp).array();
}

// MMSE receive gain sqrt(a_u p_u) / (sum_v b(u,v) p_v + M rho_u sigma^2).
inline RVec wmmse_receiver(const PowerVector& p, const DetRateCoeffs& c)
{
    const RVec total = c.b * p + c.noise_term;
    return c.a.cwiseProduct(p).cwiseSqrt().cwiseQuotient(total);
}

inline RVec wmmse_mu(const RVec& eta)
{
    RVec mu(eta.size());
    for (Eigen::Index u = 0; u < eta.size(); ++u) {
        if (!(eta(u) > 0.0) || !std::isfinite(eta(u)))
            throw NumericalError("WMMSE: eta[" + std::to_string(u) + "] = " + std::to_string(eta(u)) +
                                 " is not positive; coefficients are corrupt");
        mu(u) = 1.0 / eta(u);
    }
    return mu;
}

// p_u = [ (w_u mu_u g_u sqrt(a_u) / sum_v w_v mu_v g_v^2 b(v,u))^2 ]_0^pmax
inline PowerVector wmmse_power(const RVec& mu, const RVec& gain, const DetRateCoeffs& c, const RVec& w,
                               double pmax)
{
    const RVec wm = w.cwiseProduct(mu);
    const RVec den = c.b.transpose() * wm.cwiseProduct(gain.cwiseAbs2());
    PowerVector p(c.num_users());
    for (int u = 0; u < c.num_users(); ++u) {
        const double num = wm(u) * gain(u) * std::sqrt(c.a(u));
        p(u) = den(u) > 0.0 ? detail::clamp_power((num / den(u)) * (num / den(u)), pmax) : (num > 0.0 ? pmax : 0.0);
    }
    return p;
}

inline PowerVector wmmse_power(const RVec& mu, const DetRateCoeffs& c, const RVec& w, double pmax)
{
    return wmmse_power(mu, RVec::Ones(c.num_users()), c, w, pmax);
}

inline double wmmse_cost(const PowerVector& p, const RVec& gain, const RVec& mu, const DetRateCoeffs& c,
                         const RVec& w)
{
    const RVec eta = wmmse_eta(p, gain, c);
    return w.dot((mu.cwiseProduct(eta).array() - mu.array().log()).matrix());
}

inline double det_objective(const PowerVector& p, const DetRateCoeffs& c, const RVec& w)
{
    return weighted_sum(det_rate(p, c), w);
}

// Norm of p - P(p + grad) in units where pmax = 1; zero exactly at KKT points
// of the box-constrained weighted sum-rate problem.
inline double projected_gradient_norm(const PowerVector& p, const DetRateCoeffs& c, const RVec& w, double pmax)
{
    const RVec x = p / pmax;
    const RVec g = det_wsr_gradient(p, c, w) * pmax;
    const RVec moved = (x + g).cwiseMax(0.0).cwiseMin(1.0);
    return (x - moved).norm();
}

inline WmmseResult algorithm1(const DetRateCoeffs& c, const RVec& w, double pmax, const WmmseOptions& opt = {})
{
    if (!(opt.eps > 0.0))
        throw std::invalid_argument("deterministic.eps must be positive");
    if (opt.max_iter < 1)
        throw std::invalid_argument("deterministic.max_iter must be >= 1");
    if (w.size() != c.num_users() || (w.array() < 0.0).any())
        throw std::invalid_argument("weights must be non-negative, one per user");

    detail::Stopwatch clock;
    WmmseResult res;
    WmmseState& s = res.state;
    s.p = opt.init.value_or(PowerVector::Constant(c.num_users(), pmax));
    if (s.p.size() != c.num_users() || !is_feasible(s.p, pmax))
        throw std::invalid_argument("initial power vector is infeasible");
    s.gain = wmmse_receiver(s.p, c);
    s.eta = wmmse_eta(s.p, s.gain, c);
    s.objective = det_objective(s.p, c, w);
    res.initial_objective = s.objective;

    double prev = s.objective;
    double prev_cost = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        s.mu = wmmse_mu(s.eta);
        s.p = wmmse_power(s.mu, s.gain, c, w, pmax);
        s.gain = wmmse_receiver(s.p, c);
        s.eta = wmmse_eta(s.p, s.gain, c);
        s.objective = det_objective(s.p, c, w);
        s.iterations = it;

        const double cost = wmmse_cost(s.p, s.gain, s.mu, c, w);
        res.cost_trace.push_back(cost);
        res.trace.push_back({it, s.objective, s.p.maxCoeff(), s.p.minCoeff(), clock.ms()});

        const double inc = s.objective - prev;
        const double scale = std::max(1.0, std::abs(prev));
        if (inc < -opt.monotone_tol * scale || cost > prev_cost + opt.monotone_tol * std::max(1.0, std::abs(cost)))
            throw NumericalError("WMMSE objective decreased at iteration " + std::to_string(it) + " by " +
                                 std::to_string(-inc) + " bits");
        prev_cost = cost;
        prev = s.objective;
        if (inc < opt.eps &&
            (opt.stationarity_tol <= 0.0 || projected_gradient_norm(s.p, c, w, pmax) <= opt.stationarity_tol)) {
            s.converged = true;
            break;
        }
    }
    return res;
}

// ==== Stochastic SCA benchmark ============================================

// Power-law step factors alpha^t = t^-ka, beta^t = t^-kb, or explicit
// sequences (indexed from t = 1, last value repeated past the end).
struct StepSchedule {
    double alpha_exponent = 0.6;
    double beta_exponent = 0.7;
    std::vector<double> alpha_seq;
    std::vector<double> beta_seq;

    bool explicit_sequences() const { return !alpha_seq.empty() || !beta_seq.empty(); }

    static double pick(const std::vector<double>& seq, long t)
    {
        const auto idx = static_cast<std::size_t>(std::max<long>(t, 1) - 1);
        return seq[std::min(idx, seq.size() - 1)];
    }

    double alpha(long t) const
    {
        return alpha_seq.empty() ? std::pow(static_cast<double>(t), -alpha_exponent) : pick(alpha_seq, t);
    }
    double beta(long t) const
    {
        return beta_seq.empty() ? std::pow(static_cast<double>(t), -beta_exponent) : pick(beta_seq, t);
    }
};

inline StepSchedule default_schedule() { return {}; }

struct ScheduleCheck {
    bool ok = true;
    std::vector<std::string> failures;

    void fail(std::string why)
    {
        ok = false;
        failures.push_back(std::move(why));
    }
};

// Conditions 1-3 of the two-timescale convergence theorem. For power laws
// they reduce to 1/2 < ka < 1, 1/2 < kb <= 1 and kb > ka. Explicit sequences
// get the finite-horizon subset: values in (0, 1], nonincreasing alpha and
// beta, nonincreasing beta/alpha. The Lipschitz condition is not checked.
inline ScheduleCheck check_schedule(const StepSchedule& s, long horizon = 20000)
{
    ScheduleCheck r;
    if (!s.explicit_sequences()) {
        const double ka = s.alpha_exponent, kb = s.beta_exponent;
        if (!(ka > 0.0 && ka < 1.0))
            r.fail("alpha: 1/alpha^t = t^ka must be O(t^kappa) with kappa in (0,1)");
        if (!(2.0 * ka > 1.0))
            r.fail("alpha: sum (alpha^t)^2 diverges unless ka > 1/2");
        if (!(kb > 0.0 && kb <= 1.0))
            r.fail("beta: needs beta^t -> 0 and sum beta^t = inf (0 < kb <= 1)");
        if (!(2.0 * kb > 1.0))
            r.fail("beta: sum (beta^t)^2 diverges unless kb > 1/2");
        if (!(kb > ka))
            r.fail("beta^t / alpha^t -> 0 requires kb > ka");
        return r;
    }
    if (s.alpha_seq.empty() || s.beta_seq.empty()) {
        r.fail("explicit schedules need both alpha and beta sequences");
        return r;
    }
    double pa = 1.0, pb = 1.0, pr = std::numeric_limits<double>::infinity();
    for (long t = 1; t <= horizon; ++t) {
        const double a = s.alpha(t), b = s.beta(t);
        if (!(a > 0.0 && a <= 1.0) || !(b > 0.0 && b <= 1.0)) {
            r.fail("step factors must lie in (0, 1] (t=" + std::to_string(t) + ")");
            break;
        }
        if (a > pa || b > pb) {
            r.fail("step factors must be nonincreasing (t=" + std::to_string(t) + ")");
            break;
        }
        if (b / a > pr * (1.0 + 1e-12)) {
            r.fail("beta/alpha must be nonincreasing (t=" + std::to_string(t) + ")");
            break;
        }
        pa = a;
        pb = b;
        pr = b / a;
    }
    return r;
}

// xi^t = alpha^t * sum_v w_v dR_v/dp_u + (1 - alpha^t) xi^{t-1}, with jac(v, u) = dR_v/dp_u.
inline RVec surrogate_xi(const RVec& xi_prev, const RMat& jac, const RVec& w, double alpha)
{
    return alpha * (jac.transpose() * w) + (1.0 - alpha) * xi_prev;
}

// Maximizer of q(p) = xi p - tau/2 (p - p_prev)^2 (+ const) over [0, pmax].
inline PowerVector sca_subproblem(const PowerVector& p_prev, const RVec& xi, const RVec& tau, double pmax)
{
    PowerVector p(p_prev.size());
    for (Eigen::Index u = 0; u < p.size(); ++u)
        p(u) = detail::clamp_power(p_prev(u) + xi(u) / tau(u), pmax);
    return p;
}

inline double sca_q(double p, double p_prev, double xi, double tau, double constant = 0.0)
{
    return constant + xi * p - 0.5 * tau * (p - p_prev) * (p - p_prev);
}

struct SsaState {
    PowerVector p;
    RVec xi;
    RVec tau;
    long t = 0;
    double alpha_t = 0.0;
    double beta_t = 0.0;
    double avg_rate = 0.0; // recursively averaged weighted sum rate, bits
    double surrogate = 0.0;
    bool converged = false;
};

struct StochasticOptions {
    StepSchedule schedule = default_schedule();
    double tau = 1.0;
    double eps = 1e-4;
    long max_iter = 20000;
    int patience = 50; // consecutive sub-eps increments required to stop
    bool enforce_schedule = true;
    std::optional<PowerVector> init;
};

struct StochasticResult {
    SsaState state;
    std::vector<TraceRow> trace;
};

// Stochastic SCA over channel realizations stream(1), stream(2), ...
// Powers are handled internally in units of pmax, so tau and xi are
// dimensionless (bits per pmax). The gradient is taken at p^{t-1}, the
// iterate available when draw t arrives.
template <typename Stream>
StochasticResult algorithm2(const NetworkScenario& sc, const RVec& w, Stream&& stream, const StochasticOptions& opt = {})
{
    if (opt.enforce_schedule) {
        const ScheduleCheck chk = check_schedule(opt.schedule, opt.max_iter);
        if (!chk.ok)
            throw std::invalid_argument("stochastic.schedule: " + chk.failures.front());
    }
    if (!(opt.tau > 0.0))
        throw std::invalid_argument("stochastic.tau must be positive");
    if (opt.max_iter < 1)
        throw std::invalid_argument("stochastic.max_iter must be >= 1");
    const int n = sc.num_users();
    if (w.size() != n || (w.array() < 0.0).any())
        throw std::invalid_argument("weights must be non-negative, one per user");
    const double pmax = sc.pmax;

    detail::Stopwatch clock;
    StochasticResult res;
    SsaState& s = res.state;
    const PowerVector p0 = opt.init.value_or(PowerVector::Constant(n, pmax));
    if (p0.size() != n || !is_feasible(p0, pmax))
        throw std::invalid_argument("initial power vector is infeasible");
    RVec x = p0 / pmax;
    s.xi = RVec::Zero(n);
    s.tau = RVec::Constant(n, opt.tau);

    double prev_surrogate = 0.0;
    int quiet = 0;
    for (long t = 1; t <= opt.max_iter; ++t) {
        const double alpha = opt.schedule.alpha(t);
        const double beta = opt.schedule.beta(t);
        const Realization r = stream(static_cast<std::uint64_t>(t));
        const InstantRateContext ctx = make_instant_context(r, sc, w);

        const PowerVector p_prev = x * pmax;
        const RMat jac = instant_rate_grad(p_prev, ctx) * pmax;
        const double wsr = weighted_sum(instant_rate(p_prev, ctx), w);
        s.avg_rate = (t == 1) ? wsr : (1.0 - alpha) * s.avg_rate + alpha * wsr;
        s.xi = surrogate_xi(s.xi, jac, w, alpha);

        const RVec x_star = sca_subproblem(x, s.xi, s.tau, 1.0);
        const RVec step = x_star - x;
        s.surrogate = s.avg_rate + s.xi.dot(step) - 0.5 * step.dot(s.tau.cwiseProduct(step));
        x = (1.0 - beta) * x + beta * x_star;
        x = x.cwiseMax(0.0).cwiseMin(1.0);

        s.t = t;
        s.alpha_t = alpha;
        s.beta_t = beta;
        s.p = x * pmax;
        res.trace.push_back({static_cast<int>(t), s.surrogate, s.p.maxCoeff(), s.p.minCoeff(), clock.ms()});

        if (t > 1 && std::abs(s.surrogate - prev_surrogate) < opt.eps) {
            if (++quiet >= opt.patience) {
                s.converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
        prev_surrogate = s.surrogate;
    }
    return res;
}

} // namespace mimopc
