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

#include "mimopc/power_control.hpp"

#include <algorithm>
#include <concepts>
#include <map>
#include <thread>

namespace mimopc {

// Runs fn(0..count-1) on up to `threads` workers. Each index is handled by
// exactly one worker, so results written to per-index slots do not depend on
// the thread count.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += threads)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

struct ErgodicEstimate {
    RVec mean;
    RVec stderr_;
    long draws = 0;
    std::uint64_t stream_hash = 0; // fingerprint of the consumed channel draws
};

// Monte Carlo estimate of the per-user ergodic MRC rate: draws
// stream(0) ... stream(draws - 1), each with its own pilot phase and estimate.
template <typename Stream>
    requires std::invocable<const Stream&, std::uint64_t>
ErgodicEstimate mc_ergodic(const PowerVector& p, const NetworkScenario& sc, Stream&& stream, long draws,
                           unsigned threads = 1)
{
    if (draws < 1)
        throw std::invalid_argument("evaluation.draws must be >= 1");
    const int n = sc.num_users();
    const RVec ones = RVec::Ones(n);
    RMat rates(n, draws);
    std::vector<std::uint64_t> tags(static_cast<std::size_t>(draws));
    parallel_for(static_cast<std::size_t>(draws), threads, [&](std::size_t d) {
        const Realization r = stream(static_cast<std::uint64_t>(d));
        rates.col(static_cast<Eigen::Index>(d)) = instant_rate(p, make_instant_context(r, sc, ones));
        Fnv1a h;
        const CMat& h0 = r.draw.at_bs(0);
        h.update(h0.data(), sizeof(cplx) * static_cast<std::size_t>(h0.rows()));
        tags[d] = h.value();
    });

    ErgodicEstimate est;
    est.draws = draws;
    // Shifted by the first draw: exact for a degenerate distribution and
    // less cancellation in the variance.
    const RVec shift = rates.col(0);
    const RMat shifted = rates.colwise() - shift;
    const RVec offset = shifted.rowwise().mean();
    est.mean = shift + offset;
    est.stderr_ = RVec::Zero(n);
    if (draws > 1) {
        const RMat centered = shifted.colwise() - offset;
        est.stderr_ = (centered.rowwise().squaredNorm() / static_cast<double>(draws - 1)).cwiseSqrt() /
                      std::sqrt(static_cast<double>(draws));
    }
    Fnv1a all;
    for (std::uint64_t t : tags)
        all.update(&t, sizeof t);
    est.stream_hash = all.value();
    return est;
}

inline ErgodicEstimate mc_ergodic(const PowerVector& p, const NetworkScenario& sc, const PilotBook& book, long draws,
                                  std::uint64_t seed, unsigned threads = 1)
{
    const ChannelStream stream(sc, book, seed);
    return mc_ergodic(p, sc, stream, draws, threads);
}

class EmpiricalCdf {
  public:
    explicit EmpiricalCdf(std::vector<double> values) : x_(std::move(values))
    {
        if (x_.empty())
            throw std::invalid_argument("CDF needs at least one sample");
        std::sort(x_.begin(), x_.end());
    }

    std::size_t size() const { return x_.size(); }
    const std::vector<double>& values() const { return x_; }
    // Plotting position of the k-th sorted value (0-based): (k+1)/n.
    double prob(std::size_t k) const { return static_cast<double>(k + 1) / static_cast<double>(x_.size()); }

    // Right-continuous step function F(x) = #{samples <= x} / n.
    double operator()(double x) const
    {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<double>(it - x_.begin()) / static_cast<double>(x_.size());
    }

    // Linear interpolation between order statistics.
    double quantile(double q) const
    {
        q = std::clamp(q, 0.0, 1.0);
        const double pos = q * static_cast<double>(x_.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, x_.size() - 1);
        return x_[lo] + (pos - static_cast<double>(lo)) * (x_[hi] - x_[lo]);
    }

    double median() const { return quantile(0.5); }

  private:
    std::vector<double> x_;
};

inline EmpiricalCdf rate_cdf(std::vector<double> values) { return EmpiricalCdf(std::move(values)); }

// Uncoordinated baseline: every user at full power.
inline PowerVector equal_power(const NetworkScenario& sc) { return PowerVector::Constant(sc.num_users(), sc.pmax); }

inline RVec cell_sums(const RVec& per_user, const UserLayout& users)
{
    RVec s(users.num_cells());
    for (int i = 0; i < users.num_cells(); ++i)
        s(i) = per_user.segment(users.offset(i), users.users_in(i)).sum();
    return s;
}

// ---- experiment grid -----------------------------------------------------

enum class PowerMethod { Deterministic, Stochastic, Equal };

inline char method_letter(PowerMethod m)
{
    switch (m) {
    case PowerMethod::Deterministic: return 'D';
    case PowerMethod::Stochastic: return 'S';
    case PowerMethod::Equal: return 'E';
    }
    return '?';
}

inline PowerMethod power_method_from_string(const std::string& s)
{
    if (s == "deterministic" || s == "D")
        return PowerMethod::Deterministic;
    if (s == "stochastic" || s == "S")
        return PowerMethod::Stochastic;
    if (s == "equal" || s == "E")
        return PowerMethod::Equal;
    throw std::invalid_argument("unknown power-control method '" + s + "'");
}

struct MethodSpec {
    PowerMethod method = PowerMethod::Deterministic;
    PilotKind pilots = PilotKind::NonorthogonalFrame;

    std::string label() const { return {method_letter(method), '-', pilot_letter(pilots)}; }
    bool operator==(const MethodSpec&) const = default;
};

// Parses labels such as "D-N" or "S-O".
inline MethodSpec method_spec_from_label(const std::string& label)
{
    const auto dash = label.find('-');
    if (dash == std::string::npos)
        throw std::invalid_argument("method label '" + label + "' must look like D-N");
    return {power_method_from_string(label.substr(0, dash)), pilot_kind_from_string(label.substr(dash + 1))};
}

enum class CdfGranularity { PerCell, PerUser };

struct ExperimentSettings {
    ScenarioConfig scenario;
    int pilot_length = 16;
    PilotOptions pilot_options;
    std::vector<std::uint64_t> seeds{1};
    long draws = 1000;
    WmmseOptions deterministic;
    StochasticOptions stochastic;
    unsigned threads = 1;
    CdfGranularity granularity = CdfGranularity::PerCell;
};

struct ScenarioSeeds {
    std::uint64_t scenario, pilots, evaluation, training;
};

// Every method evaluated on scenario seed s sees the same geometry, pilot
// seed and channel streams.
inline ScenarioSeeds seeds_for(std::uint64_t s)
{
    return {s, derive_seed(s, StreamTag::Pilots), derive_seed(s, StreamTag::Benchmark),
            derive_seed(s, StreamTag::Stochastic)};
}

inline PowerVector solve_powers(PowerMethod m, const NetworkScenario& sc, const PilotBook& book, const RVec& w,
                                const ExperimentSettings& cfg, std::uint64_t training_seed)
{
    switch (m) {
    case PowerMethod::Equal: return equal_power(sc);
    case PowerMethod::Deterministic: return algorithm1(det_coeffs(book, sc), w, sc.pmax, cfg.deterministic).state.p;
    case PowerMethod::Stochastic: {
        const ChannelStream train(sc, book, training_seed);
        return algorithm2(sc, w, train, cfg.stochastic).state.p;
    }
    }
    return {};
}

struct MethodOutcome {
    MethodSpec spec;
    std::vector<ErgodicEstimate> per_seed; // aligned with settings.seeds
    std::vector<PowerVector> powers;
    std::vector<double> samples;           // CDF input (per-cell or per-user rates)

    double network_sum(std::size_t seed_idx) const { return per_seed[seed_idx].mean.sum(); }
    double mean_network_sum() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < per_seed.size(); ++i)
            s += network_sum(i);
        return s / static_cast<double>(per_seed.size());
    }
    EmpiricalCdf cdf() const { return EmpiricalCdf(samples); }
};

struct GridResult {
    std::vector<std::uint64_t> seeds;
    std::vector<MethodOutcome> methods;

    const MethodOutcome* find(const std::string& label) const
    {
        for (const auto& m : methods)
            if (m.spec.label() == label)
                return &m;
        return nullptr;
    }
};

inline GridResult run_grid(const ExperimentSettings& cfg, const std::vector<MethodSpec>& methods)
{
    if (methods.empty())
        throw std::invalid_argument("benchmark needs at least one method");
    if (cfg.seeds.empty())
        throw std::invalid_argument("benchmark needs at least one scenario seed");

    const std::size_t ns = cfg.seeds.size();
    GridResult out;
    out.seeds = cfg.seeds;
    for (const auto& m : methods)
        out.methods.push_back({m, std::vector<ErgodicEstimate>(ns), std::vector<PowerVector>(ns), {}});

    std::vector<std::vector<std::vector<double>>> samples(methods.size(), std::vector<std::vector<double>>(ns));

    // Parallel over seeds; MC draws inside run sequentially so that the
    // per-seed work items are independent.
    parallel_for(ns, cfg.threads, [&](std::size_t si) {
        const ScenarioSeeds s = seeds_for(cfg.seeds[si]);
        ScenarioConfig sc_cfg = cfg.scenario;
        sc_cfg.seed = s.scenario;
        const NetworkScenario sc = generate_scenario(sc_cfg);
        const RVec w = RVec::Ones(sc.num_users());

        std::map<PilotKind, PilotBook> books;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const PilotKind kind = methods[mi].pilots;
            if (!books.count(kind))
                books.emplace(kind, make_pilots(kind, cfg.pilot_length, sc, s.pilots, cfg.pilot_options));
            const PilotBook& book = books.at(kind);
            const PowerVector p = solve_powers(methods[mi].method, sc, book, w, cfg, s.training);
            const ChannelStream eval(sc, book, s.evaluation);
            ErgodicEstimate e = mc_ergodic(p, sc, eval, cfg.draws, 1);

            auto& dst = samples[mi][si];
            if (cfg.granularity == CdfGranularity::PerCell) {
                const RVec c = cell_sums(e.mean, sc.users);
                dst.assign(c.data(), c.data() + c.size());
            } else {
                dst.assign(e.mean.data(), e.mean.data() + e.mean.size());
            }
            out.methods[mi].per_seed[si] = std::move(e);
            out.methods[mi].powers[si] = p;
        }
    });

    for (std::size_t mi = 0; mi < methods.size(); ++mi)
        for (std::size_t si = 0; si < ns; ++si)
            out.methods[mi].samples.insert(out.methods[mi].samples.end(), samples[mi][si].begin(),
                                           samples[mi][si].end());
    return out;
}

// Relative gap (a - b) / b between two medians, in percent.
inline double median_improvement_pct(const MethodOutcome& a, const MethodOutcome& b)
{
    const double mb = b.cdf().median();
    return 100.0 * (a.cdf().median() - mb) / mb;
}

struct SweepRow {
    std::string method;
    int antennas = 0;
    double sum_rate = 0.0; // network sum ergodic rate averaged over seeds, bits/s/Hz
    double stderr_ = 0.0;
};

inline std::vector<SweepRow> antenna_sweep(const ExperimentSettings& cfg, const std::vector<int>& antennas,
                                           const std::vector<MethodSpec>& methods)
{
    if (antennas.empty())
        throw std::invalid_argument("sweep.antennas must be nonempty");
    for (std::size_t i = 0; i < antennas.size(); ++i)
        if (antennas[i] < 1 || (i > 0 && antennas[i] <= antennas[i - 1]))
            throw std::invalid_argument("sweep.antennas must be positive and strictly ascending");

    std::vector<SweepRow> rows;
    for (const auto& m : methods) {
        for (int ant : antennas) {
            ExperimentSettings c = cfg;
            c.scenario.antennas = ant;
            const GridResult g = run_grid(c, {m});
            const MethodOutcome& o = g.methods.front();
            double var = 0.0;
            for (const auto& e : o.per_seed)
                var += e.stderr_.squaredNorm();
            const double k = static_cast<double>(o.per_seed.size());
            rows.push_back({m.label(), ant, o.mean_network_sum(), std::sqrt(var) / k});
        }
    }
    return rows;
}

} // namespace mimopc
