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

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mimopc;

namespace {

ExperimentSettings small_settings()
{
    ExperimentSettings s;
    s.scenario.num_cells = 3;
    s.scenario.users_per_cell.assign(3, 2);
    s.scenario.antennas = 8;
    s.pilot_length = 4;
    s.seeds = {1, 2, 3};
    s.draws = 200;
    s.stochastic.max_iter = 300;
    return s;
}

} // namespace

TEST(Ergodic, ZeroPowerZeroRate)
{
    const NetworkScenario sc = oracle::toy_scenario(2, 2, 8, 1);
    const PilotBook book = make_pilots(PilotKind::RandomGaussian, 4, sc, 1);
    const ErgodicEstimate e = mc_ergodic(PowerVector::Zero(4), sc, book, 100, 5);
    EXPECT_EQ(e.mean.norm(), 0.0);
    EXPECT_EQ(e.stderr_.norm(), 0.0);
    EXPECT_EQ(e.draws, 100);
}

TEST(Ergodic, FixedPerfectChannelIsDegenerate)
{
    const NetworkScenario sc = oracle::toy_scenario(1, 1, 6, 2);
    Rng rng = stream_rng(2, StreamTag::Channel);
    Realization fixed;
    fixed.draw = sample_channel(sc, rng);
    fixed.estimate = perfect_estimate(fixed.draw, sc);
    const PowerVector p = PowerVector::Constant(1, sc.pmax);
    const ErgodicEstimate e = mc_ergodic(p, sc, [&](std::uint64_t) { return fixed; }, 50);
    const double expected = instant_rate(p, make_instant_context(fixed, sc, RVec::Ones(1)))(0);
    EXPECT_EQ(e.mean(0), expected);
    EXPECT_EQ(e.stderr_(0), 0.0);
}

TEST(Ergodic, DeterministicRateIsALowerBound)
{
    ScenarioConfig cfg;
    cfg.seed = 3;
    const NetworkScenario sc = generate_scenario(cfg);
    const PilotBook book = make_pilots(PilotKind::NonorthogonalFrame, 16, sc, 3);
    const DetRateCoeffs c = det_coeffs(book, sc);
    const PowerVector p = algorithm1(c, RVec::Ones(63), sc.pmax).state.p;
    const RVec det = det_rate(p, c);
    const ErgodicEstimate e = mc_ergodic(p, sc, book, 1000, 3);
    int violations = 0;
    for (int u = 0; u < 63; ++u)
        violations += det(u) > e.mean(u) + 3.0 * e.stderr_(u);
    EXPECT_LE(violations, 1);
}

TEST(Ergodic, StandardErrorShrinksAsRootN)
{
    const NetworkScenario sc = oracle::toy_scenario(2, 2, 8, 4);
    const PilotBook book = make_pilots(PilotKind::RandomGaussian, 4, sc, 4);
    const PowerVector p = equal_power(sc);
    const ErgodicEstimate a = mc_ergodic(p, sc, book, 2000, 9);
    const ErgodicEstimate b = mc_ergodic(p, sc, book, 8000, 9);
    for (int u = 0; u < 4; ++u)
        EXPECT_NEAR(a.stderr_(u) / b.stderr_(u), 2.0, 0.2);
}

TEST(Ergodic, ThreadCountDoesNotChangeResult)
{
    const NetworkScenario sc = oracle::toy_scenario(3, 2, 8, 4);
    const PilotBook book = make_pilots(PilotKind::NonorthogonalFrame, 4, sc, 4);
    const ErgodicEstimate a = mc_ergodic(equal_power(sc), sc, book, 301, 9, 1);
    const ErgodicEstimate b = mc_ergodic(equal_power(sc), sc, book, 301, 9, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_EQ(a.stream_hash, b.stream_hash);
}

TEST(Cdf, SingleValueStep)
{
    const EmpiricalCdf f = rate_cdf({3.5});
    EXPECT_EQ(f(3.4999), 0.0);
    EXPECT_EQ(f(3.5), 1.0);
    EXPECT_EQ(f.median(), 3.5);
}

TEST(Cdf, InterpolatedMedianAndSteps)
{
    const EmpiricalCdf f = rate_cdf({4.0, 1.0, 3.0, 2.0});
    EXPECT_DOUBLE_EQ(f.median(), 2.5);
    EXPECT_DOUBLE_EQ(f(2.0), 0.5);
    EXPECT_DOUBLE_EQ(f(2.9), 0.5);
    EXPECT_DOUBLE_EQ(f.prob(3), 1.0);
    EXPECT_DOUBLE_EQ(f.quantile(0.0), 1.0);
    EXPECT_DOUBLE_EQ(f.quantile(1.0), 4.0);
    EXPECT_THROW(rate_cdf({}), std::invalid_argument);
}

TEST(Methods, LabelsRoundTrip)
{
    const MethodSpec m = method_spec_from_label("D-N");
    EXPECT_EQ(m.method, PowerMethod::Deterministic);
    EXPECT_EQ(m.pilots, PilotKind::NonorthogonalFrame);
    EXPECT_EQ(method_spec_from_label("S-O").label(), "S-O");
    EXPECT_EQ(method_spec_from_label("E-R").label(), "E-R");
    EXPECT_THROW(method_spec_from_label("Q-N"), std::invalid_argument);
}

TEST(Methods, EqualPowerIsFullPower)
{
    const NetworkScenario sc = generate_scenario(ScenarioConfig{});
    const PowerVector p = equal_power(sc);
    EXPECT_EQ(p.size(), 63);
    EXPECT_TRUE((p.array() == 0.01).all());
}

TEST(Methods, DeterministicBeatsEqualOnTheBound)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const NetworkScenario sc = oracle::toy_scenario(3, 4, 32, seed);
        const PilotBook book = make_pilots(PilotKind::NonorthogonalFrame, 8, sc, seed);
        const DetRateCoeffs c = det_coeffs(book, sc);
        const RVec w = RVec::Ones(12);
        EXPECT_GE(algorithm1(c, w, sc.pmax).state.objective, det_objective(equal_power(sc), c, w));
    }
}

TEST(Seeds, DistinctStreamsPerPurpose)
{
    const ScenarioSeeds a = seeds_for(1), b = seeds_for(2);
    EXPECT_EQ(a.scenario, 1u);
    EXPECT_NE(a.pilots, a.evaluation);
    EXPECT_NE(a.evaluation, a.training);
    EXPECT_NE(a.evaluation, b.evaluation);
}

TEST(Grid, CommonRandomNumbersAcrossMethods)
{
    ExperimentSettings s = small_settings();
    const std::vector<MethodSpec> methods = {method_spec_from_label("D-N"), method_spec_from_label("E-N"),
                                             method_spec_from_label("D-O"), method_spec_from_label("E-O")};
    const GridResult g = run_grid(s, methods);
    ASSERT_EQ(g.methods.size(), 4u);
    for (std::size_t si = 0; si < s.seeds.size(); ++si) {
        EXPECT_EQ(g.methods[0].per_seed[si].stream_hash, g.methods[1].per_seed[si].stream_hash);
        EXPECT_EQ(g.methods[2].per_seed[si].stream_hash, g.methods[3].per_seed[si].stream_hash);
        EXPECT_NE(g.methods[0].per_seed[si].stream_hash, g.methods[0].per_seed[(si + 1) % 3].stream_hash);
    }
    EXPECT_EQ(g.methods[0].samples.size(), 9u);
    EXPECT_NE(g.find("E-O"), nullptr);
    EXPECT_EQ(g.find("S-R"), nullptr);

    s.granularity = CdfGranularity::PerUser;
    EXPECT_EQ(run_grid(s, {methods[1]}).methods[0].samples.size(), 18u);
}

TEST(Grid, ParallelMatchesSequential)
{
    ExperimentSettings s = small_settings();
    const std::vector<MethodSpec> methods = {method_spec_from_label("D-N"), method_spec_from_label("S-O")};
    const GridResult a = run_grid(s, methods);
    s.threads = 3;
    const GridResult b = run_grid(s, methods);
    for (std::size_t m = 0; m < methods.size(); ++m) {
        EXPECT_EQ(a.methods[m].samples, b.methods[m].samples);
        for (std::size_t si = 0; si < s.seeds.size(); ++si)
            EXPECT_EQ(a.methods[m].powers[si], b.methods[m].powers[si]);
    }
}

TEST(Grid, CellSums)
{
    const UserLayout users(std::vector<int>{2, 1, 3});
    const RVec r = (RVec(6) << 1, 2, 3, 4, 5, 6).finished();
    const RVec c = cell_sums(r, users);
    EXPECT_EQ(c, (RVec(3) << 3, 3, 15).finished());
}

TEST(Sweep, RowsPerMethodAndValidation)
{
    ExperimentSettings s = small_settings();
    s.seeds = {1};
    const auto one = antenna_sweep(s, {8}, {method_spec_from_label("E-O")});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].antennas, 8);
    const auto rows = antenna_sweep(s, {4, 8, 16}, {method_spec_from_label("E-O"), method_spec_from_label("D-N")});
    EXPECT_EQ(rows.size(), 6u);
    EXPECT_THROW(antenna_sweep(s, {8, 4}, {method_spec_from_label("E-O")}), std::invalid_argument);
    EXPECT_THROW(antenna_sweep(s, {}, {method_spec_from_label("E-O")}), std::invalid_argument);
}
