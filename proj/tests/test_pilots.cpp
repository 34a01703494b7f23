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

#include <filesystem>

using namespace mimopc;

namespace {

NetworkScenario default_scenario(std::uint64_t seed = 1)
{
    ScenarioConfig c;
    c.seed = seed;
    return generate_scenario(c);
}

} // namespace

TEST(PilotKinds, ParseNamesAndLetters)
{
    EXPECT_EQ(pilot_kind_from_string("N"), PilotKind::NonorthogonalFrame);
    EXPECT_EQ(pilot_kind_from_string("orthogonal"), PilotKind::Orthogonal);
    EXPECT_EQ(pilot_letter(PilotKind::RandomGaussian), 'R');
    EXPECT_THROW(pilot_kind_from_string("bogus"), std::invalid_argument);
}

TEST(Pilots, OrthogonalReusePattern)
{
    const NetworkScenario sc = default_scenario();
    const PilotBook book = make_pilots(PilotKind::Orthogonal, 16, sc, 7);
    const double e = book.column_energy();
    EXPECT_DOUBLE_EQ(e, 16 * sc.pmax);
    for (int i = 0; i < 7; ++i) {
        const CMat g = book.cell(i).adjoint() * book.cell(i);
        for (int k = 0; k < 9; ++k)
            for (int l = 0; l < 9; ++l)
                EXPECT_NEAR(std::abs(g(k, l)), k == l ? e : 0.0, 1e-12 * e);
        for (int j = 0; j < 7; ++j) {
            const CMat x = book.cell(i).adjoint() * book.cell(j);
            for (int k = 0; k < 9; ++k)
                EXPECT_NEAR(std::abs(x(k, k) - e), 0.0, 1e-12 * e);
        }
    }
}

TEST(Pilots, OrthogonalNeedsEnoughSymbols)
{
    const NetworkScenario sc = default_scenario();
    EXPECT_THROW(make_pilots(PilotKind::Orthogonal, 8, sc, 1), std::invalid_argument);
}

TEST(Pilots, EveryKindHasFixedColumnEnergy)
{
    const NetworkScenario sc = default_scenario();
    for (PilotKind k : {PilotKind::Orthogonal, PilotKind::RandomGaussian, PilotKind::NonorthogonalFrame}) {
        const PilotBook book = make_pilots(k, 16, sc, 3);
        const RVec n2 = book.sequences.colwise().squaredNorm();
        for (Eigen::Index c = 0; c < n2.size(); ++c)
            EXPECT_NEAR(n2(c) / book.column_energy(), 1.0, 1e-12) << to_string(k);
    }
}

TEST(Pilots, FrameCoherenceBetweenWelchAndRandom)
{
    const NetworkScenario sc = default_scenario();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const double random_mu = max_coherence(make_pilots(PilotKind::RandomGaussian, 16, sc, seed).sequences);
        const double frame_mu = max_coherence(make_pilots(PilotKind::NonorthogonalFrame, 16, sc, seed).sequences);
        const double welch = std::sqrt((63.0 - 16.0) / (16.0 * 62.0));
        EXPECT_DOUBLE_EQ(welch_bound(63, 16), welch);
        EXPECT_LE(frame_mu, random_mu);
        EXPECT_GE(frame_mu, welch - 1e-12);
        EXPECT_LT(frame_mu, 0.8 * random_mu);
    }
}

TEST(PilotGram, ZeroGainsGiveNoiseOnly)
{
    NetworkScenario sc = default_scenario();
    sc.large_scale.setZero();
    const PilotBook book = make_pilots(PilotKind::RandomGaussian, 16, sc, 1);
    const PilotGram gram(book, sc);
    for (int i = 0; i < 7; ++i)
        EXPECT_LE((gram.matrix(i) - sc.noise_power * CMat::Identity(16, 16)).norm(), 1e-30);
}

TEST(PilotGram, ShermanMorrisonSingleUser)
{
    const NetworkScenario sc = oracle::toy_scenario(1, 1, 4, 11);
    const PilotBook book = make_pilots(PilotKind::RandomGaussian, 5, sc, 4);
    const PilotGram gram(book, sc);
    const CVec phi = book.column(0);
    const double q = phi.dot(gram.solve(0, phi).col(0)).real();
    const double n2 = phi.squaredNorm();
    const double expected = n2 / (sc.noise_power + sc.large_scale(0, 0) * n2);
    EXPECT_NEAR(q / expected, 1.0, 1e-10);
}

TEST(PilotGram, SpectrumBoundedByNoise)
{
    const NetworkScenario sc = default_scenario();
    for (PilotKind k : {PilotKind::Orthogonal, PilotKind::NonorthogonalFrame}) {
        const PilotGram gram(make_pilots(k, 16, sc, 1), sc);
        for (int i = 0; i < 7; ++i) {
            const Eigen::SelfAdjointEigenSolver<CMat> eig(gram.matrix(i));
            // Backward-stable eigensolvers are accurate to a few ulps of the largest eigenvalue.
            const double slack = 64.0 * std::numeric_limits<double>::epsilon() * eig.eigenvalues().maxCoeff();
            EXPECT_GE(eig.eigenvalues().minCoeff(), sc.noise_power - slack);
        }
    }
}

TEST(Pilots, ExternalFileRoundTrip)
{
    const NetworkScenario sc = oracle::toy_scenario(3, 4, 8, 2);
    const PilotBook frame = make_pilots(PilotKind::NonorthogonalFrame, 8, sc, 9);
    const auto path = std::filesystem::temp_directory_path() / "mimopc_pilots_roundtrip.csv";
    write_pilot_file(path.string(), frame);

    PilotOptions opt;
    opt.external_path = path.string();
    const PilotBook back = make_pilots(PilotKind::External, 8, sc, 0, opt);
    EXPECT_LE((back.sequences - frame.sequences).norm() / frame.sequences.norm(), 1e-14);

    EXPECT_THROW(make_pilots(PilotKind::External, 6, sc, 0, opt), std::invalid_argument);
    const NetworkScenario bigger = oracle::toy_scenario(3, 5, 8, 2);
    EXPECT_THROW(make_pilots(PilotKind::External, 8, bigger, 0, opt), std::invalid_argument);
    std::filesystem::remove(path);

    opt.external_path = "/nonexistent/pilots.csv";
    EXPECT_THROW(make_pilots(PilotKind::External, 8, sc, 0, opt), std::invalid_argument);
}

TEST(Pilots, ExternalFileIsRescaledToPilotEnergy)
{
    const NetworkScenario sc = oracle::toy_scenario(2, 1, 4, 2);
    const auto path = std::filesystem::temp_directory_path() / "mimopc_pilots_scale.csv";
    {
        std::ofstream out(path);
        out << "# two users, L=2\n3,0\n0,0\n0,1\n0,0\n";
    }
    PilotOptions opt;
    opt.external_path = path.string();
    const PilotBook book = make_pilots(PilotKind::External, 2, sc, 0, opt);
    const double s = std::sqrt(book.column_energy());
    EXPECT_NEAR(std::abs(book.sequences(0, 0) - cplx(s, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(book.sequences(1, 1) - cplx(s, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(book.sequences(0, 1) - cplx(0.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(book.sequences(1, 0)), 0.0, 1e-15);
    std::filesystem::remove(path);
}
