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

#include "mimopc/common.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <utility>

namespace mimopc {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclidean(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct ScenarioConfig {
    int num_cells = 7;
    std::vector<int> users_per_cell = std::vector<int>(7, 9);
    int antennas = 96;
    double cell_radius_m = 500.0;
    double pmax_dbm = 10.0;
    double noise_psd_dbm_hz = -169.0;
    double bandwidth_hz = 1e6;
    double pathloss_exponent = 3.0;
    double shadowing_std_db = 8.0;
    double min_distance_m = 10.0;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument naming the offending field.
    void validate() const
    {
        auto fail = [](const std::string& field, const std::string& why) {
            throw std::invalid_argument("scenario." + field + ": " + why);
        };
        if (num_cells < 1)
            fail("num_cells", "must be >= 1");
        if (static_cast<int>(users_per_cell.size()) != num_cells)
            fail("users_per_cell", "needs one entry per cell");
        for (int k : users_per_cell)
            if (k < 1)
                fail("users_per_cell", "every cell needs at least one user");
        if (antennas < 1)
            fail("antennas", "must be >= 1");
        if (!(cell_radius_m > 0.0) || !std::isfinite(cell_radius_m))
            fail("cell_radius_m", "must be positive");
        if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
            fail("bandwidth_hz", "must be positive");
        if (!(shadowing_std_db >= 0.0))
            fail("shadowing_std_db", "must be non-negative");
        if (!(pathloss_exponent > 0.0))
            fail("pathloss_exponent", "must be positive");
        if (!(min_distance_m > 0.0))
            fail("min_distance_m", "must be positive");
        if (!std::isfinite(pmax_dbm))
            fail("pmax_dbm", "must be finite");
        if (!std::isfinite(noise_psd_dbm_hz))
            fail("noise_psd_dbm_hz", "must be finite");
    }

    double pmax_watts() const { return dbm_to_watts(pmax_dbm); }
    double noise_watts() const { return dbm_to_watts(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz)); }
};

// Periodic cell layout. Seven cells form the hexagonal cluster whose six
// mirror images tile the plane; any other count is laid out as a ring of
// cells along x that wraps around after num_cells * spacing.
class CellLayout {
  public:
    CellLayout(int num_cells, double radius) : radius_(radius)
    {
        const double spacing = std::sqrt(3.0) * radius;
        if (num_cells == 7) {
            centers_.push_back({0.0, 0.0});
            for (int k = 0; k < 6; ++k) {
                const double ang = k * std::numbers::pi / 3.0;
                centers_.push_back({spacing * std::cos(ang), spacing * std::sin(ang)});
            }
            // Cluster translation 2*a1 + a2 and its rotations by multiples of 60 deg.
            const double tx = spacing * (2.0 + 0.5);
            const double ty = spacing * (std::sqrt(3.0) / 2.0);
            for (int k = 0; k < 6; ++k) {
                const double ang = k * std::numbers::pi / 3.0;
                const double c = std::cos(ang), s = std::sin(ang);
                mirrors_.push_back({c * tx - s * ty, s * tx + c * ty});
            }
        } else {
            for (int i = 0; i < num_cells; ++i)
                centers_.push_back({i * spacing, 0.0});
            const double period = num_cells * spacing;
            mirrors_.push_back({period, 0.0});
            mirrors_.push_back({-period, 0.0});
        }
    }

    const std::vector<Point>& centers() const { return centers_; }
    const std::vector<Point>& mirror_translations() const { return mirrors_; }
    double radius() const { return radius_; }

    // Pointy-top regular hexagon with circumradius `radius` around `center`.
    bool inside_hexagon(Point p, Point center) const
    {
        const double dx = std::abs(p.x - center.x);
        const double dy = std::abs(p.y - center.y);
        const double inr = std::sqrt(3.0) / 2.0 * radius_;
        if (dx > inr || dy > radius_)
            return false;
        return dx / std::sqrt(3.0) + dy <= radius_ + 1e-12;
    }

    // Symmetric to the last bit: the pair is put in a canonical order first.
    double raw_wrap_distance(Point a, Point b) const
    {
        if (b.x < a.x || (b.x == a.x && b.y < a.y))
            std::swap(a, b);
        double best = euclidean(a, b);
        for (const Point& t : mirrors_)
            best = std::min(best, std::hypot(a.x - b.x + t.x, a.y - b.y + t.y));
        return best;
    }

  private:
    double radius_;
    std::vector<Point> centers_;
    std::vector<Point> mirrors_;
};

struct NetworkScenario {
    ScenarioConfig config;
    UserLayout users;
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;
    // large_scale(j, u): gain from user u to BS j.
    RMat large_scale;
    double noise_power = 0.0;
    double pmax = 0.0;

    int num_cells() const { return users.num_cells(); }
    int num_users() const { return users.num_users(); }
    int antennas() const { return config.antennas; }
    double gain(int bs, int user) const { return large_scale(bs, user); }
};

inline double wrap_distance(Point a, Point b, const ScenarioConfig& config)
{
    const CellLayout layout(config.num_cells, config.cell_radius_m);
    return std::max(layout.raw_wrap_distance(a, b), config.min_distance_m);
}

inline double wrap_distance(Point a, Point b, const NetworkScenario& scenario)
{
    return wrap_distance(a, b, scenario.config);
}

inline NetworkScenario generate_scenario(const ScenarioConfig& config)
{
    config.validate();
    const CellLayout layout(config.num_cells, config.cell_radius_m);

    NetworkScenario sc;
    sc.config = config;
    sc.users = UserLayout(config.users_per_cell);
    sc.bs_positions = layout.centers();
    sc.noise_power = config.noise_watts();
    sc.pmax = config.pmax_watts();

    Rng rng = stream_rng(config.seed, StreamTag::Scenario);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double r = config.cell_radius_m;
    const double inr = std::sqrt(3.0) / 2.0 * r;

    sc.user_positions.reserve(static_cast<std::size_t>(sc.num_users()));
    for (int i = 0; i < config.num_cells; ++i) {
        const Point c = sc.bs_positions[static_cast<std::size_t>(i)];
        for (int k = 0; k < sc.users.users_in(i); ++k) {
            Point p;
            do {
                p = {c.x + inr * unit(rng), c.y + r * unit(rng)};
            } while (!layout.inside_hexagon(p, c));
            sc.user_positions.push_back(p);
        }
    }

    std::normal_distribution<double> shadow(0.0, 1.0);
    sc.large_scale.resize(config.num_cells, sc.num_users());
    for (int u = 0; u < sc.num_users(); ++u) {
        for (int j = 0; j < config.num_cells; ++j) {
            const double d = std::max(
                layout.raw_wrap_distance(sc.user_positions[static_cast<std::size_t>(u)],
                                         sc.bs_positions[static_cast<std::size_t>(j)]),
                config.min_distance_m);
            const double x_db = config.shadowing_std_db * shadow(rng);
            sc.large_scale(j, u) = std::pow(10.0, x_db / 10.0) / std::pow(d, config.pathloss_exponent);
        }
    }
    return sc;
}

// Rescales so that the noise power is 1. Every SINR is unchanged; pmax stays
// in watts.
inline NetworkScenario normalized(const NetworkScenario& sc)
{
    NetworkScenario out = sc;
    out.large_scale /= sc.noise_power;
    out.noise_power = 1.0;
    return out;
}

} // namespace mimopc
