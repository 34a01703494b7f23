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

#include "mimopc/evaluation.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mimopc {

using json = nlohmann::json;

// ---- scenario documents --------------------------------------------------

inline json to_json(const ScenarioConfig& c)
{
    return {{"num_cells", c.num_cells},
            {"users_per_cell", c.users_per_cell},
            {"antennas", c.antennas},
            {"cell_radius_m", c.cell_radius_m},
            {"pmax_dbm", c.pmax_dbm},
            {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
            {"bandwidth_hz", c.bandwidth_hz},
            {"pathloss_exponent", c.pathloss_exponent},
            {"shadowing_std_db", c.shadowing_std_db},
            {"min_distance_m", c.min_distance_m},
            {"seed", c.seed}};
}

namespace detail {

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& prefix)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(prefix + key + ": " + e.what());
    }
}

} // namespace detail

// Missing keys keep their defaults; users_per_cell may be a scalar.
inline ScenarioConfig scenario_config_from_json(const json& j)
{
    ScenarioConfig c;
    if (!j.is_object())
        throw std::invalid_argument("scenario: expected an object");
    const std::string pre = "scenario.";
    detail::read_field(j, "num_cells", c.num_cells, pre);
    if (j.contains("users_per_cell")) {
        const json& k = j.at("users_per_cell");
        if (k.is_number_integer())
            c.users_per_cell.assign(static_cast<std::size_t>(std::max(c.num_cells, 0)), k.get<int>());
        else
            detail::read_field(j, "users_per_cell", c.users_per_cell, pre);
    } else {
        c.users_per_cell.assign(static_cast<std::size_t>(std::max(c.num_cells, 0)), 9);
    }
    detail::read_field(j, "antennas", c.antennas, pre);
    detail::read_field(j, "cell_radius_m", c.cell_radius_m, pre);
    detail::read_field(j, "pmax_dbm", c.pmax_dbm, pre);
    detail::read_field(j, "noise_psd_dbm_hz", c.noise_psd_dbm_hz, pre);
    detail::read_field(j, "bandwidth_hz", c.bandwidth_hz, pre);
    detail::read_field(j, "pathloss_exponent", c.pathloss_exponent, pre);
    detail::read_field(j, "shadowing_std_db", c.shadowing_std_db, pre);
    detail::read_field(j, "min_distance_m", c.min_distance_m, pre);
    detail::read_field(j, "seed", c.seed, pre);
    c.validate();
    return c;
}

inline json to_json(const NetworkScenario& sc)
{
    json bs = json::array(), ue = json::array(), v = json::array();
    for (const Point& p : sc.bs_positions)
        bs.push_back({p.x, p.y});
    for (const Point& p : sc.user_positions)
        ue.push_back({p.x, p.y});
    for (Eigen::Index j = 0; j < sc.large_scale.rows(); ++j) {
        json row = json::array();
        for (Eigen::Index u = 0; u < sc.large_scale.cols(); ++u)
            row.push_back(sc.large_scale(j, u));
        v.push_back(std::move(row));
    }
    return {{"config", to_json(sc.config)}, {"bs_positions", bs}, {"user_positions", ue},
            {"large_scale", v},             {"noise_power_w", sc.noise_power}, {"pmax_w", sc.pmax}};
}

inline NetworkScenario scenario_from_json(const json& j)
{
    NetworkScenario sc;
    sc.config = scenario_config_from_json(j.at("config"));
    sc.users = UserLayout(sc.config.users_per_cell);
    for (const auto& p : j.at("bs_positions"))
        sc.bs_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& p : j.at("user_positions"))
        sc.user_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const auto& v = j.at("large_scale");
    sc.large_scale.resize(static_cast<Eigen::Index>(v.size()), sc.num_users());
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (v[r].size() != static_cast<std::size_t>(sc.num_users()))
            throw std::invalid_argument("scenario.large_scale: row " + std::to_string(r) + " has wrong length");
        for (std::size_t u = 0; u < v[r].size(); ++u)
            sc.large_scale(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u)) = v[r][u].get<double>();
    }
    sc.noise_power = j.at("noise_power_w").get<double>();
    sc.pmax = j.value("pmax_w", sc.config.pmax_watts());
    if (sc.large_scale.rows() != sc.num_cells() || static_cast<int>(sc.bs_positions.size()) != sc.num_cells() ||
        static_cast<int>(sc.user_positions.size()) != sc.num_users())
        throw std::invalid_argument("scenario document dimensions do not match its config");
    if (!(sc.noise_power > 0.0))
        throw std::invalid_argument("scenario.noise_power_w must be positive");
    return sc;
}

// Debug dump of one realization in the same JSON dialect.
inline json to_json(const ChannelDraw& d)
{
    json bs = json::array();
    for (const CMat& h : d.h) {
        json re = json::array(), im = json::array();
        for (Eigen::Index c = 0; c < h.cols(); ++c) {
            json cr = json::array(), ci = json::array();
            for (Eigen::Index r = 0; r < h.rows(); ++r) {
                cr.push_back(h(r, c).real());
                ci.push_back(h(r, c).imag());
            }
            re.push_back(std::move(cr));
            im.push_back(std::move(ci));
        }
        bs.push_back({{"re", re}, {"im", im}});
    }
    return {{"index", d.index}, {"h", bs}};
}

// ---- run configuration ---------------------------------------------------

struct RunConfig {
    std::uint64_t seed = 1;
    ScenarioConfig scenario;
    PilotKind pilot_kind = PilotKind::NonorthogonalFrame;
    int pilot_length = 16;
    PilotOptions pilot_options;
    PowerMethod method = PowerMethod::Deterministic;
    WmmseOptions deterministic;
    StochasticOptions stochastic;
    long draws = 1000;
    int num_seeds = 50;
    CdfGranularity granularity = CdfGranularity::PerCell;
    std::vector<MethodSpec> benchmark_methods;
    std::vector<int> sweep_antennas{32, 64, 96, 128};
    std::vector<MethodSpec> sweep_methods;
    unsigned threads = 1;

    ExperimentSettings experiment() const
    {
        ExperimentSettings e;
        e.scenario = scenario;
        e.pilot_length = pilot_length;
        e.pilot_options = pilot_options;
        e.seeds.clear();
        for (int i = 0; i < num_seeds; ++i)
            e.seeds.push_back(seed + static_cast<std::uint64_t>(i));
        e.draws = draws;
        e.deterministic = deterministic;
        e.stochastic = stochastic;
        e.threads = threads;
        e.granularity = granularity;
        return e;
    }
};

inline std::vector<MethodSpec> all_method_specs()
{
    std::vector<MethodSpec> v;
    for (PilotKind k : {PilotKind::NonorthogonalFrame, PilotKind::Orthogonal, PilotKind::RandomGaussian})
        for (PowerMethod m : {PowerMethod::Deterministic, PowerMethod::Stochastic, PowerMethod::Equal})
            v.push_back({m, k});
    return v;
}

inline std::string method_name(PowerMethod m)
{
    switch (m) {
    case PowerMethod::Deterministic: return "deterministic";
    case PowerMethod::Stochastic: return "stochastic";
    case PowerMethod::Equal: return "equal";
    }
    return "?";
}

inline json to_json(const RunConfig& c)
{
    auto labels = [](const std::vector<MethodSpec>& v) {
        json a = json::array();
        for (const auto& m : v)
            a.push_back(m.label());
        return a;
    };
    json pil = {{"kind", to_string(c.pilot_kind)},
                {"length", c.pilot_length},
                {"energy_w", c.pilot_options.energy_per_symbol},
                {"frame_rounds", c.pilot_options.frame_rounds},
                {"external_path", c.pilot_options.external_path}};
    json det = {{"eps", c.deterministic.eps},
                {"max_iter", c.deterministic.max_iter},
                {"stationarity_tol", c.deterministic.stationarity_tol}};
    json sto = {{"alpha_exponent", c.stochastic.schedule.alpha_exponent},
                {"beta_exponent", c.stochastic.schedule.beta_exponent},
                {"tau", c.stochastic.tau},
                {"eps", c.stochastic.eps},
                {"max_iter", c.stochastic.max_iter},
                {"patience", c.stochastic.patience}};
    json ev = {{"draws", c.draws},
               {"seeds", c.num_seeds},
               {"granularity", c.granularity == CdfGranularity::PerCell ? "cell" : "user"}};
    return {{"seed", c.seed},
            {"scenario", to_json(c.scenario)},
            {"pilots", pil},
            {"method", method_name(c.method)},
            {"deterministic", det},
            {"stochastic", sto},
            {"evaluation", ev},
            {"benchmark", {{"methods", labels(c.benchmark_methods)}}},
            {"sweep", {{"antennas", c.sweep_antennas}, {"methods", labels(c.sweep_methods)}}},
            {"threads", c.threads}};
}

inline RunConfig run_config_from_json(const json& j)
{
    if (!j.is_object())
        throw std::invalid_argument("config: expected a JSON object");
    RunConfig c;
    detail::read_field(j, "seed", c.seed, "");
    detail::read_field(j, "threads", c.threads, "");
    if (j.contains("scenario"))
        c.scenario = scenario_config_from_json(j.at("scenario"));
    c.scenario.seed = c.seed;

    if (j.contains("pilots")) {
        const json& p = j.at("pilots");
        std::string kind = to_string(c.pilot_kind);
        detail::read_field(p, "kind", kind, "pilots.");
        c.pilot_kind = pilot_kind_from_string(kind);
        detail::read_field(p, "length", c.pilot_length, "pilots.");
        detail::read_field(p, "energy_w", c.pilot_options.energy_per_symbol, "pilots.");
        detail::read_field(p, "frame_rounds", c.pilot_options.frame_rounds, "pilots.");
        detail::read_field(p, "external_path", c.pilot_options.external_path, "pilots.");
    }
    if (j.contains("method"))
        c.method = power_method_from_string(j.at("method").get<std::string>());
    if (j.contains("deterministic")) {
        detail::read_field(j.at("deterministic"), "eps", c.deterministic.eps, "deterministic.");
        detail::read_field(j.at("deterministic"), "max_iter", c.deterministic.max_iter, "deterministic.");
        detail::read_field(j.at("deterministic"), "stationarity_tol", c.deterministic.stationarity_tol,
                           "deterministic.");
    }
    if (j.contains("stochastic")) {
        const json& s = j.at("stochastic");
        detail::read_field(s, "alpha_exponent", c.stochastic.schedule.alpha_exponent, "stochastic.");
        detail::read_field(s, "beta_exponent", c.stochastic.schedule.beta_exponent, "stochastic.");
        detail::read_field(s, "tau", c.stochastic.tau, "stochastic.");
        detail::read_field(s, "eps", c.stochastic.eps, "stochastic.");
        detail::read_field(s, "max_iter", c.stochastic.max_iter, "stochastic.");
        detail::read_field(s, "patience", c.stochastic.patience, "stochastic.");
    }
    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        detail::read_field(e, "draws", c.draws, "evaluation.");
        detail::read_field(e, "seeds", c.num_seeds, "evaluation.");
        std::string g = "cell";
        detail::read_field(e, "granularity", g, "evaluation.");
        if (g == "cell")
            c.granularity = CdfGranularity::PerCell;
        else if (g == "user")
            c.granularity = CdfGranularity::PerUser;
        else
            throw std::invalid_argument("evaluation.granularity: expected 'cell' or 'user'");
    }
    auto read_labels = [&](const json& parent, const char* key, const std::string& prefix) {
        std::vector<std::string> labels;
        detail::read_field(parent, key, labels, prefix);
        std::vector<MethodSpec> out;
        for (const auto& l : labels)
            out.push_back(method_spec_from_label(l));
        return out;
    };
    c.benchmark_methods = all_method_specs();
    if (j.contains("benchmark") && j.at("benchmark").contains("methods"))
        c.benchmark_methods = read_labels(j.at("benchmark"), "methods", "benchmark.");
    c.sweep_methods = {{PowerMethod::Deterministic, PilotKind::NonorthogonalFrame},
                       {PowerMethod::Stochastic, PilotKind::NonorthogonalFrame},
                       {PowerMethod::Equal, PilotKind::Orthogonal}};
    if (j.contains("sweep")) {
        detail::read_field(j.at("sweep"), "antennas", c.sweep_antennas, "sweep.");
        if (j.at("sweep").contains("methods"))
            c.sweep_methods = read_labels(j.at("sweep"), "methods", "sweep.");
    }

    if (c.pilot_length < 1)
        throw std::invalid_argument("pilots.length: must be >= 1");
    if (c.pilot_kind == PilotKind::External && c.pilot_options.external_path.empty())
        throw std::invalid_argument("pilots.external_path: required for external pilots");
    if (c.pilot_kind == PilotKind::External && !std::filesystem::exists(c.pilot_options.external_path))
        throw std::invalid_argument("pilots.external_path: file '" + c.pilot_options.external_path +
                                    "' does not exist");
    if (c.pilot_kind == PilotKind::Orthogonal && c.pilot_length < UserLayout(c.scenario.users_per_cell).max_users_per_cell())
        throw std::invalid_argument("pilots.length: orthogonal pilots need length >= users per cell");
    if (!(c.deterministic.eps > 0.0))
        throw std::invalid_argument("deterministic.eps: must be positive");
    if (c.deterministic.max_iter < 1)
        throw std::invalid_argument("deterministic.max_iter: must be >= 1");
    if (c.deterministic.stationarity_tol < 0.0)
        throw std::invalid_argument("deterministic.stationarity_tol: must be >= 0 (0 disables)");
    if (!(c.stochastic.eps > 0.0))
        throw std::invalid_argument("stochastic.eps: must be positive");
    if (c.stochastic.max_iter < 1)
        throw std::invalid_argument("stochastic.max_iter: must be >= 1");
    if (!(c.stochastic.tau > 0.0))
        throw std::invalid_argument("stochastic.tau: must be positive");
    if (const auto chk = check_schedule(c.stochastic.schedule, c.stochastic.max_iter); !chk.ok)
        throw std::invalid_argument("stochastic.schedule: " + chk.failures.front());
    if (c.draws < 1)
        throw std::invalid_argument("evaluation.draws: must be >= 1");
    if (c.num_seeds < 1)
        throw std::invalid_argument("evaluation.seeds: must be >= 1");
    if (c.threads < 1)
        throw std::invalid_argument("threads: must be >= 1");
    for (std::size_t i = 0; i < c.sweep_antennas.size(); ++i)
        if (c.sweep_antennas[i] < 1 || (i > 0 && c.sweep_antennas[i] <= c.sweep_antennas[i - 1]))
            throw std::invalid_argument("sweep.antennas: must be positive and strictly ascending");
    return c;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: '" + path + "' is not valid JSON: " + e.what());
    }
}

// Hash of everything that can change a result; the thread count cannot.
inline std::string config_hash(const RunConfig& c)
{
    json j = to_json(c);
    j.erase("threads");
    Fnv1a h;
    h.update(j.dump());
    return hex64(h.value());
}

// ---- CSV output ----------------------------------------------------------

inline std::string fmt_num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

inline std::string trace_csv(const std::vector<TraceRow>& trace, const std::string& hash)
{
    std::string s = "# config_hash=" + hash + "\n";
    s += "iter,objective_bits,max_power_w,min_power_w,wall_ms\n";
    for (const auto& r : trace)
        s += std::to_string(r.iter) + "," + fmt_num(r.objective_bits) + "," + fmt_num(r.max_power_w) + "," +
             fmt_num(r.min_power_w) + "," + fmt_num(r.wall_ms) + "\n";
    return s;
}

} // namespace mimopc
