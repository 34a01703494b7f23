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

// mimopc command-line driver.
//
//   mimopc scenario  --config cfg.json [--seed N] [--out-dir DIR]
//   mimopc solve     --config cfg.json [--method deterministic|stochastic|equal]
//                    [--pilots frame|orthogonal|random|external] [--max-iter N] [--draws N]
//   mimopc benchmark --config cfg.json [--seeds N] [--methods D-N,S-O,...] [--threads N]
//   mimopc sweep     --config cfg.json [--antennas 32,64,96] [--methods D-N,E-O]
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical abort.

#include "mimopc/mimopc.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace mimopc;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string method;
    std::string pilots;
    std::optional<long> draws;
    std::optional<unsigned> threads;
    std::optional<long> max_iter;
    std::optional<int> seeds;
    std::vector<std::string> methods;
    std::vector<int> antennas;
};

RunConfig load_config(const Overrides& o)
{
    json j = o.config_path.empty() ? json::object() : read_json_file(o.config_path);
    if (o.seed)
        j["seed"] = *o.seed;
    if (!o.method.empty())
        j["method"] = o.method;
    if (!o.pilots.empty())
        j["pilots"]["kind"] = o.pilots;
    if (o.draws)
        j["evaluation"]["draws"] = *o.draws;
    if (o.seeds)
        j["evaluation"]["seeds"] = *o.seeds;
    if (o.threads)
        j["threads"] = *o.threads;
    if (!o.antennas.empty())
        j["sweep"]["antennas"] = o.antennas;
    RunConfig c = run_config_from_json(j);
    if (o.max_iter) {
        if (*o.max_iter < 1)
            throw std::invalid_argument("--max-iter: must be >= 1");
        if (c.method == PowerMethod::Stochastic)
            c.stochastic.max_iter = *o.max_iter;
        else
            c.deterministic.max_iter = static_cast<int>(*o.max_iter);
    }
    if (!o.methods.empty()) {
        std::vector<MethodSpec> specs;
        for (const auto& l : o.methods)
            specs.push_back(method_spec_from_label(l));
        c.benchmark_methods = specs;
        c.sweep_methods = specs;
    }
    return c;
}

fs::path output_dir(const Overrides& o)
{
    fs::path dir = o.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("MIMOPC_OUT_DIR");
        dir = env ? env : "out";
    }
    fs::create_directories(dir);
    return dir;
}

json rates_json(const RVec& mean, const RVec& se)
{
    json a = json::array();
    for (Eigen::Index u = 0; u < mean.size(); ++u)
        a.push_back({{"user", u}, {"mean_bits", mean(u)}, {"stderr_bits", se(u)}});
    return a;
}

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

int cmd_scenario(const Overrides& o)
{
    const RunConfig cfg = load_config(o);
    const std::string hash = config_hash(cfg);
    const NetworkScenario sc = generate_scenario(cfg.scenario);
    json doc = to_json(sc);
    doc["config_hash"] = hash;
    const fs::path out = output_dir(o) / "scenario.json";
    write_text(out, doc.dump(2) + "\n");
    std::cout << "wrote " << out.string() << " (" << sc.num_users() << " users, " << sc.num_cells() << " cells)\n";
    return 0;
}

int cmd_solve(const Overrides& o)
{
    const RunConfig cfg = load_config(o);
    const std::string hash = config_hash(cfg);
    const ScenarioSeeds seeds = seeds_for(cfg.seed);
    const NetworkScenario sc = generate_scenario(cfg.scenario);
    const PilotBook book = make_pilots(cfg.pilot_kind, cfg.pilot_length, sc, seeds.pilots, cfg.pilot_options);
    const RVec w = RVec::Ones(sc.num_users());
    const DetRateCoeffs coeffs = det_coeffs(book, sc);

    PowerVector p;
    std::vector<TraceRow> trace;
    json info;
    switch (cfg.method) {
    case PowerMethod::Deterministic: {
        const WmmseResult r = algorithm1(coeffs, w, sc.pmax, cfg.deterministic);
        p = r.state.p;
        trace = r.trace;
        info = {{"iterations", r.state.iterations},
                {"converged", r.state.converged},
                {"initial_objective_bits", r.initial_objective},
                {"objective_bits", r.state.objective},
                {"projected_gradient_norm", projected_gradient_norm(p, coeffs, w, sc.pmax)}};
        break;
    }
    case PowerMethod::Stochastic: {
        const ChannelStream train(sc, book, seeds.training);
        const StochasticResult r = algorithm2(sc, w, train, cfg.stochastic);
        p = r.state.p;
        trace = r.trace;
        info = {{"iterations", r.state.t},
                {"converged", r.state.converged},
                {"surrogate_bits", r.state.surrogate},
                {"averaged_rate_bits", r.state.avg_rate}};
        break;
    }
    case PowerMethod::Equal:
        p = equal_power(sc);
        info = {{"iterations", 0}, {"converged", true}};
        break;
    }

    const ErgodicEstimate mc = mc_ergodic(p, sc, ChannelStream(sc, book, seeds.evaluation), cfg.draws, cfg.threads);
    const RVec det = det_rate(p, coeffs);

    const fs::path dir = output_dir(o);
    json power = {{"config_hash", hash},
                  {"method", method_name(cfg.method)},
                  {"pilots", to_string(cfg.pilot_kind)},
                  {"pmax_w", sc.pmax},
                  {"powers_w", to_std(p)}};
    write_text(dir / "power.json", power.dump(2) + "\n");
    write_text(dir / "trace.csv", trace_csv(trace, hash));

    json summary = {{"config_hash", hash},
                    {"config", to_json(cfg)},
                    {"optimizer", info},
                    {"deterministic_rates_bits", to_std(det)},
                    {"deterministic_sum_rate_bits", det.sum()},
                    {"ergodic", {{"draws", mc.draws},
                                 {"stream_hash", hex64(mc.stream_hash)},
                                 {"sum_rate_bits", mc.mean.sum()},
                                 {"users", rates_json(mc.mean, mc.stderr_)}}}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    std::cout << method_name(cfg.method) << "/" << to_string(cfg.pilot_kind) << ": " << trace.size()
              << " iterations, deterministic sum rate " << det.sum() << " bits, ergodic " << mc.mean.sum()
              << " bits -> " << dir.string() << "\n";
    return 0;
}

int cmd_benchmark(const Overrides& o)
{
    const RunConfig cfg = load_config(o);
    const std::string hash = config_hash(cfg);
    const ExperimentSettings ex = cfg.experiment();
    const GridResult g = run_grid(ex, cfg.benchmark_methods);
    const UserLayout users(cfg.scenario.users_per_cell);

    std::string rates = "# config_hash=" + hash + "\nmethod,seed,user,cell,mean_bits,stderr_bits\n";
    std::string cdf = "# config_hash=" + hash + "\nmethod,value_bits,prob\n";
    json methods = json::object();
    for (const auto& m : g.methods) {
        const std::string label = m.spec.label();
        json hashes = json::array();
        for (std::size_t si = 0; si < g.seeds.size(); ++si) {
            const ErgodicEstimate& e = m.per_seed[si];
            for (int u = 0; u < e.mean.size(); ++u)
                rates += label + "," + std::to_string(g.seeds[si]) + "," + std::to_string(u) + "," +
                         std::to_string(users.cell_of(u)) + "," + fmt_num(e.mean(u)) + "," + fmt_num(e.stderr_(u)) +
                         "\n";
            hashes.push_back(hex64(e.stream_hash));
        }
        const EmpiricalCdf c = m.cdf();
        for (std::size_t k = 0; k < c.size(); ++k)
            cdf += label + "," + fmt_num(c.values()[k]) + "," + fmt_num(c.prob(k)) + "\n";
        methods[label] = {{"median_bits", c.median()},
                          {"p10_bits", c.quantile(0.1)},
                          {"p90_bits", c.quantile(0.9)},
                          {"mean_network_sum_bits", m.mean_network_sum()},
                          {"stream_hashes", hashes}};
    }
    json summary = {{"config_hash", hash},
                    {"config", to_json(cfg)},
                    {"seeds", g.seeds},
                    {"granularity", cfg.granularity == CdfGranularity::PerCell ? "cell" : "user"},
                    {"methods", methods}};
    if (const auto *dn = g.find("D-N"), *so = g.find("S-O"); dn && so)
        summary["median_improvement_DN_over_SO_pct"] = median_improvement_pct(*dn, *so);

    const fs::path dir = output_dir(o);
    write_text(dir / "rates.csv", rates);
    write_text(dir / "cdf.csv", cdf);
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    std::cout << "benchmark: " << g.methods.size() << " methods x " << g.seeds.size() << " seeds -> "
              << dir.string() << "\n";
    for (const auto& m : g.methods)
        std::cout << "  " << m.spec.label() << "  median " << m.cdf().median() << " bits\n";
    return 0;
}

int cmd_sweep(const Overrides& o)
{
    const RunConfig cfg = load_config(o);
    const std::string hash = config_hash(cfg);
    const std::vector<SweepRow> rows = antenna_sweep(cfg.experiment(), cfg.sweep_antennas, cfg.sweep_methods);
    std::string csv = "# config_hash=" + hash + "\nmethod,antennas,sum_rate_bits,stderr_bits\n";
    for (const auto& r : rows)
        csv += r.method + "," + std::to_string(r.antennas) + "," + fmt_num(r.sum_rate) + "," + fmt_num(r.stderr_) +
               "\n";
    const fs::path dir = output_dir(o);
    write_text(dir / "sweep.csv", csv);
    std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Uplink massive MIMO power control under nonorthogonal pilots"};
    app.require_subcommand(1);
    Overrides o;

    auto common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed (overrides the config)");
        sub->add_option("--out-dir", o.out_dir, "output directory (default $MIMOPC_OUT_DIR or ./out)");
        sub->add_option("--pilots", o.pilots, "pilot kind: frame, orthogonal, random, external");
        sub->add_option("--draws", o.draws, "Monte Carlo draws per evaluation");
        sub->add_option("--threads", o.threads, "worker threads");
    };

    auto* scenario = app.add_subcommand("scenario", "generate a scenario and write it as JSON");
    common(scenario);
    auto* solve = app.add_subcommand("solve", "run one power-control method on one scenario");
    common(solve);
    solve->add_option("--method", o.method, "deterministic, stochastic or equal");
    solve->add_option("--max-iter", o.max_iter, "iteration cap for the chosen method");
    auto* bench = app.add_subcommand("benchmark", "method x pilot grid with common random numbers");
    common(bench);
    bench->add_option("--seeds", o.seeds, "number of scenario seeds");
    bench->add_option("--methods", o.methods, "method labels, e.g. D-N,S-O")->delimiter(',');
    auto* sweep = app.add_subcommand("sweep", "sum rate versus BS antenna count");
    common(sweep);
    sweep->add_option("--antennas", o.antennas, "ascending antenna counts")->delimiter(',');
    sweep->add_option("--seeds", o.seeds, "number of scenario seeds");
    sweep->add_option("--methods", o.methods, "method labels, e.g. D-N,E-O")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (scenario->parsed())
            return cmd_scenario(o);
        if (solve->parsed())
            return cmd_solve(o);
        if (bench->parsed())
            return cmd_benchmark(o);
        if (sweep->parsed())
            return cmd_sweep(o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
