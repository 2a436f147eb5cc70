// SPDX-License-Identifier: Apache-2.0
//
// dasync: decentralized frequency and phase synchronization for distributed arrays
// Copyright (C) 2026 The dasync authors
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

// Command-line front end: run, sweep, bound, graph.

#include "dasync/analysis.hpp"
#include "dasync/harness.hpp"
#include "dasync/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

using namespace dasync;

namespace {

struct Overrides
{
    std::map<std::string, std::string> values;

    void attach(CLI::App *cmd)
    {
        for (const auto &name : scenario_fields())
            cmd->add_option_function<std::string>(
                "--" + name, [this, name](const std::string &v) { values[name] = v; },
                "override scenario field " + name);
    }

    void apply(Scenario &s) const
    {
        for (const auto &[k, v] : values)
            set_field(s, k, v);
    }
};

Scenario scenario_from(const std::string &config, const Overrides &ov)
{
    Scenario s = config.empty() ? Scenario{} : load_scenario(config);
    ov.apply(s);
    return s;
}

std::ofstream open_out(const std::filesystem::path &path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::vector<double> parse_values(const std::string &list)
{
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (item.empty())
            continue;
        std::size_t pos = 0;
        double v = 0.0;
        try
        {
            v = std::stod(item, &pos);
        }
        catch (const std::exception &)
        {
            pos = 0;
        }
        if (pos != item.size())
            throw std::invalid_argument("--values: cannot parse '" + item + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"dasync: decentralized frequency/phase synchronization simulator"};
    app.require_subcommand(1);

    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

    // run
    auto *run = app.add_subcommand("run", "run one scenario over its trials");
    std::string run_config, run_out, run_summary, run_traj, run_preset;
    std::optional<std::uint64_t> run_seed;
    Overrides run_ov;
    run->add_option("--config", run_config, "scenario JSON file");
    run->add_option("--seed", run_seed, "master seed");
    run->add_option("--out", run_out, "trace CSV (trial,iter,sigma_phi_deg); directory for --preset");
    run->add_option("--summary", run_summary, "summary CSV in the sweep schema");
    run->add_option("--trajectories", run_traj, "per-node CSV for trial 0");
    run->add_option("--preset", run_preset,
                    "fig1/fig2: fixed-seed DFPC node trajectories (frequency and phase columns), N = 20, 65, 100")
        ->check(CLI::IsMember({"fig1", "fig2"}));
    run->add_option("--jobs", jobs, "concurrent trials");
    run_ov.attach(run);

    // sweep
    auto *sw = app.add_subcommand("sweep", "sweep one parameter");
    std::string sw_config, sw_param, sw_values, sw_out, sw_preset;
    std::optional<int> sw_trials;
    Overrides sw_ov;
    sw->add_option("--config", sw_config, "scenario JSON file");
    sw->add_option("--param", sw_param, "n_nodes, connectivity, T or snr_db");
    sw->add_option("--values", sw_values, "comma-separated values");
    sw->add_option("--out", sw_out, "CSV file; output directory for --preset");
    sw->add_option("--preset", sw_preset, "built-in grid fig3 .. fig8");
    sw->add_option("--jobs", jobs, "concurrent trials");
    sw_ov.attach(sw);

    // bound
    auto *bound = app.add_subcommand("bound", "print the per-iteration phase error budget as JSON");
    std::string bound_config;
    Overrides bound_ov;
    bound->add_option("--config", bound_config, "scenario JSON file");
    bound_ov.attach(bound);

    // graph
    auto *graph = app.add_subcommand("graph", "dump a random topology as an edge list");
    int g_nodes = 10;
    double g_conn = 0.5;
    std::uint64_t g_seed = 1;
    std::string g_out;
    graph->add_option("--n_nodes", g_nodes, "node count");
    graph->add_option("--connectivity", g_conn, "edge fraction");
    graph->add_option("--seed", g_seed, "seed");
    graph->add_option("--out", g_out, "edge-list file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        const ExecutionOptions exec{jobs, false};

        if (*run)
        {
            if (!run_preset.empty())
            {
                const std::filesystem::path dir = run_out.empty() ? "." : run_out;
                for (const auto &s : trajectory_preset())
                {
                    auto r = run_trial(s, 0, true);
                    auto out = open_out(dir / (run_preset + "_N" + std::to_string(s.n_nodes) + ".csv"));
                    write_trajectory_csv(out, r.trace);
                }
                return 0;
            }
            Scenario s = scenario_from(run_config, run_ov);
            if (run_seed)
                s.master_seed = *run_seed;
            ExecutionOptions e = exec;
            auto res = run_scenario(s, e);
            if (!run_out.empty())
            {
                auto out = open_out(run_out);
                write_trace_csv(out, res.trials);
            }
            res.summary.param_name = "scenario";
            if (!run_summary.empty())
            {
                auto out = open_out(run_summary);
                write_sweep_csv(out, {res.summary});
            }
            if (!run_traj.empty())
            {
                auto r = run_trial(s, 0, true);
                auto out = open_out(run_traj);
                write_trajectory_csv(out, r.trace);
            }
            write_sweep_csv(std::cout, {res.summary});
            return 0;
        }

        if (*sw)
        {
            if (!sw_preset.empty())
            {
                const std::filesystem::path dir = sw_out.empty() ? "." : sw_out;
                int trials = 50;
                if (auto it = sw_ov.values.find("trials"); it != sw_ov.values.end())
                    trials = std::stoi(it->second);
                for (auto &series : sweep_preset(sw_preset, trials))
                {
                    Overrides ov = sw_ov;
                    ov.values.erase("trials");
                    ov.apply(series.scenario);
                    auto records = sweep(series.scenario, series.param, series.values, exec);
                    auto out = open_out(dir / (series.name + ".csv"));
                    write_sweep_csv(out, records);
                    std::cerr << "wrote " << (dir / (series.name + ".csv")).string() << '\n';
                }
                return 0;
            }
            if (sw_param.empty() || sw_values.empty())
                throw std::invalid_argument("sweep: need --param and --values (or --preset)");
            Scenario s = scenario_from(sw_config, sw_ov);
            auto records = sweep(s, sw_param, parse_values(sw_values), exec);
            if (sw_out.empty())
                write_sweep_csv(std::cout, records);
            else
            {
                auto out = open_out(sw_out);
                write_sweep_csv(out, records);
            }
            return 0;
        }

        if (*bound)
        {
            Scenario s = scenario_from(bound_config, bound_ov);
            s.validate();
            const double degree = 2.0 * static_cast<double>(edge_quota(s.n_nodes, s.connectivity)) / s.n_nodes;
            const auto b = phase_error_budget(s.oscillator(), s.estimation(degree), s.freq_error_scale);
            nlohmann::ordered_json j;
            j["sigma_phi_f"] = b.sigma_phi_f;
            j["sigma_m_phi"] = b.sigma_m_phi;
            j["sigma_p_theta"] = b.sigma_p_theta;
            j["sigma_m_theta"] = b.sigma_m_theta;
            j["sigma_theta"] = b.sigma_theta;
            j["sigma_phi_total"] = b.sigma_phi_total;
            j["sigma_phi_total_deg"] = b.sigma_phi_total * 180.0 / EIGEN_PI;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*graph)
        {
            Rng rng(stream_seed(g_seed, 0));
            const auto topo = build_random_graph(g_nodes, g_conn, rng);
            if (g_out.empty())
                write_edge_list(std::cout, topo);
            else
            {
                auto out = open_out(g_out);
                write_edge_list(out, topo);
            }
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
