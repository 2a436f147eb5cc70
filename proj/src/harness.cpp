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

#include "dasync/harness.hpp"

#include "dasync/kalman.hpp"
#include "dasync/topology.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dasync {

namespace {

constexpr double deg_per_rad = 180.0 / std::numbers::pi;

double parse_double(std::string_view name, std::string_view text)
{
    const std::string s(text);
    char *end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw std::invalid_argument("scenario: field '" + std::string(name) + "' expects a number, got '" + s + "'");
    return v;
}

long long parse_integer(std::string_view name, std::string_view text)
{
    const double v = parse_double(name, text);
    if (!std::isfinite(v) || v != std::floor(v))
        throw std::invalid_argument("scenario: field '" + std::string(name) + "' expects an integer, got '" +
                                    std::string(text) + "'");
    return static_cast<long long>(v);
}

bool parse_bool(std::string_view name, std::string_view text)
{
    if (text == "true" || text == "1")
        return true;
    if (text == "false" || text == "0")
        return false;
    throw std::invalid_argument("scenario: field '" + std::string(name) + "' expects true/false, got '" +
                                std::string(text) + "'");
}

std::string to_text(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double> &v)
{
    if (v.empty())
        return NAN;
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation; zero for a single sample.
double std_of(const std::vector<double> &v)
{
    if (v.size() < 2)
        return v.empty() ? NAN : 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace

// ------------------------------------------------------------------------
// Scenario

double Scenario::snr_linear() const { return std::pow(10.0, snr_db / 10.0); }

OscillatorParams Scenario::oscillator() const
{
    OscillatorParams p;
    p.carrier_hz = f_c;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.phase_noise_db = phase_noise_A_db;
    p.init_ppm = init_ppm;
    return p;
}

EstimationParams Scenario::estimation(double degree) const
{
    EstimationParams e;
    e.sampling_hz = f_s;
    e.interval_s = T;
    e.snr = snr_linear();
    e.access = {access_mode, degree};
    return e;
}

RunOptions Scenario::run_options(bool record_nodes) const
{
    RunOptions o;
    o.eta_rad = eta_deg / deg_per_rad;
    o.max_iters = max_iters;
    o.stop_at_eta = stop_at_eta;
    o.record_nodes = record_nodes;
    return o;
}

void Scenario::validate() const
{
    auto fail = [](const std::string &msg) { throw std::invalid_argument("scenario: " + msg); };
    if (n_nodes < 2)
        fail("n_nodes must be at least 2");
    if (!(connectivity > 0.0 && connectivity <= 1.0))
        fail("connectivity must lie in (0, 1]");
    const double pairs = 0.5 * n_nodes * (n_nodes - 1.0);
    if (std::floor(connectivity * pairs + 1e-9) < n_nodes - 1)
    {
        std::ostringstream msg;
        msg << "connectivity " << connectivity << " is below the spanning-tree bound for " << n_nodes
            << " nodes (disconnected graph); need c >= " << (n_nodes - 1) / pairs;
        fail(msg.str());
    }
    if (!(f_c > 0.0))
        fail("f_c must be positive");
    if (!(f_s > 0.0))
        fail("f_s must be positive");
    if (!(T > 0.0))
        fail("T must be positive");
    if (!(beta1 >= 0.0) || !(beta2 >= 0.0))
        fail("beta1 and beta2 must be nonnegative");
    if (!(init_ppm >= 0.0))
        fail("init_ppm must be nonnegative");
    if (std::isnan(snr_db) || std::isnan(phase_noise_A_db))
        fail("snr_db and phase_noise_A_db must be numbers");
    if (!(eta_deg > 0.0))
        fail("eta_deg must be positive");
    if (max_iters < 1)
        fail("max_iters must be at least 1");
    if (trials < 1)
        fail("trials must be at least 1");
    // Estimation preconditions with the degree every trial will realize.
    const double degree = 2.0 * static_cast<double>(edge_quota(n_nodes, connectivity)) / n_nodes;
    (void)estimation_stds(estimation(degree));
}

const std::vector<std::string> &scenario_fields()
{
    static const std::vector<std::string> names = {
        "algorithm", "n_nodes",     "connectivity", "f_c",       "f_s",         "T",
        "snr_db",    "beta1",       "beta2",        "phase_noise_A_db", "init_ppm", "access_mode",
        "eta_deg",   "max_iters",   "trials",       "master_seed", "freq_error_scale", "stop_at_eta"};
    return names;
}

void set_field(Scenario &s, std::string_view name, std::string_view value)
{
    if (name == "algorithm")
    {
        if (value == "dfpc")
            s.algorithm = Algorithm::dfpc;
        else if (value == "kf-dfpc" || value == "kf_dfpc")
            s.algorithm = Algorithm::kf_dfpc;
        else
            throw std::invalid_argument("scenario: algorithm must be dfpc or kf-dfpc, got '" + std::string(value) + "'");
    }
    else if (name == "access_mode")
    {
        if (value == "single")
            s.access_mode = AccessKind::single;
        else if (value == "broadcast")
            s.access_mode = AccessKind::broadcast;
        else if (value == "tdma")
            s.access_mode = AccessKind::tdma;
        else
            throw std::invalid_argument("scenario: access_mode must be single, broadcast or tdma, got '" +
                                        std::string(value) + "'");
    }
    else if (name == "freq_error_scale")
    {
        if (value == "sampling")
            s.freq_error_scale = FreqErrorScale::sampling;
        else if (value == "carrier")
            s.freq_error_scale = FreqErrorScale::carrier;
        else
            throw std::invalid_argument("scenario: freq_error_scale must be sampling or carrier, got '" +
                                        std::string(value) + "'");
    }
    else if (name == "stop_at_eta")
        s.stop_at_eta = parse_bool(name, value);
    else if (name == "n_nodes")
        s.n_nodes = static_cast<int>(parse_integer(name, value));
    else if (name == "max_iters")
        s.max_iters = static_cast<int>(parse_integer(name, value));
    else if (name == "trials")
        s.trials = static_cast<int>(parse_integer(name, value));
    else if (name == "master_seed")
    {
        const std::string t(value);
        char *end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
        if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
            throw std::invalid_argument("scenario: master_seed expects an unsigned 64-bit integer, got '" + t + "'");
        s.master_seed = v;
    }
    else if (name == "connectivity")
        s.connectivity = parse_double(name, value);
    else if (name == "f_c")
        s.f_c = parse_double(name, value);
    else if (name == "f_s")
        s.f_s = parse_double(name, value);
    else if (name == "T")
        s.T = parse_double(name, value);
    else if (name == "snr_db")
        s.snr_db = parse_double(name, value);
    else if (name == "beta1")
        s.beta1 = parse_double(name, value);
    else if (name == "beta2")
        s.beta2 = parse_double(name, value);
    else if (name == "phase_noise_A_db")
        s.phase_noise_A_db = parse_double(name, value);
    else if (name == "init_ppm")
        s.init_ppm = parse_double(name, value);
    else if (name == "eta_deg")
        s.eta_deg = parse_double(name, value);
    else
        throw std::invalid_argument("scenario: unknown field '" + std::string(name) + "'");
}

std::string get_field(const Scenario &s, std::string_view name)
{
    if (name == "algorithm")
        return s.algorithm == Algorithm::dfpc ? "dfpc" : "kf-dfpc";
    if (name == "access_mode")
        return s.access_mode == AccessKind::single ? "single"
               : s.access_mode == AccessKind::broadcast ? "broadcast"
                                                        : "tdma";
    if (name == "freq_error_scale")
        return s.freq_error_scale == FreqErrorScale::sampling ? "sampling" : "carrier";
    if (name == "stop_at_eta")
        return s.stop_at_eta ? "true" : "false";
    if (name == "n_nodes")
        return std::to_string(s.n_nodes);
    if (name == "max_iters")
        return std::to_string(s.max_iters);
    if (name == "trials")
        return std::to_string(s.trials);
    if (name == "master_seed")
        return std::to_string(s.master_seed);
    if (name == "connectivity")
        return to_text(s.connectivity);
    if (name == "f_c")
        return to_text(s.f_c);
    if (name == "f_s")
        return to_text(s.f_s);
    if (name == "T")
        return to_text(s.T);
    if (name == "snr_db")
        return to_text(s.snr_db);
    if (name == "beta1")
        return to_text(s.beta1);
    if (name == "beta2")
        return to_text(s.beta2);
    if (name == "phase_noise_A_db")
        return to_text(s.phase_noise_A_db);
    if (name == "init_ppm")
        return to_text(s.init_ppm);
    if (name == "eta_deg")
        return to_text(s.eta_deg);
    throw std::invalid_argument("scenario: unknown field '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view json_text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(json_text);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw std::invalid_argument(std::string("scenario: malformed config: ") + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("scenario: config must be a flat JSON object");
    Scenario s;
    for (const auto &[key, value] : j.items())
    {
        if (value.is_string())
            set_field(s, key, value.get<std::string>());
        else if (value.is_boolean())
            set_field(s, key, value.get<bool>() ? "true" : "false");
        else if (value.is_number_unsigned() && key == "master_seed")
            set_field(s, key, std::to_string(value.get<std::uint64_t>()));
        else if (value.is_number())
            set_field(s, key, to_text(value.get<double>()));
        else
            throw std::invalid_argument("scenario: field '" + key + "' must be a string, number or boolean");
    }
    return s;
}

Scenario load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("scenario: cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario &s)
{
    nlohmann::ordered_json j;
    for (const auto &name : scenario_fields())
    {
        const std::string v = get_field(s, name);
        if (name == "algorithm" || name == "access_mode" || name == "freq_error_scale")
            j[name] = v;
        else if (name == "stop_at_eta")
            j[name] = s.stop_at_eta;
        else if (name == "master_seed")
            j[name] = s.master_seed;
        else
        {
            const double d = parse_double(name, v);
            if (std::isfinite(d))
                j[name] = d;
            else
                j[name] = v; // JSON has no infinities
        }
    }
    return j.dump(2);
}

// ------------------------------------------------------------------------
// Trials

TrialResult run_trial(const Scenario &s, int index, bool record_nodes)
{
    Rng rng = make_stream(s.master_seed, static_cast<std::uint64_t>(index));
    const Topology topo = build_random_graph(s.n_nodes, s.connectivity, rng);
    const MixingMatrix w = mixing_matrix(topo);
    const OscillatorParams p = s.oscillator();
    const ErrorStats stats = error_stats(p, s.estimation(topo.avg_degree()), s.freq_error_scale);
    ArrayState initial = init_state(s.n_nodes, p, rng);
    const RunOptions opts = s.run_options(record_nodes);

    TrialResult r;
    r.trial = index;
    r.lambda2 = w.lambda2();
    r.connectivity = topo.connectivity();
    r.trace = s.algorithm == Algorithm::dfpc ? run_dfpc(std::move(initial), w, stats, s.T, opts, rng)
                                             : run_kf_dfpc(std::move(initial), w, p, stats, s.T, opts, rng);
    return r;
}

SweepRecord summarize(const std::vector<TrialResult> &trials, std::string param_name, double param_value)
{
    SweepRecord rec;
    rec.param_name = std::move(param_name);
    rec.param_value = param_value;
    rec.trials = static_cast<int>(trials.size());
    std::vector<double> sigma, iters, lambda;
    for (const auto &t : trials)
    {
        sigma.push_back(t.trace.final_sigma_phi() * deg_per_rad);
        lambda.push_back(t.lambda2);
        if (t.trace.converged_at)
            iters.push_back(static_cast<double>(*t.trace.converged_at));
    }
    rec.mean_sigma_phi_deg = mean_of(sigma);
    rec.std_sigma_phi_deg = std_of(sigma);
    rec.mean_iters = mean_of(iters);
    rec.std_iters = std_of(iters);
    rec.mean_lambda2 = mean_of(lambda);
    rec.trials_converged = static_cast<int>(iters.size());
    return rec;
}

ScenarioResult run_scenario(const Scenario &s, const ExecutionOptions &exec)
{
    s.validate();
    const int n = s.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};

    auto worker = [&] {
        for (int i = next++; i < n; i = next++)
        {
            try
            {
                results[static_cast<std::size_t>(i)] = run_trial(s, i, exec.record_nodes);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(exec.jobs, static_cast<unsigned>(n)));
    if (jobs == 1)
        worker();
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
    }

    for (int i = 0; i < n; ++i)
        if (errors[static_cast<std::size_t>(i)])
        {
            try
            {
                std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
            }
            catch (const std::exception &e)
            {
                throw std::runtime_error("trial " + std::to_string(i) + ": " + e.what());
            }
        }

    ScenarioResult out;
    out.summary = summarize(results);
    out.trials = std::move(results);
    return out;
}

std::vector<SweepRecord> sweep(const Scenario &s, std::string_view param, const std::vector<double> &values,
                               const ExecutionOptions &exec)
{
    if (std::find(std::begin(kSweepParams), std::end(kSweepParams), param) == std::end(kSweepParams))
        throw std::invalid_argument("sweep: cannot sweep '" + std::string(param) +
                                    "'; choose one of n_nodes, connectivity, T, snr_db");
    if (values.empty())
        throw std::invalid_argument("sweep: no values given");

    std::vector<Scenario> points;
    for (double v : values)
    {
        Scenario p = s;
        set_field(p, param, to_text(v));
        try
        {
            p.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw std::invalid_argument("sweep " + std::string(param) + "=" + format_number(v) + ": " + e.what());
        }
        points.push_back(p);
    }

    std::vector<SweepRecord> out;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        auto res = run_scenario(points[i], exec);
        out.push_back(summarize(res.trials, std::string(param), values[i]));
    }
    return out;
}

// ------------------------------------------------------------------------
// Presets

namespace {

Scenario preset_base(Algorithm alg, int trials)
{
    Scenario s;
    s.algorithm = alg;
    s.trials = trials;
    s.max_iters = 500;
    s.master_seed = 20220101;
    return s;
}

std::vector<double> valid_connectivities(int n_nodes, const std::vector<double> &grid)
{
    std::vector<double> out;
    const double pairs = 0.5 * n_nodes * (n_nodes - 1.0);
    for (double c : grid)
        if (std::floor(c * pairs + 1e-9) >= n_nodes - 1)
            out.push_back(c);
    return out;
}

std::string tag(double v)
{
    std::string t = format_number(v);
    std::replace(t.begin(), t.end(), '.', 'p');
    std::replace(t.begin(), t.end(), '-', 'm');
    return t;
}

} // namespace

std::vector<SweepSeries> sweep_preset(std::string_view name, int trials)
{
    if (trials < 1)
        throw std::invalid_argument("preset: trials must be at least 1");
    const std::vector<double> n_grid = {10, 20, 40, 65, 100, 150};
    const std::vector<double> c_grid = {0.05, 0.11, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::vector<double> t_grid = {1e-4, 1e-3, 7e-3, 2e-2, 0.2, 1.0, 3.0};
    const std::vector<double> snr_grid = {-10, -5, 0, 5, 10, 15, 20};

    std::vector<SweepSeries> out;
    if (name == "fig3" || name == "fig5")
    {
        // sigma_phi vs N: DFPC at two SNRs, KF-DFPC at two connectivities
        const bool kf = name == "fig5";
        for (double v : kf ? std::vector<double>{0.2, 0.5} : std::vector<double>{0.0, 5.0})
        {
            Scenario s = preset_base(kf ? Algorithm::kf_dfpc : Algorithm::dfpc, trials);
            s.connectivity = 0.2;
            if (kf)
                s.connectivity = v;
            else
                s.snr_db = v;
            out.push_back({std::string(name) + (kf ? "_c" : "_snr") + tag(v), s, "n_nodes", n_grid});
        }
    }
    else if (name == "fig4" || name == "fig6")
    {
        // convergence iterations vs c for several N
        const bool kf = name == "fig6";
        for (int n : {5, 20, 65, 100})
        {
            Scenario s = preset_base(kf ? Algorithm::kf_dfpc : Algorithm::dfpc, trials);
            s.n_nodes = n;
            out.push_back({std::string(name) + "_N" + std::to_string(n), s, "connectivity",
                           valid_connectivities(n, c_grid)});
        }
    }
    else if (name == "fig7")
    {
        for (auto alg : {Algorithm::dfpc, Algorithm::kf_dfpc})
            for (double c : {0.021, 0.04, 0.5})
            {
                Scenario s = preset_base(alg, trials);
                s.connectivity = c;
                s.access_mode = AccessKind::broadcast;
                out.push_back({std::string(name) + (alg == Algorithm::dfpc ? "_dfpc" : "_kfdfpc") + "_c" + tag(c), s,
                               "T", t_grid});
            }
    }
    else if (name == "fig8")
    {
        for (auto alg : {Algorithm::dfpc, Algorithm::kf_dfpc})
            for (double c : {0.5, 0.9})
            {
                Scenario s = preset_base(alg, trials);
                s.connectivity = c;
                s.access_mode = AccessKind::tdma;
                out.push_back({std::string(name) + (alg == Algorithm::dfpc ? "_dfpc" : "_kfdfpc") + "_c" + tag(c), s,
                               "snr_db", snr_grid});
            }
    }
    else
        throw std::invalid_argument("preset: unknown preset '" + std::string(name) + "'; choose fig3 .. fig8");
    return out;
}

std::vector<Scenario> trajectory_preset()
{
    std::vector<Scenario> out;
    for (int n : {20, 65, 100})
    {
        Scenario s = preset_base(Algorithm::dfpc, 1);
        s.n_nodes = n;
        s.connectivity = 0.2;
        s.max_iters = 100;
        s.stop_at_eta = false;
        out.push_back(s);
    }
    return out;
}

// ------------------------------------------------------------------------
// CSV

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_sweep_csv(std::ostream &os, const std::vector<SweepRecord> &records)
{
    os << "param_name,param_value,mean_sigma_phi_deg,std_sigma_phi_deg,mean_iters,std_iters,mean_lambda2,trials,"
          "trials_converged\n";
    for (const auto &r : records)
        os << r.param_name << ',' << format_number(r.param_value) << ',' << format_number(r.mean_sigma_phi_deg) << ','
           << format_number(r.std_sigma_phi_deg) << ',' << format_number(r.mean_iters) << ','
           << format_number(r.std_iters) << ',' << format_number(r.mean_lambda2) << ',' << r.trials << ','
           << r.trials_converged << '\n';
}

void write_trace_csv(std::ostream &os, const std::vector<TrialResult> &trials)
{
    os << "trial,iter,sigma_phi_deg\n";
    for (const auto &t : trials)
        for (std::size_t k = 0; k < t.trace.sigma_phi.size(); ++k)
            os << t.trial << ',' << k + 1 << ',' << format_number(t.trace.sigma_phi[k] * deg_per_rad) << '\n';
}

void write_trajectory_csv(std::ostream &os, const Trace &trace)
{
    if (trace.freq_dev.size() != trace.sigma_phi.size())
        throw std::invalid_argument("write_trajectory_csv: trace has no per-node history (record_nodes was off)");
    os << "iter,node,freq_dev_hz,phase_dev_deg\n";
    for (std::size_t k = 0; k < trace.freq_dev.size(); ++k)
        for (Eigen::Index n = 0; n < trace.freq_dev[k].size(); ++n)
            os << k + 1 << ',' << n << ',' << format_number(trace.freq_dev[k](n)) << ','
               << format_number(trace.phase_dev[k](n) * deg_per_rad) << '\n';
}

} // namespace dasync
