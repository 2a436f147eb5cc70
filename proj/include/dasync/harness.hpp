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

#ifndef DASYNC_HARNESS_HPP
#define DASYNC_HARNESS_HPP

#include "dasync/consensus.hpp"
#include "dasync/oscillator.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dasync {

enum class Algorithm
{
    dfpc,
    kf_dfpc,
};

// One Monte Carlo experiment. Field names double as config keys and CLI flags.
struct Scenario
{
    Algorithm algorithm = Algorithm::dfpc;
    int n_nodes = 100;
    double connectivity = 0.2;
    double f_c = 1e9;
    double f_s = 1e7;
    double T = 1e-4;
    double snr_db = 0.0;
    double beta1 = 5e-19;
    double beta2 = 5e-19;
    double phase_noise_A_db = -53.46;
    double init_ppm = 100.0;
    AccessKind access_mode = AccessKind::single;
    double eta_deg = 1.0;
    int max_iters = 1000;
    int trials = 200;
    std::uint64_t master_seed = 1;
    FreqErrorScale freq_error_scale = FreqErrorScale::sampling;
    // When false, runs continue to max_iters and the final sigma_phi is the
    // steady-state value rather than the value at convergence.
    bool stop_at_eta = true;

    double snr_linear() const;
    OscillatorParams oscillator() const;
    // D is the realized average degree of the trial's graph.
    EstimationParams estimation(double degree) const;
    RunOptions run_options(bool record_nodes = false) const;

    // Throws std::invalid_argument naming the first violated precondition.
    void validate() const;
};

const std::vector<std::string> &scenario_fields();

// Sets a field from its text form ("kf-dfpc", "tdma", "inf", "1e-4", ...).
void set_field(Scenario &s, std::string_view name, std::string_view value);
std::string get_field(const Scenario &s, std::string_view name);

// Flat JSON object; missing keys keep their defaults, unknown keys are errors.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string &path);
std::string scenario_to_json(const Scenario &s);

struct TrialResult
{
    int trial = 0;
    double lambda2 = 0.0;
    double connectivity = 0.0; // realized
    Trace trace;
};

struct SweepRecord
{
    std::string param_name;
    double param_value = 0.0;
    double mean_sigma_phi_deg = 0.0;
    double std_sigma_phi_deg = 0.0;
    double mean_iters = 0.0; // over converged trials; NaN when none converged
    double std_iters = 0.0;
    double mean_lambda2 = 0.0;
    int trials = 0;
    int trials_converged = 0;
};

struct ScenarioResult
{
    std::vector<TrialResult> trials; // indexed by trial number
    SweepRecord summary;
};

struct ExecutionOptions
{
    unsigned jobs = 1;
    bool record_nodes = false;
};

// Runs one trial with its own stream derived from (master_seed, index): a
// fresh random graph, initial state and error realizations.
TrialResult run_trial(const Scenario &s, int index, bool record_nodes = false);

// All trials, up to `jobs` at a time. Output is independent of `jobs`.
ScenarioResult run_scenario(const Scenario &s, const ExecutionOptions &exec = {});

SweepRecord summarize(const std::vector<TrialResult> &trials, std::string param_name = "", double param_value = 0.0);

inline constexpr std::string_view kSweepParams[] = {"n_nodes", "connectivity", "T", "snr_db"};

std::vector<SweepRecord> sweep(const Scenario &s, std::string_view param, const std::vector<double> &values,
                               const ExecutionOptions &exec = {});

struct SweepSeries
{
    std::string name; // output stem, e.g. "fig4_N65"
    Scenario scenario;
    std::string param;
    std::vector<double> values;
};

// Built-in sweep grids named fig3 .. fig8. `trials` overrides the per-point count.
std::vector<SweepSeries> sweep_preset(std::string_view name, int trials);
// Single fixed-seed runs for the node trajectory plots, N in {20, 65, 100}.
std::vector<Scenario> trajectory_preset();

std::string format_number(double v);

// Header: param_name,param_value,mean_sigma_phi_deg,std_sigma_phi_deg,mean_iters,std_iters,mean_lambda2,trials,trials_converged
void write_sweep_csv(std::ostream &os, const std::vector<SweepRecord> &records);
// Header: trial,iter,sigma_phi_deg
void write_trace_csv(std::ostream &os, const std::vector<TrialResult> &trials);
// Header: iter,node,freq_dev_hz,phase_dev_deg (requires recorded node histories)
void write_trajectory_csv(std::ostream &os, const Trace &trace);

} // namespace dasync

#endif // DASYNC_HARNESS_HPP
