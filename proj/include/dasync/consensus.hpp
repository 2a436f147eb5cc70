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

#ifndef DASYNC_CONSENSUS_HPP
#define DASYNC_CONSENSUS_HPP

#include "dasync/oscillator.hpp"
#include "dasync/random.hpp"
#include "dasync/topology.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dasync {

// Frequencies [Hz] and phases [rad] of every node at iteration k. Phases are
// never wrapped during consensus.
struct ArrayState
{
    Eigen::VectorXd freqs;
    Eigen::VectorXd phases;
    int iteration = 0;

    Eigen::Index size() const noexcept { return freqs.size(); }
};

struct Trace
{
    std::vector<double> sigma_phi; // after each update [rad]
    // Per-node deviations from the initial means; only filled when
    // RunOptions::record_nodes is set.
    std::vector<Eigen::VectorXd> freq_dev;
    std::vector<Eigen::VectorXd> phase_dev;
    std::optional<int> converged_at; // first k with sigma_phi <= eta
    ArrayState final_state;

    int iterations() const noexcept { return static_cast<int>(sigma_phi.size()); }
    double final_sigma_phi() const { return sigma_phi.empty() ? NAN : sigma_phi.back(); }
};

struct RunOptions
{
    double eta_rad = 1.0 * EIGEN_PI / 180.0;
    int max_iters = 1000;
    bool stop_at_eta = true; // false keeps iterating to max_iters (steady-state runs)
    bool record_nodes = false;
};

// f_n(0) = f_c + N(0, sigma^2), theta_n(0) ~ U(0, 2 pi).
ArrayState init_state(Eigen::Index n, const OscillatorParams &p, Rng &rng);

// Sample standard deviation across nodes of the total phase 2 pi f_n T + theta_n.
// Both parts are centred before combining, which keeps the result accurate
// when f_n sits near a GHz carrier.
template <typename FreqDerived, typename PhaseDerived>
double total_phase_std(const Eigen::MatrixBase<FreqDerived> &freqs, const Eigen::MatrixBase<PhaseDerived> &phases,
                       double interval_s)
{
    const Eigen::Index n = freqs.size();
    if (n < 2 || phases.size() != n)
        throw std::invalid_argument("total_phase_std: need matching vectors with at least 2 nodes");
    const auto df = (freqs.array() - freqs.mean()).eval();
    const auto dp = (phases.array() - phases.mean()).eval();
    const auto dev = (2.0 * EIGEN_PI * interval_s) * df + dp;
    return std::sqrt(dev.square().sum() / static_cast<double>(n - 1));
}

inline double total_phase_std(const ArrayState &s, double interval_s)
{
    return total_phase_std(s.freqs, s.phases, interval_s);
}

// W x evaluated about the mean of x. Frequencies sit near the carrier, so
// mixing the raw values would spend the mantissa on the common offset.
template <typename Derived>
Eigen::VectorXd mix_centred(const Eigen::MatrixXd &w, const Eigen::MatrixBase<Derived> &x)
{
    const double ref = x.mean();
    Eigen::VectorXd out = w * (x.array() - ref).matrix();
    out.array() += ref;
    return out;
}

// One DFPC iteration with pre-drawn errors: drift, drift-phase and jitter,
// estimation errors on the shared values, then mixing.
ArrayState apply_dfpc_step(const ArrayState &state, const MixingMatrix &w, const ErrorDraw &draw);

ArrayState dfpc_step(const ArrayState &state, const MixingMatrix &w, const ErrorStats &stats, double interval_s,
                     Rng &rng);

// Iterates DFPC from `initial`. Non-convergence leaves converged_at empty.
Trace run_dfpc(ArrayState initial, const MixingMatrix &w, const ErrorStats &stats, double interval_s,
               const RunOptions &opts, Rng &rng);

// Draws the initial state from `rng`, then runs. Error statistics are fixed
// for the whole run.
Trace run_dfpc(const Topology &topo, const OscillatorParams &p, const EstimationParams &e, double eta_rad,
               int max_iters, Rng &rng);

namespace detail {

// Shared bookkeeping for both algorithms.
class TraceRecorder
{
public:
    TraceRecorder(const ArrayState &initial, double interval_s, const RunOptions &opts);
    // Returns true when the run should stop.
    bool record(const ArrayState &state);
    Trace finish(ArrayState final_state);

private:
    double interval_s_;
    RunOptions opts_;
    double freq_mean0_;
    double phase_mean0_;
    Trace trace_;
};

void check_run_args(Eigen::Index n, const MixingMatrix &w, const RunOptions &opts);

} // namespace detail

} // namespace dasync

#endif // DASYNC_CONSENSUS_HPP
