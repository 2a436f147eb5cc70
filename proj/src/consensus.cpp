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

#include "dasync/consensus.hpp"

#include <numbers>
#include <sstream>

namespace dasync {

ArrayState init_state(Eigen::Index n, const OscillatorParams &p, Rng &rng)
{
    if (n < 2)
        throw std::invalid_argument("init_state: need at least 2 nodes");
    ArrayState s;
    s.freqs = normal_vector(n, p.init_sigma_hz(), rng).array() + p.carrier_hz;
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    s.phases.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        double v = phase(rng);
        // libstdc++ may round to the upper bound
        s.phases(i) = v < 2.0 * std::numbers::pi ? v : 0.0;
    }
    s.iteration = 0;
    return s;
}

ArrayState apply_dfpc_step(const ArrayState &state, const MixingMatrix &w, const ErrorDraw &draw)
{
    const auto &W = w.matrix();
    if (W.rows() != state.size())
        throw std::invalid_argument("dfpc_step: mixing matrix does not match node count");
    Eigen::VectorXd f = state.freqs + draw.delta_f;
    Eigen::VectorXd th = state.phases + draw.delta_theta_f + draw.delta_theta;
    f += draw.eps_f;
    th += draw.eps_theta;

    ArrayState next;
    next.freqs = mix_centred(W, f);
    next.phases = mix_centred(W, th);
    next.iteration = state.iteration + 1;
    return next;
}

ArrayState dfpc_step(const ArrayState &state, const MixingMatrix &w, const ErrorStats &stats, double interval_s,
                     Rng &rng)
{
    const auto draw = draw_errors(stats, interval_s, state.size(), rng);
    return apply_dfpc_step(state, w, draw);
}

Trace run_dfpc(ArrayState initial, const MixingMatrix &w, const ErrorStats &stats, double interval_s,
               const RunOptions &opts, Rng &rng)
{
    detail::check_run_args(initial.size(), w, opts);
    detail::TraceRecorder rec(initial, interval_s, opts);
    ArrayState state = std::move(initial);
    for (int k = 1; k <= opts.max_iters; ++k)
    {
        state = dfpc_step(state, w, stats, interval_s, rng);
        if (rec.record(state))
            break;
    }
    return rec.finish(std::move(state));
}

Trace run_dfpc(const Topology &topo, const OscillatorParams &p, const EstimationParams &e, double eta_rad,
               int max_iters, Rng &rng)
{
    const auto w = mixing_matrix(topo);
    const auto stats = error_stats(p, e);
    RunOptions opts;
    opts.eta_rad = eta_rad;
    opts.max_iters = max_iters;
    return run_dfpc(init_state(topo.n_nodes(), p, rng), w, stats, e.interval_s, opts, rng);
}

namespace detail {

void check_run_args(Eigen::Index n, const MixingMatrix &w, const RunOptions &opts)
{
    if (n < 2)
        throw std::invalid_argument("run: need at least 2 nodes");
    if (w.size() != n)
        throw std::invalid_argument("run: mixing matrix does not match node count");
    if (!(opts.eta_rad > 0.0))
        throw std::invalid_argument("run: convergence threshold eta must be positive");
    if (opts.max_iters < 1)
        throw std::invalid_argument("run: max_iters must be at least 1");
}

TraceRecorder::TraceRecorder(const ArrayState &initial, double interval_s, const RunOptions &opts)
    : interval_s_(interval_s), opts_(opts), freq_mean0_(initial.freqs.mean()), phase_mean0_(initial.phases.mean())
{
    trace_.sigma_phi.reserve(static_cast<std::size_t>(opts.max_iters));
}

bool TraceRecorder::record(const ArrayState &state)
{
    const double sigma = total_phase_std(state, interval_s_);
    trace_.sigma_phi.push_back(sigma);
    if (opts_.record_nodes)
    {
        trace_.freq_dev.push_back((state.freqs.array() - freq_mean0_).matrix());
        trace_.phase_dev.push_back((state.phases.array() - phase_mean0_).matrix());
    }
    if (!trace_.converged_at && sigma <= opts_.eta_rad)
        trace_.converged_at = trace_.iterations();
    return opts_.stop_at_eta && trace_.converged_at.has_value();
}

Trace TraceRecorder::finish(ArrayState final_state)
{
    trace_.final_state = std::move(final_state);
    return std::move(trace_);
}

} // namespace detail

} // namespace dasync
