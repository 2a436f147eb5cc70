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

#include "dasync/kalman.hpp"

#include <vector>

namespace dasync {

Trace run_kf_dfpc(ArrayState initial, const MixingMatrix &w, const OscillatorParams &p, const ErrorStats &stats,
                  double interval_s, const RunOptions &opts, Rng &rng)
{
    const Eigen::Index n = initial.size();
    detail::check_run_args(n, w, opts);
    const auto &W = w.matrix();
    const auto q = process_noise(stats.sigma_f, stats.sigma_theta, interval_s);
    const auto r = measurement_noise(stats.sigma_m_f, stats.sigma_m_theta);
    const auto prior = initial_prior(p);

    detail::TraceRecorder rec(initial, interval_s, opts);
    ArrayState state = std::move(initial);
    std::vector<Mat2<double>> covs(static_cast<std::size_t>(n), prior.cov);
    std::vector<Mat2<double>> next_covs(static_cast<std::size_t>(n));
    Eigen::VectorXd mf(n), mth(n);

    for (int k = 1; k <= opts.max_iters; ++k)
    {
        // Errors are drawn up front so the per-node section has no rng use.
        const auto draw = draw_errors(stats, interval_s, n, rng);
        const Eigen::VectorXd prev_f = state.freqs;
        const Eigen::VectorXd prev_th = state.phases;

        state.freqs += draw.delta_f;
        state.phases += draw.delta_theta_f + draw.delta_theta;
        const Eigen::VectorXd obs_f = state.freqs + draw.eps_f;
        const Eigen::VectorXd obs_th = state.phases + draw.eps_theta;

        for (Eigen::Index i = 0; i < n; ++i)
        {
            NodeFilter<double> belief;
            if (k == 1)
            {
                belief = prior;
            }
            else
            {
                belief.mean << prev_f(i), prev_th(i);
                belief.cov = mix_covariances(W.row(i), std::span<const Mat2<double>>(covs));
            }
            belief = kf_predict(belief, q);
            const Vec2<double> y(obs_f(i), obs_th(i));
            belief = kf_correct_limit(belief, y, r);
            mf(i) = belief.mean(0);
            mth(i) = belief.mean(1);
            next_covs[static_cast<std::size_t>(i)] = belief.cov;
        }
        covs.swap(next_covs);

        state.freqs = mix_centred(W, mf);
        state.phases = mix_centred(W, mth);
        state.iteration += 1;
        if (rec.record(state))
            break;
    }
    return rec.finish(std::move(state));
}

Trace run_kf_dfpc(const Topology &topo, const OscillatorParams &p, const EstimationParams &e, double eta_rad,
                  int max_iters, Rng &rng)
{
    const auto w = mixing_matrix(topo);
    const auto stats = error_stats(p, e);
    RunOptions opts;
    opts.eta_rad = eta_rad;
    opts.max_iters = max_iters;
    return run_kf_dfpc(init_state(topo.n_nodes(), p, rng), w, p, stats, e.interval_s, opts, rng);
}

} // namespace dasync
