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

#ifndef DASYNC_ANALYSIS_HPP
#define DASYNC_ANALYSIS_HPP

#include "dasync/oscillator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace dasync {

// Per-iteration phase error contributions [rad] and their quadrature sum.
struct PhaseErrorBudget
{
    double sigma_phi_f = 0.0;   // 2 pi sigma_f T, drift seen as phase
    double sigma_m_phi = 0.0;   // 2 pi sigma_m_f T, frequency estimation seen as phase
    double sigma_p_theta = 0.0; // pi T sigma_f, in-interval drift ramp
    double sigma_m_theta = 0.0; // phase estimation
    double sigma_theta = 0.0;   // jitter
    double sigma_phi_total = 0.0;
};

// With FreqErrorScale::carrier the frequency estimation term becomes
// 2 pi f_c sigma_m_f T with sigma_m_f in normalized units.
PhaseErrorBudget phase_error_budget(const OscillatorParams &p, const EstimationParams &e,
                                    FreqErrorScale scale = FreqErrorScale::sampling);

// sigma_e * sqrt(sum_{m=1}^{iters} lambda2^(2m)). Throws for lambda2 outside
// [0, 1) or iters < 1.
double residual_error_std(double sigma_e, double lambda2, long iters);

// Limit iters -> inf: sigma_e * sqrt(lambda2^2 / (1 - lambda2^2)).
double residual_error_std_limit(double sigma_e, double lambda2);

// |sum_n exp(j phi_n)| / N: far-field amplitude relative to perfect alignment.
template <typename Derived>
double coherent_gain(const Eigen::MatrixBase<Derived> &phases)
{
    const Eigen::Index n = phases.size();
    if (n < 1)
        return 0.0;
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        re += std::cos(phases(i));
        im += std::sin(phases(i));
    }
    return std::hypot(re, im) / static_cast<double>(n);
}

} // namespace dasync

#endif // DASYNC_ANALYSIS_HPP
