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

#include "dasync/analysis.hpp"

#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dasync {

PhaseErrorBudget phase_error_budget(const OscillatorParams &p, const EstimationParams &e, FreqErrorScale scale)
{
    constexpr double pi = std::numbers::pi;
    const double T = e.interval_s;
    const ErrorStats s = error_stats(p, e, scale);

    PhaseErrorBudget b;
    b.sigma_phi_f = 2.0 * pi * s.sigma_f * T;
    b.sigma_m_phi = 2.0 * pi * s.sigma_m_f * T;
    b.sigma_p_theta = pi * T * s.sigma_f;
    b.sigma_m_theta = s.sigma_m_theta;
    b.sigma_theta = s.sigma_theta;
    b.sigma_phi_total = std::sqrt(b.sigma_phi_f * b.sigma_phi_f + b.sigma_m_phi * b.sigma_m_phi +
                                  b.sigma_p_theta * b.sigma_p_theta + b.sigma_m_theta * b.sigma_m_theta +
                                  b.sigma_theta * b.sigma_theta);
    return b;
}

namespace {

void check_lambda2(double lambda2)
{
    if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    {
        std::ostringstream msg;
        msg << "residual_error_std: lambda2 must lie in [0, 1), got " << lambda2;
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

double residual_error_std(double sigma_e, double lambda2, long iters)
{
    check_lambda2(lambda2);
    if (iters < 1)
        throw std::invalid_argument("residual_error_std: need at least one iteration");
    const double r = lambda2 * lambda2;
    // Geometric series r + r^2 + ... + r^I, summed directly for small r^I.
    double sum = 0.0;
    double term = 1.0;
    for (long m = 1; m <= iters; ++m)
    {
        term *= r;
        if (term == 0.0)
            break;
        sum += term;
    }
    return sigma_e * std::sqrt(sum);
}

double residual_error_std_limit(double sigma_e, double lambda2)
{
    check_lambda2(lambda2);
    const double r = lambda2 * lambda2;
    return sigma_e * std::sqrt(r / (1.0 - r));
}

} // namespace dasync
