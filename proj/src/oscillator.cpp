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

#include "dasync/oscillator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dasync {

namespace {

void check_interval(double interval_s, const char *who)
{
    if (!(interval_s > 0.0))
    {
        std::ostringstream msg;
        msg << who << ": update interval must be positive, got " << interval_s;
        throw std::invalid_argument(msg.str());
    }
}

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

AdevComponents adev_components(const OscillatorParams &p, double interval_s)
{
    check_interval(interval_s, "adev_std");
    AdevComponents c;
    c.white = p.carrier_hz * std::sqrt(p.beta1 / interval_s);
    c.random_walk = p.carrier_hz * std::sqrt(p.beta2 * interval_s);
    c.total = p.carrier_hz * std::sqrt(p.beta1 / interval_s + p.beta2 * interval_s);
    return c;
}

double adev_std(const OscillatorParams &p, double interval_s) { return adev_components(p, interval_s).total; }

double jitter_std(const OscillatorParams &p) { return std::sqrt(2.0 * std::pow(10.0, p.phase_noise_db / 10.0)); }

double normalized_freq_crlb(const EstimationParams &e)
{
    const double L = e.samples();
    if (!(L >= 1.0))
    {
        std::ostringstream msg;
        msg << "estimation: observation window holds L = " << L << " samples, need at least 1";
        throw std::invalid_argument(msg.str());
    }
    if (!(e.snr > 0.0))
        throw std::invalid_argument("estimation: SNR must be positive");
    const double base = 6.0 / (two_pi * two_pi * L * L * L * e.snr);
    switch (e.access.kind)
    {
    case AccessKind::single:
        return std::sqrt(base);
    case AccessKind::broadcast:
        if (!(e.access.degree >= 1.0))
            throw std::invalid_argument("estimation: broadcast needs D >= 1");
        return std::sqrt(base / e.access.degree);
    case AccessKind::tdma:
        if (!(L / e.access.degree >= 1.0))
        {
            std::ostringstream msg;
            msg << "estimation: TDMA slot holds L/D = " << L / e.access.degree << " samples, need at least 1";
            throw std::invalid_argument(msg.str());
        }
        return std::sqrt(base * e.access.degree * e.access.degree);
    }
    return 0.0;
}

EstimationStds estimation_stds(const EstimationParams &e)
{
    EstimationStds s;
    s.sigma_m_f = e.sampling_hz * normalized_freq_crlb(e);
    const double L = e.samples();
    switch (e.access.kind)
    {
    case AccessKind::single:
        s.sigma_m_theta = 2.0 / (L * e.snr);
        break;
    case AccessKind::broadcast:
        s.sigma_m_theta = 2.0 / (std::sqrt(e.access.degree) * L * e.snr);
        break;
    case AccessKind::tdma:
        s.sigma_m_theta = std::sqrt(4.0 * e.access.degree) / (L * e.snr);
        break;
    }
    return s;
}

ErrorStats error_stats(const OscillatorParams &p, const EstimationParams &e, FreqErrorScale scale)
{
    const auto est = estimation_stds(e);
    ErrorStats s;
    s.sigma_f = adev_std(p, e.interval_s);
    s.sigma_theta = jitter_std(p);
    s.sigma_m_f = scale == FreqErrorScale::sampling ? est.sigma_m_f : p.carrier_hz * normalized_freq_crlb(e);
    s.sigma_m_theta = est.sigma_m_theta;
    return s;
}

ErrorDraw draw_errors(const ErrorStats &stats, double interval_s, Eigen::Index n, Rng &rng)
{
    if (n < 1)
        throw std::invalid_argument("draw_errors: need at least one node");
    ErrorDraw d;
    d.delta_f = normal_vector(n, stats.sigma_f, rng);
    d.delta_theta_f = drift_phase_adjustment(d.delta_f, interval_s);
    d.delta_theta = normal_vector(n, stats.sigma_theta, rng);
    d.eps_f = normal_vector(n, stats.sigma_m_f, rng);
    d.eps_theta = normal_vector(n, stats.sigma_m_theta, rng);
    return d;
}

} // namespace dasync
