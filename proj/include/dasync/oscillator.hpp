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

#ifndef DASYNC_OSCILLATOR_HPP
#define DASYNC_OSCILLATOR_HPP

#include "dasync/random.hpp"

#include <Eigen/Dense>

namespace dasync {

// Oscillator model. Defaults describe a 1 GHz carrier from a TCXO-class
// reference with a VCO-grade phase-noise floor.
struct OscillatorParams
{
    double carrier_hz = 1e9;
    double beta1 = 5e-19;          // white frequency noise coefficient [s]
    double beta2 = 5e-19;          // random-walk coefficient [1/s]
    double phase_noise_db = -53.46; // integrated phase noise power A [dB]
    double init_ppm = 100.0;        // initial frequency spread, parts per million of the carrier

    // Standard deviation of the initial frequency offsets [Hz].
    double init_sigma_hz() const noexcept { return init_ppm * 1e-6 * carrier_hz; }
};

enum class AccessKind
{
    single,    // one link per estimate
    broadcast, // neighbours combine coherently, SNR grows with D
    tdma,      // window split across D neighbours, L shrinks to L/D
};

struct AccessMode
{
    AccessKind kind = AccessKind::single;
    double degree = 1.0; // average connections per node D (ignored for single)

    static AccessMode single() { return {}; }
    static AccessMode broadcast(double d) { return {AccessKind::broadcast, d}; }
    static AccessMode tdma(double d) { return {AccessKind::tdma, d}; }
};

struct EstimationParams
{
    double sampling_hz = 1e7;
    double interval_s = 1e-4;
    double snr = 1.0; // linear power ratio, may be +inf
    AccessMode access{};

    double samples() const noexcept { return interval_s * sampling_hz; }
};

// How the per-sample frequency bound is converted to Hz.
enum class FreqErrorScale
{
    sampling, // multiply by f_s (dimensionally consistent single-tone CRLB)
    carrier,  // multiply by f_c (treats the bound as a fractional error)
};

struct ErrorStats
{
    double sigma_f = 0.0;       // frequency drift [Hz]
    double sigma_theta = 0.0;   // phase jitter [rad]
    double sigma_m_f = 0.0;     // frequency estimation [Hz]
    double sigma_m_theta = 0.0; // phase estimation [rad]
};

// One iteration's worth of error realizations for every node.
struct ErrorDraw
{
    Eigen::VectorXd delta_f;       // drift [Hz]
    Eigen::VectorXd delta_theta_f; // phase accrued by the in-interval drift ramp [rad]
    Eigen::VectorXd delta_theta;   // jitter [rad]
    Eigen::VectorXd eps_f;         // frequency estimation error [Hz]
    Eigen::VectorXd eps_theta;     // phase estimation error [rad]
};

struct AdevComponents
{
    double white = 0.0;       // f_c sqrt(beta1 / T)
    double random_walk = 0.0; // f_c sqrt(beta2 T)
    double total = 0.0;       // f_c sqrt(beta1 / T + beta2 T)
};

// Frequency drift standard deviation over an update interval T.
// Throws std::invalid_argument for T <= 0.
double adev_std(const OscillatorParams &p, double interval_s);
AdevComponents adev_components(const OscillatorParams &p, double interval_s);

// sqrt(2 * 10^(A/10)); zero for A = -inf.
double jitter_std(const OscillatorParams &p);

// Closed form of the phase adjustment for a frequency offset that ramps
// linearly to delta_f over the interval: -pi * T * delta_f per node.
template <typename Derived>
Eigen::VectorXd drift_phase_adjustment(const Eigen::MatrixBase<Derived> &delta_f, double interval_s)
{
    const double k = -EIGEN_PI * interval_s;
    return (k * delta_f.derived().array()).matrix();
}

struct EstimationStds
{
    double sigma_m_f = 0.0;     // Hz with the sampling scale
    double sigma_m_theta = 0.0; // rad
};

// Frequency bound in per-sample normalized units (cycles/sample), including
// the access-mode factor.
double normalized_freq_crlb(const EstimationParams &e);

// CRLB-level estimation standard deviations. Frequency is scaled by f_s.
// Throws std::invalid_argument when L = T f_s < 1 (or L/D < 1 under TDMA).
EstimationStds estimation_stds(const EstimationParams &e);

// Bundles every error source for one run. The frequency estimation error is
// converted to Hz with f_s or f_c according to `scale`.
ErrorStats error_stats(const OscillatorParams &p, const EstimationParams &e,
                       FreqErrorScale scale = FreqErrorScale::sampling);

ErrorDraw draw_errors(const ErrorStats &stats, double interval_s, Eigen::Index n, Rng &rng);

} // namespace dasync

#endif // DASYNC_OSCILLATOR_HPP
