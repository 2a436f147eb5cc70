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

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dasync;
using doctest::Approx;

TEST_CASE("phase_error_budget: default scenario")
{
    OscillatorParams p;
    EstimationParams e;
    const auto b = phase_error_budget(p, e);
    CHECK(b.sigma_phi_f == Approx(0.0444288296).epsilon(1e-9));
    CHECK(b.sigma_p_theta == Approx(0.0222144148).epsilon(1e-9));
    CHECK(b.sigma_m_phi == Approx(0.0774596669).epsilon(1e-9));
    CHECK(b.sigma_m_theta == Approx(2e-3).epsilon(1e-12));
    CHECK(b.sigma_theta == Approx(3.00272111439e-3).epsilon(1e-10));
    CHECK(b.sigma_phi_total == Approx(0.0920891821).epsilon(1e-9));
}

TEST_CASE("phase_error_budget: quadrature sum and zero noise")
{
    OscillatorParams p;
    p.beta1 = p.beta2 = 0.0;
    p.phase_noise_db = -INFINITY;
    EstimationParams e;
    e.snr = INFINITY;
    CHECK(phase_error_budget(p, e).sigma_phi_total == 0.0);

    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i)
    {
        OscillatorParams q;
        q.beta1 = std::pow(10.0, -21.0 + 4.0 * u(rng));
        q.beta2 = std::pow(10.0, -21.0 + 4.0 * u(rng));
        q.phase_noise_db = -120.0 + 80.0 * u(rng);
        EstimationParams f;
        f.interval_s = std::pow(10.0, -4.0 + 3.0 * u(rng));
        f.snr = std::pow(10.0, -1.0 + 3.0 * u(rng));
        for (auto scale : {FreqErrorScale::sampling, FreqErrorScale::carrier})
        {
            const auto b = phase_error_budget(q, f, scale);
            const double sum = b.sigma_phi_f * b.sigma_phi_f + b.sigma_m_phi * b.sigma_m_phi +
                               b.sigma_p_theta * b.sigma_p_theta + b.sigma_m_theta * b.sigma_m_theta +
                               b.sigma_theta * b.sigma_theta;
            CHECK(b.sigma_phi_total * b.sigma_phi_total == Approx(sum).epsilon(1e-12));
        }
    }
}

TEST_CASE("residual_error_std")
{
    CHECK(residual_error_std(1.0, 0.0, 5) == 0.0);
    CHECK(residual_error_std(1.0, 0.5, 1) == Approx(0.5));
    CHECK(residual_error_std_limit(1.0, 0.5) == Approx(0.5773502692).epsilon(1e-10));
    CHECK(residual_error_std(1.0, 0.5, 200) == Approx(0.5773502692).epsilon(1e-10));
    CHECK(residual_error_std(2.0, 0.5, 200) == Approx(2.0 * 0.5773502692).epsilon(1e-10));

    double prev = 0.0;
    for (long m = 1; m < 100; ++m)
    {
        const double v = residual_error_std(1.0, 0.9, m);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0.0;
    for (double l : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99})
    {
        const double v = residual_error_std(1.0, l, 50);
        CHECK(v > prev);
        prev = v;
    }

    CHECK_THROWS_AS(residual_error_std(1.0, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(residual_error_std(1.0, -0.1, 5), std::invalid_argument);
    CHECK_THROWS_AS(residual_error_std(1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("coherent_gain")
{
    CHECK(coherent_gain(Eigen::VectorXd::Zero(7)) == Approx(1.0));
    Eigen::VectorXd opposite(2);
    opposite << 0.0, std::numbers::pi;
    CHECK(coherent_gain(opposite) < 1e-15);

    Eigen::VectorXd ring(6);
    for (int i = 0; i < 6; ++i)
        ring(i) = 2.0 * std::numbers::pi * i / 6.0;
    CHECK(coherent_gain(ring) < 1e-15);

    Rng rng(41);
    const double sigma = 18.0 * std::numbers::pi / 180.0;
    const Eigen::VectorXd phi = normal_vector<double>(100000, sigma, rng);
    const double g = coherent_gain(phi);
    CHECK(g == Approx(std::exp(-sigma * sigma / 2.0)).epsilon(0.005));

    const Eigen::VectorXd shifted = (phi.array() + 1.234).matrix();
    const Eigen::VectorXd wrapped = (phi.array() + 2.0 * std::numbers::pi).matrix();
    CHECK(coherent_gain(shifted) == Approx(g).epsilon(1e-12));
    CHECK(coherent_gain(wrapped) == Approx(g).epsilon(1e-12));
}
