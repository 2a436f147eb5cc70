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

#ifndef DASYNC_KALMAN_HPP
#define DASYNC_KALMAN_HPP

#include "dasync/consensus.hpp"
#include "dasync/oscillator.hpp"
#include "dasync/topology.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>

namespace dasync {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

// Raised when V + Sigma cannot be inverted (both prior and observation exact).
class DegenerateFilterError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Covariance of the per-iteration state increment u = [df, -pi T df + dtheta].
template <typename Scalar = double>
struct ProcessNoise
{
    Mat2<Scalar> q = Mat2<Scalar>::Zero();
};

// Covariance of the observation error [eps_f, eps_theta].
template <typename Scalar = double>
struct MeasurementNoise
{
    Mat2<Scalar> r = Mat2<Scalar>::Zero();
};

// Gaussian belief over [frequency Hz, phase rad] held by one node.
template <typename Scalar = double>
struct NodeFilter
{
    Vec2<Scalar> mean = Vec2<Scalar>::Zero();
    Mat2<Scalar> cov = Mat2<Scalar>::Zero();
};

template <typename Scalar>
ProcessNoise<Scalar> process_noise(Scalar sigma_f, Scalar sigma_theta, Scalar interval_s)
{
    const Scalar pi = Scalar(EIGEN_PI);
    const Scalar vf = sigma_f * sigma_f;
    ProcessNoise<Scalar> n;
    n.q(0, 0) = vf;
    n.q(0, 1) = n.q(1, 0) = -pi * interval_s * vf;
    n.q(1, 1) = pi * pi * interval_s * interval_s * vf + sigma_theta * sigma_theta;
    return n;
}

template <typename Scalar>
MeasurementNoise<Scalar> measurement_noise(Scalar sigma_m_f, Scalar sigma_m_theta)
{
    MeasurementNoise<Scalar> n;
    n.r(0, 0) = sigma_m_f * sigma_m_f;
    n.r(1, 1) = sigma_m_theta * sigma_m_theta;
    return n;
}

// Random-walk transition: mean carries over, covariance grows by Q.
template <typename Scalar>
NodeFilter<Scalar> kf_predict(const NodeFilter<Scalar> &f, const ProcessNoise<Scalar> &q)
{
    return {f.mean, f.cov + q.q};
}

namespace detail {

template <typename Scalar>
Mat2<Scalar> symmetrized(const Mat2<Scalar> &m)
{
    return Scalar(0.5) * (m + m.transpose());
}

// Closed-form 2x2 inverse. Returns false when |det| is below the underflow guard.
template <typename Scalar>
bool invert2(const Mat2<Scalar> &m, Mat2<Scalar> &inv)
{
    const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (!(std::abs(det) > Scalar(1e-300)))
        return false;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    inv /= det;
    return true;
}

template <typename Scalar>
NodeFilter<Scalar> correct_with_gain(const NodeFilter<Scalar> &f, const Vec2<Scalar> &y, const Mat2<Scalar> &gain)
{
    NodeFilter<Scalar> out;
    out.mean = f.mean + gain * (y - f.mean);
    out.cov = symmetrized<Scalar>(f.cov - gain * f.cov);
    return out;
}

} // namespace detail

// Measurement update with K = V (V + Sigma)^-1:
//   mean += K (y - mean),  cov = V - K V.
// Throws DegenerateFilterError when V + Sigma is singular.
template <typename Scalar>
NodeFilter<Scalar> kf_correct(const NodeFilter<Scalar> &f, const Vec2<Scalar> &y, const MeasurementNoise<Scalar> &r)
{
    Mat2<Scalar> inv;
    if (!detail::invert2<Scalar>(f.cov + r.r, inv))
        throw DegenerateFilterError("kf_correct: V + Sigma is singular (exact prior and exact observation)");
    return detail::correct_with_gain<Scalar>(f, y, f.cov * inv);
}

// Same update, but a singular V + Sigma is handled with the pseudo-inverse
// (the noiseless limit of the gain): directions the prior already pins down
// keep the prior, directions it leaves open take the observation.
template <typename Scalar>
NodeFilter<Scalar> kf_correct_limit(const NodeFilter<Scalar> &f, const Vec2<Scalar> &y,
                                    const MeasurementNoise<Scalar> &r)
{
    const Mat2<Scalar> s = f.cov + r.r;
    Mat2<Scalar> inv;
    if (detail::invert2<Scalar>(s, inv))
        return detail::correct_with_gain<Scalar>(f, y, f.cov * inv);
    if (f.cov.isZero(Scalar(0)))
        return f;
    Eigen::SelfAdjointEigenSolver<Mat2<Scalar>> es(detail::symmetrized<Scalar>(s));
    const Scalar tol = Scalar(1e-12) * es.eigenvalues().cwiseAbs().maxCoeff();
    Vec2<Scalar> d = Vec2<Scalar>::Zero();
    for (int i = 0; i < 2; ++i)
        if (es.eigenvalues()(i) > tol)
            d(i) = Scalar(1) / es.eigenvalues()(i);
    const Mat2<Scalar> pinv = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    return detail::correct_with_gain<Scalar>(f, y, f.cov * pinv);
}

// Shared prior at the first iteration: centred on the carrier with the crystal
// tolerance, phase uniform on [0, 2 pi) (mean pi, variance 4 pi^2 / 12).
inline NodeFilter<double> initial_prior(const OscillatorParams &p)
{
    const double pi = EIGEN_PI;
    const double sigma = p.init_sigma_hz();
    NodeFilter<double> f;
    f.mean << p.carrier_hz, pi;
    f.cov << sigma * sigma, 0.0, 0.0, 4.0 * pi * pi / 12.0;
    return f;
}

// Covariance of a node's state after mixing with weights w_row, treating the
// neighbours' beliefs as independent: sum_j w_j^2 V_j.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Mat2<Scalar> mix_covariances(const Eigen::MatrixBase<Derived> &w_row, std::span<const Mat2<Scalar>> covs)
{
    if (static_cast<std::size_t>(w_row.size()) != covs.size())
        throw std::invalid_argument("mix_covariances: weight row and covariance list differ in length");
    Mat2<Scalar> out = Mat2<Scalar>::Zero();
    for (Eigen::Index j = 0; j < w_row.size(); ++j)
    {
        const Scalar wj = w_row(j);
        if (wj != Scalar(0))
            out += (wj * wj) * covs[static_cast<std::size_t>(j)];
    }
    return out;
}

// KF-DFPC. Each iteration: the true oscillators drift, every node observes its
// own state with estimation noise, runs predict/correct seeded from its
// post-consensus value and mixed covariance, and the nodes retune to the
// W-weighted average of the filtered means.
Trace run_kf_dfpc(ArrayState initial, const MixingMatrix &w, const OscillatorParams &p, const ErrorStats &stats,
                  double interval_s, const RunOptions &opts, Rng &rng);

Trace run_kf_dfpc(const Topology &topo, const OscillatorParams &p, const EstimationParams &e, double eta_rad,
                  int max_iters, Rng &rng);

} // namespace dasync

#endif // DASYNC_KALMAN_HPP
