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

#ifndef DASYNC_RANDOM_HPP
#define DASYNC_RANDOM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace dasync {

// All stochastic operations take an explicit stream; nothing in the library
// owns global random state.
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based split: the stream for trial i depends only on (master, i), so
// changing the trial count never reshuffles earlier trials.
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) noexcept
{
    return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index)
{
    return Rng(stream_seed(master_seed, index));
}

// n i.i.d. N(0, sigma^2) draws. Standard normals are always consumed, even
// for sigma == 0, so the stream position does not depend on the noise levels.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> normal_vector(Eigen::Index n, Scalar sigma, Rng &rng)
{
    std::normal_distribution<Scalar> unit(Scalar(0), Scalar(1));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = sigma * unit(rng);
    return v;
}

} // namespace dasync

#endif // DASYNC_RANDOM_HPP
