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

#ifndef DASYNC_TOPOLOGY_HPP
#define DASYNC_TOPOLOGY_HPP

#include "dasync/random.hpp"

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

namespace dasync {

// Undirected edge stored with a < b.
struct Edge
{
    int a = 0;
    int b = 0;

    Edge() = default;
    Edge(int i, int j) : a(i < j ? i : j), b(i < j ? j : i) {}

    auto operator<=>(const Edge &) const = default;
};

// Connected undirected simple graph on nodes 0..n-1.
//
// Construction validates the edge set: indices in range, no self-loops, no
// duplicates, and a single connected component. Immutable afterwards.
class Topology
{
public:
    Topology(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const noexcept { return n_nodes_; }
    const std::vector<Edge> &edges() const noexcept { return edges_; }
    std::size_t n_edges() const noexcept { return edges_.size(); }

    // Realized connectivity |E| / (N(N-1)/2).
    double connectivity() const noexcept;
    // Average number of connections per node, c(N-1) = 2|E|/N.
    double avg_degree() const noexcept;

    std::vector<int> degrees() const;
    bool has_edge(int i, int j) const;

private:
    int n_nodes_;
    std::vector<Edge> edges_; // sorted
};

// Number of edges a graph with the given connectivity gets: round(c N(N-1)/2).
std::size_t edge_quota(int n_nodes, double connectivity);

// Uniform random spanning tree (random Pruefer code), then uniformly chosen
// extra edges until the quota is met. Throws std::invalid_argument when
// n_nodes < 2, connectivity is outside (0, 1], or floor(c N(N-1)/2) < N-1.
Topology build_random_graph(int n_nodes, double connectivity, Rng &rng);

// Edge-list text format: one "i j" pair per line, zero-indexed.
void write_edge_list(std::ostream &os, const Topology &topo);
// Node count is max index + 1 unless n_nodes > 0 is given.
Topology read_edge_list(std::istream &is, int n_nodes = 0);

enum class SpectralMethod
{
    automatic,  // eigendecomposition up to kDenseSpectralLimit nodes, power iteration above
    eigensolver,
    power_iteration,
};

inline constexpr int kDenseSpectralLimit = 512;

// Symmetric doubly stochastic consensus weights matching a topology.
//
// lambda2() (second-largest eigenvalue modulus) is computed on first use and
// cached; copies share the cache, and concurrent first calls are safe.
class MixingMatrix
{
public:
    // Validates symmetry, nonnegativity and unit row sums (1e-12).
    explicit MixingMatrix(Eigen::MatrixXd w);

    const Eigen::MatrixXd &matrix() const noexcept { return w_; }
    Eigen::Index size() const noexcept { return w_.rows(); }
    Eigen::VectorXd row(Eigen::Index n) const { return w_.row(n).transpose(); }

    double lambda2() const;

private:
    struct Cache;
    Eigen::MatrixXd w_;
    std::shared_ptr<Cache> cache_;
};

// Metropolis-Hastings weights: 1/(max(deg_i, deg_j) + 1) on edges, zero off
// the edge set, and the diagonal absorbs the remainder of each row.
MixingMatrix mixing_matrix(const Topology &topo);

// Second-largest eigenvalue modulus of W. The largest is always 1.
double spectral_gap(const MixingMatrix &w, SpectralMethod method = SpectralMethod::automatic);

// Power iteration on W - 11^T/N. Stops when successive Rayleigh estimates
// differ by less than tol, or after max_iters.
double spectral_gap_power(const Eigen::MatrixXd &w, double tol = 1e-10, int max_iters = 100000);

} // namespace dasync

#endif // DASYNC_TOPOLOGY_HPP
