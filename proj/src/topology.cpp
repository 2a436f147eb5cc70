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

#include "dasync/topology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dasync {

namespace {

bool is_connected(int n, const std::vector<Edge> &edges)
{
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto &e : edges)
    {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty())
    {
        const int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v])
            {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
    }
    return count == n;
}

double pair_count(int n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

// Decodes a Pruefer sequence into the edges of a labeled tree. A uniform
// sequence gives a uniform spanning tree of the complete graph.
std::vector<Edge> pruefer_tree(const std::vector<int> &code, int n)
{
    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int v : code)
        ++degree[v];

    std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
    for (int v = 0; v < n; ++v)
        if (degree[v] == 1)
            leaves.push(v);

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n - 1));
    for (int v : code)
    {
        const int leaf = leaves.top();
        leaves.pop();
        edges.emplace_back(leaf, v);
        if (--degree[v] == 1)
            leaves.push(v);
    }
    const int u = leaves.top();
    leaves.pop();
    const int w = leaves.top();
    edges.emplace_back(u, w);
    return edges;
}

} // namespace

Topology::Topology(int n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges))
{
    if (n_nodes_ < 2)
        throw std::invalid_argument("Topology: need at least 2 nodes, got " + std::to_string(n_nodes_));
    for (auto &e : edges_)
    {
        e = Edge(e.a, e.b);
        if (e.a < 0 || e.b >= n_nodes_)
            throw std::invalid_argument("Topology: edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                                        ") out of range");
        if (e.a == e.b)
            throw std::invalid_argument("Topology: self-loop at node " + std::to_string(e.a));
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw std::invalid_argument("Topology: duplicate edge");
    if (!is_connected(n_nodes_, edges_))
        throw std::invalid_argument("Topology: graph is not connected");
}

double Topology::connectivity() const noexcept
{
    return static_cast<double>(edges_.size()) / pair_count(n_nodes_);
}

double Topology::avg_degree() const noexcept
{
    return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_nodes_);
}

std::vector<int> Topology::degrees() const
{
    std::vector<int> deg(static_cast<std::size_t>(n_nodes_), 0);
    for (const auto &e : edges_)
    {
        ++deg[e.a];
        ++deg[e.b];
    }
    return deg;
}

bool Topology::has_edge(int i, int j) const
{
    if (i == j)
        return false;
    return std::binary_search(edges_.begin(), edges_.end(), Edge(i, j));
}

std::size_t edge_quota(int n_nodes, double connectivity)
{
    return static_cast<std::size_t>(std::llround(connectivity * pair_count(n_nodes)));
}

Topology build_random_graph(int n_nodes, double connectivity, Rng &rng)
{
    if (n_nodes < 2)
        throw std::invalid_argument("build_random_graph: need at least 2 nodes, got " + std::to_string(n_nodes));
    if (!(connectivity > 0.0) || connectivity > 1.0)
    {
        std::ostringstream msg;
        msg << "build_random_graph: connectivity " << connectivity << " outside (0, 1]";
        throw std::invalid_argument(msg.str());
    }
    // Small slack so that e.g. 0.2 * 4950 = 989.9999... still floors to 990.
    const double slots = connectivity * pair_count(n_nodes);
    if (std::floor(slots + 1e-9) < static_cast<double>(n_nodes - 1))
    {
        std::ostringstream msg;
        msg << "build_random_graph: connectivity " << connectivity << " cannot hold a spanning tree on "
            << n_nodes << " nodes (disconnected graph); need c >= " << (n_nodes - 1) / pair_count(n_nodes);
        throw std::invalid_argument(msg.str());
    }
    const std::size_t quota = edge_quota(n_nodes, connectivity);

    std::vector<Edge> edges;
    if (n_nodes == 2)
    {
        edges.emplace_back(0, 1);
    }
    else
    {
        std::uniform_int_distribution<int> pick(0, n_nodes - 1);
        std::vector<int> code(static_cast<std::size_t>(n_nodes - 2));
        for (auto &v : code)
            v = pick(rng);
        edges = pruefer_tree(code, n_nodes);
    }

    if (quota > edges.size())
    {
        std::vector<char> used(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_nodes), 0);
        for (const auto &e : edges)
            used[static_cast<std::size_t>(e.a) * n_nodes + e.b] = 1;
        std::vector<Edge> free_pairs;
        free_pairs.reserve(static_cast<std::size_t>(pair_count(n_nodes)) - edges.size());
        for (int i = 0; i < n_nodes; ++i)
            for (int j = i + 1; j < n_nodes; ++j)
                if (!used[static_cast<std::size_t>(i) * n_nodes + j])
                    free_pairs.emplace_back(i, j);

        // Partial Fisher-Yates: the first `extra` slots become a uniform sample.
        const std::size_t extra = quota - edges.size();
        for (std::size_t k = 0; k < extra; ++k)
        {
            std::uniform_int_distribution<std::size_t> pick(k, free_pairs.size() - 1);
            std::swap(free_pairs[k], free_pairs[pick(rng)]);
            edges.push_back(free_pairs[k]);
        }
    }
    return Topology(n_nodes, std::move(edges));
}

void write_edge_list(std::ostream &os, const Topology &topo)
{
    for (const auto &e : topo.edges())
        os << e.a << ' ' << e.b << '\n';
}

Topology read_edge_list(std::istream &is, int n_nodes)
{
    std::vector<Edge> edges;
    int max_index = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line))
    {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        int i = 0, j = 0;
        if (!(ls >> i >> j))
            throw std::invalid_argument("read_edge_list: malformed line " + std::to_string(line_no));
        edges.emplace_back(i, j);
        max_index = std::max({max_index, i, j});
    }
    return Topology(n_nodes > 0 ? n_nodes : max_index + 1, std::move(edges));
}

// ------------------------------------------------------------------------

struct MixingMatrix::Cache
{
    std::once_flag once;
    double lambda2 = 0.0;
};

MixingMatrix::MixingMatrix(Eigen::MatrixXd w) : w_(std::move(w)), cache_(std::make_shared<Cache>())
{
    if (w_.rows() != w_.cols() || w_.rows() < 1)
        throw std::invalid_argument("MixingMatrix: matrix must be square and non-empty");
    constexpr double tol = 1e-12;
    if ((w_ - w_.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw std::invalid_argument("MixingMatrix: matrix is not symmetric");
    if (w_.minCoeff() < 0.0)
        throw std::invalid_argument("MixingMatrix: negative weight");
    if ((w_.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol)
        throw std::invalid_argument("MixingMatrix: rows do not sum to 1");
}

double MixingMatrix::lambda2() const
{
    std::call_once(cache_->once, [this] { cache_->lambda2 = spectral_gap(*this); });
    return cache_->lambda2;
}

MixingMatrix mixing_matrix(const Topology &topo)
{
    const int n = topo.n_nodes();
    const auto deg = topo.degrees();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto &e : topo.edges())
    {
        const double weight = 1.0 / (std::max(deg[e.a], deg[e.b]) + 1.0);
        w(e.a, e.b) = weight;
        w(e.b, e.a) = weight;
    }
    for (int i = 0; i < n; ++i)
    {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i)
                off += w(i, j);
        w(i, i) = 1.0 - off;
    }
    return MixingMatrix(std::move(w));
}

double spectral_gap_power(const Eigen::MatrixXd &w, double tol, int max_iters)
{
    const Eigen::Index n = w.rows();
    if (n < 2)
        return 0.0;
    // Deterministic start with no component along the consensus direction.
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
    x.array() += 0.5 * Eigen::VectorXd::LinSpaced(n, 0.0, 1.0).array().square();
    x.array() -= x.mean();
    x.normalize();

    double estimate = 0.0;
    for (int it = 0; it < max_iters; ++it)
    {
        Eigen::VectorXd y = w * x;
        y.array() -= y.mean(); // deflate the eigenvalue-1 direction
        const double norm = y.norm();
        if (norm == 0.0)
            return 0.0;
        // ||Bx|| with ||x|| = 1 tends to the largest modulus of B = W - 11^T/N,
        // also when +lambda and -lambda tie.
        if (std::abs(norm - estimate) < tol)
            return norm;
        estimate = norm;
        x = y / norm;
    }
    return estimate;
}

double spectral_gap(const MixingMatrix &w, SpectralMethod method)
{
    const Eigen::Index n = w.size();
    if (n < 2)
        return 0.0;
    if (method == SpectralMethod::automatic)
        method = n <= kDenseSpectralLimit ? SpectralMethod::eigensolver : SpectralMethod::power_iteration;
    if (method == SpectralMethod::power_iteration)
        return spectral_gap_power(w.matrix());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_gap: eigendecomposition failed");
    Eigen::VectorXd moduli = es.eigenvalues().cwiseAbs();
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    return moduli(1);
}

} // namespace dasync
