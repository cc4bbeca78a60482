#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "graph.hpp"

namespace frcom {

/// Natural log of a spanning-tree count.
struct LogTreeCount {
    double value = 0.0;
};

inline constexpr double kPivotTolerance = 1e-12;

/// ln det of the Laplacian of `sub` with row/column `drop` deleted (matrix-tree
/// theorem). Dense LU with partial pivoting, accumulated in log space.
inline LogTreeCount log_tree_count(const Subgraph& sub, int drop) {
    const int n = sub.size();
    if (n == 0) throw Error("tree count of an empty graph");
    if (drop < 0 || drop >= n) throw Error("minor index out of range");
    if (!is_connected(sub)) throw Error("tree count of a disconnected graph is zero");
    if (n == 1) return {0.0};

    const int m = n - 1;
    auto idx = [drop](int v) { return v < drop ? v : v - 1; };
    std::vector<double> q(static_cast<std::size_t>(m) * m, 0.0);
    auto at = [&](int r, int c) -> double& { return q[static_cast<std::size_t>(r) * m + c]; };
    for (const auto& e : sub.edges) {
        if (e.a != drop) at(idx(e.a), idx(e.a)) += 1.0;
        if (e.b != drop) at(idx(e.b), idx(e.b)) += 1.0;
        if (e.a != drop && e.b != drop) {
            at(idx(e.a), idx(e.b)) -= 1.0;
            at(idx(e.b), idx(e.a)) -= 1.0;
        }
    }

    double logdet = 0.0;
    int sign = 1;
    for (int k = 0; k < m; ++k) {
        int p = k;
        for (int r = k + 1; r < m; ++r)
            if (std::abs(at(r, k)) > std::abs(at(p, k))) p = r;
        const double pivot = at(p, k);
        if (std::abs(pivot) < kPivotTolerance)
            throw Error("singular Laplacian minor (disconnected graph or numerical failure)");
        if (p != k) {
            for (int c = 0; c < m; ++c) std::swap(at(k, c), at(p, c));
            sign = -sign;
        }
        if (pivot < 0) sign = -sign;
        logdet += std::log(std::abs(pivot));
        for (int r = k + 1; r < m; ++r) {
            const double f = at(r, k) / pivot;
            if (f == 0.0) continue;
            for (int c = k + 1; c < m; ++c) at(r, c) -= f * at(k, c);
        }
    }
    if (sign < 0) throw Error("negative Laplacian minor determinant");
    return {logdet};
}

inline LogTreeCount log_tree_count(const Subgraph& sub) { return log_tree_count(sub, sub.size() - 1); }

/// ln tau(xi) = sum over parts of ln tau(xi_i).
inline LogTreeCount log_forest_count(const Graph& g, const Assignment& a) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += log_tree_count(induced_subgraph(g, a.members(i))).value;
    return {s};
}

inline std::vector<double> part_log_tree_counts(const Graph& g, const Assignment& a) {
    std::vector<double> out(a.n);
    for (int i = 0; i < a.n; ++i) out[i] = log_tree_count(induced_subgraph(g, a.members(i))).value;
    return out;
}

inline constexpr int kBruteForceEdgeLimit = 24;

/// Exact spanning-tree count by testing every (|V|-1)-edge subset.
inline std::uint64_t brute_count_trees(const Subgraph& sub) {
    const int n = sub.size(), m = sub.edge_count();
    if (m > kBruteForceEdgeLimit)
        throw Error("brute-force tree count limited to " + std::to_string(kBruteForceEdgeLimit) + " edges");
    if (n == 0) return 0;
    if (n == 1) return 1;
    const int k = n - 1;
    if (k > m) return 0;

    std::vector<int> parent(n);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::uint64_t count = 0;
    const std::uint64_t limit = std::uint64_t{1} << m;
    // Gosper's hack: walk every m-bit word with exactly k set bits
    for (std::uint64_t set = (std::uint64_t{1} << k) - 1; set < limit;) {
        std::iota(parent.begin(), parent.end(), 0);
        bool acyclic = true;
        for (int e = 0; e < m && acyclic; ++e) {
            if (!(set >> e & 1)) continue;
            int ra = find(sub.edges[e].a), rb = find(sub.edges[e].b);
            if (ra == rb) acyclic = false;
            else parent[ra] = rb;
        }
        // k acyclic edges on n = k + 1 vertices always connect them
        if (acyclic) ++count;
        const std::uint64_t c = set & (0 - set);
        const std::uint64_t r = set + c;
        set = (((r ^ set) >> 2) / c) | r;
    }
    return count;
}

} // namespace frcom
