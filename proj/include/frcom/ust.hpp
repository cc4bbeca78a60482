#pragma once

#include <algorithm>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace frcom {

namespace detail {

// Random walk from `start` until it hits a vertex with in_target set, erasing
// each loop as soon as it closes. Returns local vertex ids, start first.
// `slot` is scratch of size sub.size() filled with -1.
inline std::vector<int> loop_erased_walk_local(const Subgraph& sub, int start, const std::vector<char>& in_target,
                                               RngStream& rng, std::vector<int>& slot) {
    std::vector<int> path{start};
    slot[start] = 0;
    int x = start;
    while (!in_target[x]) {
        const auto& nb = sub.adj[x];
        int y = nb[rng.below(nb.size())].first;
        if (slot[y] >= 0) {
            // erase everything after the first visit of y
            for (std::size_t k = slot[y] + 1; k < path.size(); ++k) slot[path[k]] = -1;
            path.resize(slot[y] + 1);
        } else {
            slot[y] = static_cast<int>(path.size());
            path.push_back(y);
        }
        x = y;
    }
    for (int v : path) slot[v] = -1;
    return path;
}

inline bool reaches(const Subgraph& sub, int start, const std::vector<char>& in_target) {
    std::vector<char> mark(sub.size(), 0);
    std::vector<int> stack{start};
    mark[start] = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        if (in_target[x]) return true;
        for (auto [y, k] : sub.adj[x])
            if (!mark[y]) mark[y] = 1, stack.push_back(y);
    }
    return false;
}

} // namespace detail

/// Loop-erased random walk on `sub` from global node `start` to any of
/// `targets` (global ids). Returns the erased path in global ids.
inline std::vector<NodeId> loop_erased_walk(const Subgraph& sub, NodeId start, const std::vector<NodeId>& targets,
                                            RngStream& rng) {
    if (!sub.contains(start)) throw Error("walk start is not in the subgraph");
    std::vector<char> in_target(sub.size(), 0);
    for (NodeId t : targets) {
        if (!sub.contains(t)) throw Error("walk target is not in the subgraph");
        in_target[sub.local.at(t)] = 1;
    }
    int s = sub.local.at(start);
    if (in_target[s]) throw Error("walk start is already a target");
    if (!detail::reaches(sub, s, in_target)) throw Error("walk targets are unreachable");
    std::vector<int> slot(sub.size(), -1);
    auto path = detail::loop_erased_walk_local(sub, s, in_target, rng, slot);
    std::vector<NodeId> out;
    out.reserve(path.size());
    for (int v : path) out.push_back(sub.nodes[v]);
    return out;
}

/// Uniform spanning tree of a connected subgraph (Wilson's algorithm).
/// Returns the global edge ids of the tree, ascending.
inline std::vector<EdgeId> wilson_ust(const Subgraph& sub, RngStream& rng) {
    const int n = sub.size();
    if (n == 0) throw Error("cannot draw a spanning tree of an empty graph");
    if (!is_connected(sub)) throw Error("cannot draw a spanning tree of a disconnected graph");
    std::vector<EdgeId> out;
    if (n == 1) return out;
    out.reserve(n - 1);

    std::vector<char> in_tree(n, 0);
    std::vector<int> slot(n, -1);
    auto freeze = [&](const std::vector<int>& path) {
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            int a = path[k], b = path[k + 1];
            for (auto [y, idx] : sub.adj[a])
                if (y == b) {
                    out.push_back(sub.edges[idx].id);
                    break;
                }
            in_tree[a] = 1;
        }
        in_tree[path.back()] = 1;
    };

    int root = static_cast<int>(rng.below(n));
    in_tree[root] = 1;
    int first = static_cast<int>(rng.below(n - 1));
    if (first >= root) ++first;
    freeze(detail::loop_erased_walk_local(sub, first, in_tree, rng, slot));
    for (int v = 0; v < n; ++v)
        if (!in_tree[v]) freeze(detail::loop_erased_walk_local(sub, v, in_tree, rng, slot));

    std::sort(out.begin(), out.end());
    return out;
}

} // namespace frcom
