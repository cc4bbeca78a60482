#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "forest.hpp"
#include "rng.hpp"
#include "ust.hpp"

namespace frcom {

/// How the pair of adjacent partitions to merge is chosen.
enum class PairMethod {
    UniformNeighbor,  // uniform partition, then uniform neighbouring partition
    BoundaryWeighted, // uniform edge among those crossing partitions
};

inline std::string to_string(PairMethod m) {
    return m == PairMethod::UniformNeighbor ? "uniform_neighbor" : "boundary_weighted";
}

inline PairMethod pair_method_from_string(const std::string& s) {
    if (s == "uniform_neighbor") return PairMethod::UniformNeighbor;
    if (s == "boundary_weighted") return PairMethod::BoundaryWeighted;
    throw Error("unknown pair method '" + s + "' (expected uniform_neighbor or boundary_weighted)");
}

/// Probability of selecting the unordered pair {i, j} given the partition
/// adjacency of the current state.
inline double pair_probability(PairMethod method, const PartitionAdjacency& adj, int n, PartId i, PartId j) {
    auto key = std::minmax(i, j);
    auto it = adj.find(key);
    if (i == j || it == adj.end())
        throw Error("partitions " + std::to_string(i) + " and " + std::to_string(j) + " are not adjacent");
    if (method == PairMethod::UniformNeighbor) {
        int ni = 0, nj = 0;
        for (const auto& [p, c] : adj) {
            if (p.first == i || p.second == i) ++ni;
            if (p.first == j || p.second == j) ++nj;
        }
        return (1.0 / n) * (1.0 / ni + 1.0 / nj);
    }
    long total = 0;
    for (const auto& [p, c] : adj) total += c;
    return static_cast<double>(it->second) / static_cast<double>(total);
}

inline double pair_probability(PairMethod method, const Graph& g, const Assignment& a, PartId i, PartId j) {
    return pair_probability(method, partition_adjacency(g, a), a.n, i, j);
}

/// Draw an adjacent pair, returned with first < second.
inline std::pair<PartId, PartId> sample_pair(PairMethod method, const Graph& g, const Assignment& a,
                                             RngStream& rng) {
    if (a.n < 2) throw Error("pair selection needs at least two partitions");
    if (method == PairMethod::UniformNeighbor) {
        auto adj = partition_adjacency(g, a);
        std::vector<std::vector<PartId>> nbrs(a.n);
        for (const auto& [p, c] : adj) {
            nbrs[p.first].push_back(p.second);
            nbrs[p.second].push_back(p.first);
        }
        PartId i = static_cast<PartId>(rng.below(a.n));
        PartId j = nbrs[i][rng.below(nbrs[i].size())];
        return std::minmax(i, j);
    }
    std::vector<EdgeId> crossing;
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (a.labels[g.edge(e).u] != a.labels[g.edge(e).v]) crossing.push_back(e);
    const auto& r = g.edge(crossing[rng.below(crossing.size())]);
    return std::minmax(a.labels[r.u], a.labels[r.v]);
}

/// Sum over edges e joining the two trees of the probability that the tree
/// T_i + T_j + e is cut exactly at e under a uniform choice from its cut set.
inline double effective_boundary(const Tree& ti, const Tree& tj, const Graph& g, const PopWindow& window) {
    const bool own_split_valid = window.contains(ti.total) && window.contains(tj.total);
    double sum = 0.0;
    int connecting = 0;
    for (NodeId v : ti.vertices)
        for (auto [w, e] : g.neighbors(v)) {
            if (!tj.contains(w)) continue;
            ++connecting;
            if (!own_split_valid) continue;
            auto cuts = joined_cut_edges(ti, tj, e, g, window);
            sum += 1.0 / static_cast<double>(cuts.size());
        }
    if (connecting == 0) throw Error("trees are not adjacent: no connecting edges");
    return sum;
}

/// One Forest ReCom proposal with everything needed for the acceptance test.
struct Proposal {
    std::pair<PartId, PartId> pair{-1, -1};
    std::pair<Tree, Tree> new_trees; // for pair.first and pair.second
    EdgeId cut_edge = -1;
    double log_fwd_boundary = 0.0; // ln d(T_i', T_j')
    double log_bwd_boundary = 0.0; // ln d(T_i, T_j)
    double log_pair_fwd = 0.0;     // ln p({i,j} | T)
    double log_pair_bwd = 0.0;     // ln p({i,j} | T')
    bool self_loop = false;
};

/// Fill in the pair probabilities and effective boundaries of a proposal
/// that replaces partitions pair.first < pair.second of `state` with `trees`
/// (the tree holding the smaller node id goes to pair.first).
inline Proposal complete_proposal(const SpanningForest& state, PairMethod method, const PopWindow& window,
                                  const Graph& g, std::pair<PartId, PartId> pair, std::pair<Tree, Tree> trees,
                                  EdgeId cut_edge) {
    Proposal p;
    const Assignment& a = state.assignment;
    const auto [i, j] = pair;
    p.pair = pair;
    p.cut_edge = cut_edge;
    p.new_trees = std::move(trees);
    if (p.new_trees.second.min_vertex() < p.new_trees.first.min_vertex()) std::swap(p.new_trees.first, p.new_trees.second);

    const auto& [ti_new, tj_new] = p.new_trees;
    std::vector<PartId> labels = a.labels;
    for (NodeId v : ti_new.vertices) labels[v] = i;
    for (NodeId v : tj_new.vertices) labels[v] = j;

    p.log_pair_fwd = std::log(pair_probability(method, partition_adjacency(g, a), a.n, i, j));
    p.log_pair_bwd = std::log(pair_probability(method, partition_adjacency(g, labels), a.n, i, j));
    p.log_fwd_boundary = std::log(effective_boundary(ti_new, tj_new, g, window));
    const double bwd = effective_boundary(state.trees[i], state.trees[j], g, window);
    if (!(bwd > 0.0))
        throw Error("current split of partitions " + std::to_string(i) + " and " + std::to_string(j) +
                    " is unreachable under the window (inconsistent state)");
    p.log_bwd_boundary = std::log(bwd);
    return p;
}

/// Merge a random adjacent pair, draw a uniform spanning tree on the merged
/// region and cut it uniformly among balanced cut edges. When no edge yields
/// a balanced split the proposal is a self-loop.
inline Proposal propose(const SpanningForest& state, PairMethod method, const PopWindow& window, const Graph& g,
                        RngStream& rng) {
    const Assignment& a = state.assignment;
    const auto pair = sample_pair(method, g, a, rng);
    const Subgraph merged = merged_subgraph(g, a, pair.first, pair.second);
    Tree joined = root_tree(merged.nodes, wilson_ust(merged, rng), g);
    const auto cuts = find_cut_edges(joined, window);
    if (cuts.empty()) {
        Proposal p;
        p.pair = pair;
        p.self_loop = true;
        return p;
    }
    const EdgeId cut = cuts[rng.below(cuts.size())];
    return complete_proposal(state, method, window, g, pair, split_tree(joined, cut, g), cut);
}

/// ln of Q(T', T) / Q(T, T'). The tree count of the merged region appears in
/// both directions and is never evaluated.
inline double log_proposal_ratio(const Proposal& p) {
    if (p.self_loop) throw Error("self-loop proposals have no proposal ratio");
    return (p.log_pair_bwd + p.log_bwd_boundary) - (p.log_pair_fwd + p.log_fwd_boundary);
}

} // namespace frcom
