#pragma once

// Exhaustive ground truth for toy graphs: balanced partition catalogs, exact
// target distributions and exact Metropolis-Hastings kernel rows.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forest.hpp"
#include "measure.hpp"
#include "proposal.hpp"
#include "tree_count.hpp"

namespace frcom {

// ---------------------------------------------------------------------------
// spanning tree enumeration

/// Every spanning tree of `sub` as ascending global edge ids.
inline std::vector<std::vector<EdgeId>> enumerate_spanning_trees(const Subgraph& sub) {
    const int n = sub.size(), m = sub.edge_count();
    if (m > kBruteForceEdgeLimit)
        throw Error("spanning tree enumeration limited to " + std::to_string(kBruteForceEdgeLimit) + " edges");
    std::vector<std::vector<EdgeId>> out;
    if (n == 0) return out;
    std::vector<int> chosen;
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [](std::vector<int>& c, int x) {
        while (c[x] != x) x = c[x];
        return x;
    };
    std::function<void(int, std::vector<int>&)> rec = [&](int e, std::vector<int>& c) {
        const int need = n - 1 - static_cast<int>(chosen.size());
        if (need == 0) {
            std::vector<EdgeId> ids;
            for (int k : chosen) ids.push_back(sub.edges[k].id);
            std::sort(ids.begin(), ids.end());
            out.push_back(std::move(ids));
            return;
        }
        if (m - e < need) return;
        int ra = find(c, sub.edges[e].a), rb = find(c, sub.edges[e].b);
        if (ra != rb) {
            std::vector<int> c2 = c;
            c2[ra] = rb;
            chosen.push_back(e);
            rec(e + 1, c2);
            chosen.pop_back();
        }
        rec(e + 1, c);
    };
    rec(0, comp);
    return out;
}

// ---------------------------------------------------------------------------
// partition catalogs

struct PartitionCatalog {
    int n = 0;
    PopWindow window;
    std::vector<Assignment> partitions; // canonical labels
    std::vector<double> log_weights;    // filled by weigh_catalog
};

inline constexpr double kLabelEnumerationLimit = 1e9;
inline constexpr std::size_t kCatalogSizeLimit = 10'000'000;

/// Region growing: the smallest unassigned vertex seeds the next part, every
/// connected balanced set containing it is tried, and the last part is
/// whatever remains.
inline PartitionCatalog enumerate_partitions(const Graph& g, int n, const PopWindow& window) {
    if (n < 1) throw Error("partition count must be positive");
    if (g.size() > 64) throw Error("enumeration guard: graphs above 64 nodes are refused");
    PartitionCatalog cat{n, window, {}, {}};
    if (window.empty()) return cat;
    const int V = g.size();
    std::vector<PartId> labels(V, -1);

    auto remainder_connected = [&](PartId label) {
        std::vector<NodeId> rest;
        for (NodeId v = 0; v < V; ++v)
            if (labels[v] < 0) rest.push_back(v);
        if (rest.empty()) return false;
        for (NodeId v : rest) labels[v] = label;
        bool ok = is_connected(induced_subgraph(g, rest));
        if (!ok)
            for (NodeId v : rest) labels[v] = -1;
        return ok;
    };

    std::function<void(int, Pop)> place = [&](int k, Pop unassigned_pop) {
        if (cat.partitions.size() >= kCatalogSizeLimit)
            throw Error("enumeration guard: more than " + std::to_string(kCatalogSizeLimit) + " partitions");
        if (k == n - 1) {
            if (!window.contains(unassigned_pop)) return;
            if (remainder_connected(k)) {
                cat.partitions.push_back({labels, n});
                for (auto& l : labels)
                    if (l == k) l = -1;
            }
            return;
        }
        NodeId seed = 0;
        while (labels[seed] >= 0) ++seed;
        const int parts_after = n - k - 1;
        const PopWindow rest{window.lo * parts_after, window.hi * parts_after};

        std::vector<char> in_set(V, 0), excluded(V, 0), in_cand(V, 0);
        std::vector<NodeId> set;
        std::function<void(std::vector<NodeId>, Pop)> grow = [&](std::vector<NodeId> cand, Pop pop) {
            if (cand.empty()) {
                if (window.contains(pop) && rest.contains(unassigned_pop - pop)) {
                    for (NodeId v : set) labels[v] = k;
                    place(k + 1, unassigned_pop - pop);
                    for (NodeId v : set) labels[v] = -1;
                }
                return;
            }
            NodeId u = cand.back();
            cand.pop_back();
            in_cand[u] = 0;
            excluded[u] = 1;
            grow(cand, pop);
            excluded[u] = 0;
            if (pop + g.pop(u) <= window.hi) {
                std::vector<NodeId> added;
                for (auto [w, e] : g.neighbors(u))
                    if (labels[w] < 0 && !in_set[w] && !excluded[w] && !in_cand[w]) {
                        in_cand[w] = 1;
                        added.push_back(w);
                    }
                auto cand2 = cand;
                cand2.insert(cand2.end(), added.begin(), added.end());
                in_set[u] = 1;
                set.push_back(u);
                grow(cand2, pop + g.pop(u));
                set.pop_back();
                in_set[u] = 0;
                for (NodeId w : added) in_cand[w] = 0;
            }
            in_cand[u] = 1;
        };
        in_set[seed] = 1;
        set.push_back(seed);
        std::vector<NodeId> cand;
        for (auto [w, e] : g.neighbors(seed))
            if (labels[w] < 0) {
                in_cand[w] = 1;
                cand.push_back(w);
            }
        if (g.pop(seed) <= window.hi) grow(cand, g.pop(seed));
    };

    place(0, g.total_pop());
    std::sort(cat.partitions.begin(), cat.partitions.end(),
              [](const Assignment& a, const Assignment& b) { return a.labels < b.labels; });
    return cat;
}

/// Filtered label enumeration over restricted-growth label strings (labels
/// first appear in node order), keeping connected balanced assignments.
inline PartitionCatalog enumerate_partitions_by_labels(const Graph& g, int n, const PopWindow& window) {
    const int V = g.size();
    if (std::pow(static_cast<double>(n), V) > kLabelEnumerationLimit)
        throw Error("enumeration guard: n^|V| exceeds 1e9");
    PartitionCatalog cat{n, window, {}, {}};
    std::vector<PartId> labels(V, 0);
    std::vector<Pop> pops(n, 0);
    std::function<void(int, int)> rec = [&](int v, int used) {
        if (v == V) {
            if (used != n) return;
            for (int i = 0; i < n; ++i)
                if (!window.contains(pops[i])) return;
            Assignment a{labels, n};
            for (int i = 0; i < n; ++i)
                if (!is_connected(induced_subgraph(g, a.members(i)))) return;
            cat.partitions.push_back(std::move(a));
            return;
        }
        if (n - used > V - v) return;
        for (int l = 0; l <= std::min(used, n - 1); ++l) {
            if (pops[l] + g.pop(v) > window.hi) continue;
            labels[v] = l;
            pops[l] += g.pop(v);
            rec(v + 1, std::max(used, l + 1));
            pops[l] -= g.pop(v);
        }
    };
    rec(0, 0);
    std::sort(cat.partitions.begin(), cat.partitions.end(),
              [](const Assignment& a, const Assignment& b) { return a.labels < b.labels; });
    return cat;
}

/// ln of e^{-beta J} tau^{1-gamma}; -inf for infeasible partitions.
inline double partition_log_weight(const Graph& g, const Assignment& a, const MeasureParams& params) {
    const ScoreBreakdown s = score(g, a, params);
    if (!s.feasible()) return -kInf;
    double w = -params.beta * s.total;
    if (params.gamma != 1.0) w += (1.0 - params.gamma) * log_forest_count(g, a).value;
    return w;
}

inline void weigh_catalog(PartitionCatalog& cat, const Graph& g, const MeasureParams& params) {
    cat.log_weights.clear();
    for (const auto& a : cat.partitions) cat.log_weights.push_back(partition_log_weight(g, a, params));
}

inline std::vector<double> normalize_log_weights(const std::vector<double>& lw) {
    double mx = -kInf;
    for (double x : lw) mx = std::max(mx, x);
    if (!std::isfinite(mx)) throw Error("all catalog weights are zero");
    std::vector<double> p(lw.size());
    double z = 0.0;
    for (std::size_t k = 0; k < lw.size(); ++k) z += p[k] = std::exp(lw[k] - mx);
    for (double& x : p) x /= z;
    return p;
}

/// Exact probabilities of each catalog entry under params.
inline std::vector<double> exact_distribution(const PartitionCatalog& cat, const Graph& g, const MeasureParams& params) {
    std::vector<double> lw;
    for (const auto& a : cat.partitions) lw.push_back(partition_log_weight(g, a, params));
    return normalize_log_weights(lw);
}

inline void write_catalog(std::ostream& out, const PartitionCatalog& cat) {
    for (std::size_t k = 0; k < cat.partitions.size(); ++k) {
        nlohmann::json j{{"labels", cat.partitions[k].labels}};
        if (k < cat.log_weights.size()) {
            if (std::isfinite(cat.log_weights[k]))
                j["log_weight"] = cat.log_weights[k];
            else
                j["log_weight"] = "-inf";
        }
        out << j.dump() << '\n';
    }
}

inline PartitionCatalog read_catalog(std::istream& in) {
    PartitionCatalog cat;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            Assignment a;
            a.labels = j.at("labels").get<std::vector<PartId>>();
            a.n = a.labels.empty() ? 0 : *std::max_element(a.labels.begin(), a.labels.end()) + 1;
            cat.n = std::max(cat.n, a.n);
            cat.partitions.push_back(std::move(a));
            if (j.contains("log_weight"))
                cat.log_weights.push_back(j["log_weight"].is_string() ? -kInf : j["log_weight"].get<double>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("malformed catalog line: ") + e.what());
        }
    }
    if (!cat.log_weights.empty() && cat.log_weights.size() != cat.partitions.size())
        throw Error("catalog lines disagree on log_weight presence");
    for (auto& a : cat.partitions) a.n = cat.n;
    return cat;
}

// ---------------------------------------------------------------------------
// forests as exact states

/// Label-invariant identity of a spanning forest: canonical labels followed by
/// each canonical part's edges, parts separated by -1.
using ForestKey = std::vector<int>;

inline ForestKey forest_key(const SpanningForest& f) {
    std::vector<int> order(f.parts());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f.trees[a].min_vertex() < f.trees[b].min_vertex(); });
    ForestKey key = canonicalize(f.assignment).labels;
    for (int p : order) {
        key.push_back(-1);
        key.insert(key.end(), f.trees[p].edges.begin(), f.trees[p].edges.end());
    }
    return key;
}

/// Relabel parts by smallest contained node id.
inline SpanningForest canonical_forest(const Graph& g, SpanningForest f) {
    std::sort(f.trees.begin(), f.trees.end(),
              [](const Tree& a, const Tree& b) { return a.min_vertex() < b.min_vertex(); });
    return make_forest(g, std::move(f.trees));
}

/// All spanning forests over every catalog partition, canonically labelled.
inline std::vector<SpanningForest> enumerate_forests(const Graph& g, const PartitionCatalog& cat) {
    std::vector<SpanningForest> out;
    for (const auto& a : cat.partitions) {
        std::vector<std::vector<Tree>> choices(a.n);
        for (int i = 0; i < a.n; ++i) {
            auto members = a.members(i);
            for (auto& edges : enumerate_spanning_trees(induced_subgraph(g, members)))
                choices[i].push_back(root_tree(members, std::move(edges), g));
        }
        std::vector<std::size_t> pick(a.n, 0);
        for (;;) {
            std::vector<Tree> trees;
            for (int i = 0; i < a.n; ++i) trees.push_back(choices[i][pick[i]]);
            out.push_back(make_forest(g, std::move(trees)));
            int i = a.n - 1;
            while (i >= 0 && ++pick[i] == choices[i].size()) pick[i--] = 0;
            if (i < 0) break;
        }
    }
    return out;
}

namespace detail {

using TreeKey = std::vector<int>; // vertices, -1, edges
inline TreeKey tree_key(const Tree& t) {
    TreeKey k = t.vertices;
    k.push_back(-1);
    k.insert(k.end(), t.edges.begin(), t.edges.end());
    return k;
}

// Components of a tree with one edge removed, found by union-find so the
// oracle does not reuse the subtree-population machinery it checks.
inline std::pair<std::vector<NodeId>, std::vector<NodeId>> tree_pieces(const Graph& g, const std::vector<NodeId>& verts,
                                                                       const std::vector<EdgeId>& edges, EdgeId cut) {
    std::map<NodeId, NodeId> parent;
    for (NodeId v : verts) parent[v] = v;
    std::function<NodeId(NodeId)> find = [&](NodeId x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (EdgeId e : edges)
        if (e != cut) parent[find(g.edge(e).u)] = find(g.edge(e).v);
    const NodeId r = find(g.edge(cut).u);
    std::vector<NodeId> a, b;
    for (NodeId v : verts) (find(v) == r ? a : b).push_back(v);
    if (b.front() < a.front()) std::swap(a, b);
    return {a, b};
}

inline double oracle_log_target(const Graph& g, const SpanningForest& f, const MeasureParams& params) {
    const ScoreBreakdown s = score(g, f.assignment, params);
    if (!s.feasible()) return -kInf;
    double lt = -params.beta * s.total;
    if (params.gamma != 0.0) lt -= params.gamma * log_forest_count(g, f.assignment).value;
    return lt;
}

} // namespace detail

/// Exact proposal and acceptance bookkeeping for one (pair, outcome).
struct PairMove {
    std::pair<PartId, PartId> pair;
    SpanningForest target;
    ForestKey target_key;
    double forward = 0.0; // p({i,j}|T) q(T -> T') for this pair
    double reverse = 0.0; // p({i,j}|T') q(T' -> T) for this pair
    double accept = 0.0;  // A(T, T')
};

struct TransitionRow {
    ForestKey from;
    std::vector<PairMove> moves;
    double no_cut_mass = 0.0;           // proposals with an empty cut set
    std::map<ForestKey, double> proposal; // Q(T, .) summed over pairs, self-loops excluded
    std::map<ForestKey, double> kernel;   // full MH row including the stay-put mass
};

/// Enumerates every pair, every spanning tree of the merged region and every
/// balanced cut, then applies the exact acceptance probability.
inline TransitionRow exact_transition(const SpanningForest& forest, PairMethod method, const PopWindow& window,
                                      const Graph& g, const MeasureParams& params) {
    TransitionRow row;
    row.from = forest_key(forest);
    const Assignment& a = forest.assignment;
    const auto adj = partition_adjacency(g, a);
    const double lt_here = detail::oracle_log_target(g, forest, params);

    for (const auto& [pair, count] : adj) {
        const auto [i, j] = pair;
        const double p_fwd = pair_probability(method, adj, a.n, i, j);
        const Subgraph merged = merged_subgraph(g, a, i, j);
        const auto trees = enumerate_spanning_trees(merged);
        const double tau = static_cast<double>(trees.size());

        // q over unordered outcome pairs, keyed by (lower-min tree, other tree)
        std::map<std::pair<detail::TreeKey, detail::TreeKey>, double> q;
        std::map<std::pair<detail::TreeKey, detail::TreeKey>, std::pair<Tree, Tree>> outcome_trees;
        for (const auto& edges : trees) {
            std::vector<std::pair<std::vector<NodeId>, std::vector<NodeId>>> splits;
            std::vector<EdgeId> cuts;
            for (EdgeId cut : edges) {
                auto pieces = detail::tree_pieces(g, merged.nodes, edges, cut);
                Pop pa = 0, pb = 0;
                for (NodeId v : pieces.first) pa += g.pop(v);
                for (NodeId v : pieces.second) pb += g.pop(v);
                if (window.contains(pa) && window.contains(pb)) {
                    cuts.push_back(cut);
                    splits.push_back(std::move(pieces));
                }
            }
            if (cuts.empty()) {
                row.no_cut_mass += p_fwd / tau;
                continue;
            }
            for (std::size_t c = 0; c < cuts.size(); ++c) {
                std::vector<EdgeId> ea, eb;
                for (EdgeId e : edges) {
                    if (e == cuts[c]) continue;
                    NodeId u = g.edge(e).u;
                    (std::binary_search(splits[c].first.begin(), splits[c].first.end(), u) ? ea : eb).push_back(e);
                }
                Tree ta = root_tree(splits[c].first, ea, g);
                Tree tb = root_tree(splits[c].second, eb, g);
                auto key = std::make_pair(detail::tree_key(ta), detail::tree_key(tb));
                q[key] += 1.0 / (tau * static_cast<double>(cuts.size()));
                outcome_trees.try_emplace(key, std::move(ta), std::move(tb));
            }
        }

        const Tree& cur_lo = forest.trees[i].min_vertex() < forest.trees[j].min_vertex() ? forest.trees[i] : forest.trees[j];
        const Tree& cur_hi = &cur_lo == &forest.trees[i] ? forest.trees[j] : forest.trees[i];
        const auto back_key = std::make_pair(detail::tree_key(cur_lo), detail::tree_key(cur_hi));
        const double q_back = q.count(back_key) ? q.at(back_key) : 0.0;

        for (auto& [key, q_fwd] : q) {
            PairMove mv;
            mv.pair = {i, j};
            auto trees_out = forest.trees;
            trees_out[i] = outcome_trees.at(key).first;
            trees_out[j] = outcome_trees.at(key).second;
            mv.target = make_forest(g, std::move(trees_out));
            mv.target_key = forest_key(mv.target);
            mv.forward = p_fwd * q_fwd;
            const double p_back = pair_probability(method, g, mv.target.assignment, i, j);
            mv.reverse = p_back * q_back;
            const double lt_there = detail::oracle_log_target(g, mv.target, params);
            if (!std::isfinite(lt_there) || mv.reverse == 0.0)
                mv.accept = 0.0;
            else if (!std::isfinite(lt_here))
                mv.accept = 1.0;
            else
                mv.accept = std::min(1.0, std::exp(lt_there - lt_here) * mv.reverse / mv.forward);
            row.proposal[mv.target_key] += mv.forward;
            row.kernel[mv.target_key] += mv.forward * mv.accept;
            row.kernel[row.from] += mv.forward * (1.0 - mv.accept);
            row.moves.push_back(std::move(mv));
        }
    }
    row.kernel[row.from] += row.no_cut_mass;
    return row;
}

/// Dense MH kernel over an enumerated forest state space.
struct ExactKernel {
    std::vector<SpanningForest> states;
    std::map<ForestKey, int> index;
    std::vector<std::vector<double>> k;
    std::vector<double> pi; // exact target over forests
};

inline ExactKernel exact_kernel(const Graph& g, const PartitionCatalog& cat, PairMethod method, const PopWindow& window,
                                const MeasureParams& params) {
    ExactKernel ek;
    ek.states = enumerate_forests(g, cat);
    const int s = static_cast<int>(ek.states.size());
    for (int x = 0; x < s; ++x) ek.index.emplace(forest_key(ek.states[x]), x);
    ek.k.assign(s, std::vector<double>(s, 0.0));
    std::vector<double> lt(s);
    for (int x = 0; x < s; ++x) {
        lt[x] = detail::oracle_log_target(g, ek.states[x], params);
        auto row = exact_transition(ek.states[x], method, window, g, params);
        for (const auto& [key, prob] : row.kernel) {
            auto it = ek.index.find(key);
            if (it == ek.index.end()) throw Error("kernel leaves the enumerated state space");
            ek.k[x][it->second] += prob;
        }
    }
    ek.pi = normalize_log_weights(lt);
    return ek;
}

} // namespace frcom
