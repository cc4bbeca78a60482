#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace frcom {

/// A spanning tree of a vertex set, oriented toward a root.
///
/// Per-vertex arrays are indexed by position in `vertices` (ascending node
/// ids). `below[x]` is the population of the subtree hanging from x, which is
/// also the size of x's parent edge.
struct Tree {
    std::vector<NodeId> vertices;
    std::vector<EdgeId> edges; // ascending
    NodeId root = -1;
    std::unordered_map<NodeId, int> index;
    std::vector<int> parent;        // -1 at the root
    std::vector<EdgeId> parent_edge; // -1 at the root
    std::vector<std::vector<int>> children;
    std::vector<Pop> below;
    std::vector<int> order; // root first, every parent before its children
    Pop total = 0;

    int size() const noexcept { return static_cast<int>(vertices.size()); }
    bool contains(NodeId v) const { return index.count(v) != 0; }
    int pos(NodeId v) const { return index.at(v); }
    NodeId min_vertex() const { return vertices.front(); }

    /// Population strictly below edge e (on the side away from the root).
    Pop subtree_pop(EdgeId e) const {
        for (int x = 0; x < size(); ++x)
            if (parent_edge[x] == e) return below[x];
        throw Error("edge " + std::to_string(e) + " is not in the tree");
    }

    bool has_edge(EdgeId e) const { return std::binary_search(edges.begin(), edges.end(), e); }

    /// Trees are compared by vertex and edge sets; rooting is derived data.
    friend bool operator==(const Tree& a, const Tree& b) {
        return a.vertices == b.vertices && a.edges == b.edges;
    }
};

/// Orient the tree on (vertices, edges) toward `root` and accumulate subtree
/// populations from the leaves back up. O(|V|).
inline Tree root_tree(std::vector<NodeId> vertices, std::vector<EdgeId> edges, const Graph& g, NodeId root) {
    Tree t;
    std::sort(vertices.begin(), vertices.end());
    std::sort(edges.begin(), edges.end());
    t.vertices = std::move(vertices);
    t.edges = std::move(edges);
    t.root = root;
    const int n = t.size();
    for (int i = 0; i < n; ++i) t.index.emplace(t.vertices[i], i);
    if (!t.contains(root)) throw Error("root " + std::to_string(root) + " is not in the vertex set");
    if (static_cast<int>(t.edges.size()) != n - 1)
        throw Error("edge set is not a tree: " + std::to_string(t.edges.size()) + " edges on " +
                    std::to_string(n) + " vertices");

    std::vector<std::vector<std::pair<int, EdgeId>>> adj(n);
    for (EdgeId e : t.edges) {
        const auto& r = g.edge(e);
        auto iu = t.index.find(r.u), iv = t.index.find(r.v);
        if (iu == t.index.end() || iv == t.index.end())
            throw Error("tree edge " + std::to_string(e) + " leaves the vertex set");
        adj[iu->second].push_back({iv->second, e});
        adj[iv->second].push_back({iu->second, e});
    }

    t.parent.assign(n, -1);
    t.parent_edge.assign(n, -1);
    t.children.assign(n, {});
    t.below.assign(n, 0);
    t.order.reserve(n);
    std::vector<char> seen(n, 0);
    int r = t.pos(root);
    seen[r] = 1;
    t.order.push_back(r);
    for (std::size_t head = 0; head < t.order.size(); ++head) {
        int x = t.order[head];
        for (auto [y, e] : adj[x]) {
            if (y == t.parent[x] && e == t.parent_edge[x]) continue;
            if (seen[y]) throw Error("edge set has a cycle");
            seen[y] = 1;
            t.parent[y] = x;
            t.parent_edge[y] = e;
            t.children[x].push_back(y);
            t.order.push_back(y);
        }
    }
    if (static_cast<int>(t.order.size()) != n) throw Error("edge set is disconnected");

    for (int k = n - 1; k >= 0; --k) {
        int x = t.order[k];
        t.below[x] += g.pop(t.vertices[x]);
        if (t.parent[x] >= 0) t.below[t.parent[x]] += t.below[x];
    }
    t.total = t.below[r];
    return t;
}

/// Rooted at the smallest vertex id.
inline Tree root_tree(std::vector<NodeId> vertices, std::vector<EdgeId> edges, const Graph& g) {
    if (vertices.empty()) throw Error("tree has no vertices");
    NodeId r = *std::min_element(vertices.begin(), vertices.end());
    return root_tree(std::move(vertices), std::move(edges), g, r);
}

/// Edges whose removal leaves both pieces inside the window.
inline std::vector<EdgeId> find_cut_edges(const Tree& t, Pop total_pop, const PopWindow& window) {
    std::vector<EdgeId> out;
    for (int x = 0; x < t.size(); ++x) {
        if (t.parent[x] < 0) continue;
        Pop s = t.below[x];
        if (window.contains(s) && window.contains(total_pop - s)) out.push_back(t.parent_edge[x]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<EdgeId> find_cut_edges(const Tree& t, const PopWindow& window) {
    return find_cut_edges(t, t.total, window);
}

namespace detail {

// Walk outward from `start` inside t. Moving away from the joining edge only
// shrinks the far side, so a branch is dropped once the far side falls below
// what the window allows; too-large far sides keep walking.
inline void collect_joined_cuts(const Tree& t, NodeId start, Pop joined_total, const PopWindow& w,
                                std::vector<EdgeId>& out) {
    const Pop lower = std::max(w.lo, joined_total - w.hi);
    const Pop upper = std::min(w.hi, joined_total - w.lo);
    if (lower > upper) return;
    struct Step {
        int to;
        int from;
    };
    std::vector<Step> stack;
    auto push_neighbors = [&](int x, int from) {
        if (t.parent[x] >= 0 && t.parent[x] != from) stack.push_back({t.parent[x], x});
        for (int c : t.children[x])
            if (c != from) stack.push_back({c, x});
    };
    push_neighbors(t.pos(start), -1);
    while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        const bool down = t.parent[y] == x;
        const Pop far = down ? t.below[y] : t.total - t.below[x];
        if (far < lower) continue;
        if (far <= upper) out.push_back(down ? t.parent_edge[y] : t.parent_edge[x]);
        push_neighbors(y, x);
    }
}

} // namespace detail

/// Cut set of the tree formed by joining t_i and t_j through edge e, computed
/// from the two trees' existing subtree populations without re-rooting.
inline std::vector<EdgeId> joined_cut_edges(const Tree& ti, const Tree& tj, EdgeId e, const Graph& g,
                                            const PopWindow& window) {
    const auto& r = g.edge(e);
    NodeId a, b;
    if (ti.contains(r.u) && tj.contains(r.v))
        a = r.u, b = r.v;
    else if (ti.contains(r.v) && tj.contains(r.u))
        a = r.v, b = r.u;
    else
        throw Error("edge " + std::to_string(e) + " does not connect the two trees");

    const Pop total = ti.total + tj.total;
    std::vector<EdgeId> out;
    if (window.contains(ti.total) && window.contains(tj.total)) out.push_back(e);
    detail::collect_joined_cuts(ti, a, total, window, out);
    detail::collect_joined_cuts(tj, b, total, window, out);
    std::sort(out.begin(), out.end());
    return out;
}

/// The explicit joined tree T_i + T_j + e, rooted at its smallest vertex.
inline Tree join_trees(const Tree& ti, const Tree& tj, EdgeId e, const Graph& g) {
    std::vector<NodeId> verts = ti.vertices;
    verts.insert(verts.end(), tj.vertices.begin(), tj.vertices.end());
    std::vector<EdgeId> edges = ti.edges;
    edges.insert(edges.end(), tj.edges.begin(), tj.edges.end());
    edges.push_back(e);
    return root_tree(std::move(verts), std::move(edges), g);
}

/// Remove `cut` from t. The piece holding t's smallest vertex comes first;
/// both pieces are re-rooted at their own smallest vertex.
inline std::pair<Tree, Tree> split_tree(const Tree& t, EdgeId cut, const Graph& g) {
    int child = -1;
    for (int x = 0; x < t.size(); ++x)
        if (t.parent_edge[x] == cut) child = x;
    if (child < 0) throw Error("cut edge " + std::to_string(cut) + " is not in the tree");

    std::vector<char> inside(t.size(), 0);
    std::vector<int> stack{child};
    inside[child] = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int c : t.children[x]) inside[c] = 1, stack.push_back(c);
    }
    std::vector<NodeId> va, vb;
    std::vector<EdgeId> ea, eb;
    for (int x = 0; x < t.size(); ++x) {
        (inside[x] ? vb : va).push_back(t.vertices[x]);
        if (t.parent_edge[x] >= 0 && t.parent_edge[x] != cut)
            (inside[x] ? eb : ea).push_back(t.parent_edge[x]);
    }
    Tree first = root_tree(std::move(va), std::move(ea), g);
    Tree second = root_tree(std::move(vb), std::move(eb), g);
    if (second.min_vertex() < first.min_vertex()) std::swap(first, second);
    return {std::move(first), std::move(second)};
}

/// Chain state: one rooted spanning tree per partition.
struct SpanningForest {
    std::vector<Tree> trees;
    Assignment assignment;

    int parts() const noexcept { return static_cast<int>(trees.size()); }
};

/// Assemble a forest from trees indexed by partition id, checking that the
/// vertex sets partition V and each tree is a spanning tree of its part.
inline SpanningForest make_forest(const Graph& g, std::vector<Tree> trees) {
    SpanningForest f;
    f.assignment.n = static_cast<int>(trees.size());
    f.assignment.labels.assign(g.size(), -1);
    for (std::size_t i = 0; i < trees.size(); ++i)
        for (NodeId v : trees[i].vertices) {
            if (f.assignment.labels[v] != -1)
                throw Error("node " + std::to_string(v) + " belongs to two trees");
            f.assignment.labels[v] = static_cast<PartId>(i);
        }
    for (NodeId v = 0; v < g.size(); ++v)
        if (f.assignment.labels[v] == -1) throw Error("node " + std::to_string(v) + " is not covered");
    f.trees = std::move(trees);
    return f;
}

/// Throws if any forest invariant is broken.
inline void check_forest(const Graph& g, const SpanningForest& f) {
    if (f.assignment.n != f.parts()) throw Error("forest/assignment partition count mismatch");
    check_assignment(g, f.assignment);
    for (int i = 0; i < f.parts(); ++i) {
        const Tree& t = f.trees[i];
        if (t.vertices != f.assignment.members(i))
            throw Error("tree " + std::to_string(i) + " does not match its partition");
        Tree fresh = root_tree(t.vertices, t.edges, g, t.root);
        if (fresh.below != t.below) throw Error("stale subtree populations in tree " + std::to_string(i));
    }
}

} // namespace frcom
