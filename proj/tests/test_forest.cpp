#include <gtest/gtest.h>

#include <algorithm>

#include "frcom/forest.hpp"
#include "frcom/oracle.hpp"
#include "frcom/validate.hpp"

using namespace frcom;

namespace {
std::vector<NodeId> iota_nodes(int n) {
    std::vector<NodeId> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}
std::vector<EdgeId> all_edges(const Graph& g) {
    std::vector<EdgeId> e(g.edge_count());
    for (int i = 0; i < g.edge_count(); ++i) e[i] = i;
    return e;
}
std::vector<EdgeId> sorted(std::vector<EdgeId> v) {
    std::sort(v.begin(), v.end());
    return v;
}
} // namespace

TEST(Tree, RootingAndSubtreePops) {
    Graph g = make_path(4);
    Tree t = root_tree(iota_nodes(4), all_edges(g), g);
    EXPECT_EQ(t.root, 0);
    EXPECT_EQ(t.total, 4);
    EXPECT_EQ(t.subtree_pop(0), 3); // edge 0-1
    EXPECT_EQ(t.subtree_pop(2), 1); // edge 2-3
    EXPECT_THROW(t.subtree_pop(7), Error);
}

TEST(Tree, RejectsNonTrees) {
    Graph g = make_cycle(4);
    EXPECT_THROW(root_tree(iota_nodes(4), all_edges(g), g), Error);
    EXPECT_THROW(root_tree(iota_nodes(4), {0, 1}, g), Error);
}

TEST(Tree, CutEdgesOnPath) {
    Graph g = make_path(3);
    Tree t = root_tree(iota_nodes(3), all_edges(g), g);
    EXPECT_EQ(sorted(find_cut_edges(t, {1, 2})), (std::vector<EdgeId>{0, 1}));
    EXPECT_TRUE(find_cut_edges(t, {0, 0}).empty());
    Graph p4 = make_path(4);
    Tree t4 = root_tree(iota_nodes(4), all_edges(p4), p4);
    EXPECT_EQ(find_cut_edges(t4, {2, 2}), (std::vector<EdgeId>{1}));
}

TEST(Tree, SplitOrdersByMinVertex) {
    Graph g = make_path(5);
    Tree t = root_tree(iota_nodes(5), all_edges(g), g, 4);
    auto [a, b] = split_tree(t, 1, g); // edge 1-2
    EXPECT_EQ(a.vertices, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(b.vertices, (std::vector<NodeId>{2, 3, 4}));
    EXPECT_EQ(b.total, 3);
    EXPECT_THROW(split_tree(t, 9, g), Error);
}

// Walking away from the joining vertex, a cut far from the join can be
// valid even when the nearer ones are too heavy.
TEST(JoinedCuts, DoesNotStopAtFirstHeavyEdge) {
    Graph g = make_path(6);
    Tree ti = root_tree({0, 1, 2, 3, 4}, {0, 1, 2, 3}, g);
    Tree tj = root_tree({5}, {}, g);
    const EdgeId e = g.find_edge(4, 5);
    auto cuts = joined_cut_edges(ti, tj, e, g, {3, 3});
    EXPECT_EQ(cuts, (std::vector<EdgeId>{g.find_edge(2, 3)}));
    EXPECT_EQ(sorted(cuts), sorted(find_cut_edges(join_trees(ti, tj, e, g), {3, 3})));
}

TEST(JoinedCuts, MatchesExplicitJoinOnRandomGraphs) {
    RngStream rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        Graph g = random_connected_graph(7, 0.3, rng);
        std::vector<Pop> pops;
        for (int v = 0; v < g.size(); ++v) pops.push_back(1 + static_cast<Pop>(rng.below(3)));
        g = with_pops(g, pops);
        // random connected bipartition via a random spanning tree cut
        std::vector<NodeId> all = iota_nodes(g.size());
        Tree t = root_tree(all, wilson_ust(induced_subgraph(g, all), rng), g);
        const EdgeId cut = t.edges[rng.below(t.edges.size())];
        auto [ti, tj] = split_tree(t, cut, g);
        for (Pop lo = 0; lo <= g.total_pop(); ++lo)
            for (Pop hi = lo; hi <= g.total_pop(); ++hi) {
                const PopWindow w{lo, hi};
                for (NodeId v : ti.vertices)
                    for (auto [u, e] : g.neighbors(v)) {
                        if (!tj.contains(u)) continue;
                        ASSERT_EQ(sorted(joined_cut_edges(ti, tj, e, g, w)),
                                  sorted(find_cut_edges(join_trees(ti, tj, e, g), w)));
                    }
            }
    }
}

TEST(Forest, MakeAndCheck) {
    Graph g = make_grid(2, 2);
    Tree a = root_tree({0, 1}, {g.find_edge(0, 1)}, g);
    Tree b = root_tree({2, 3}, {g.find_edge(2, 3)}, g);
    SpanningForest f = make_forest(g, {a, b});
    EXPECT_EQ(f.assignment.labels, (std::vector<PartId>{0, 0, 1, 1}));
    EXPECT_NO_THROW(check_forest(g, f));
    EXPECT_THROW(make_forest(g, {a}), Error);
    EXPECT_THROW(make_forest(g, {a, a}), Error);
    f.trees[0].below[0] += 1;
    EXPECT_THROW(check_forest(g, f), Error);
}
