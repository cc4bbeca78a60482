#include <gtest/gtest.h>

#include <map>

#include "frcom/forest.hpp"
#include "frcom/oracle.hpp"
#include "frcom/ust.hpp"
#include "frcom/validate.hpp"

using namespace frcom;

namespace {
Subgraph whole(const Graph& g) {
    std::vector<NodeId> v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = i;
    return induced_subgraph(g, v);
}
} // namespace

TEST(Wilson, ProducesSpanningTrees) {
    Graph g = make_grid(3, 4);
    RngStream rng(3);
    for (int k = 0; k < 50; ++k) {
        auto edges = wilson_ust(whole(g), rng);
        ASSERT_EQ(static_cast<int>(edges.size()), g.size() - 1);
        std::vector<NodeId> all(g.size());
        for (int i = 0; i < g.size(); ++i) all[i] = i;
        EXPECT_NO_THROW(root_tree(all, edges, g));
        EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
    }
}

TEST(Wilson, SingleVertex) {
    Graph g = make_path(3);
    RngStream rng(1);
    EXPECT_TRUE(wilson_ust(induced_subgraph(g, {1}), rng).empty());
}

TEST(Wilson, DisconnectedSubgraphIsAnError) {
    Graph g = make_path(3);
    RngStream rng(1);
    EXPECT_THROW(wilson_ust(induced_subgraph(g, {0, 2}), rng), Error);
}

TEST(Wilson, DeterministicForSeed) {
    Graph g = make_grid(3, 3);
    RngStream a(8), b(8);
    for (int k = 0; k < 20; ++k) EXPECT_EQ(wilson_ust(whole(g), a), wilson_ust(whole(g), b));
}

TEST(Wilson, UniformOnK4) {
    Graph g = make_complete(4);
    const Subgraph s = whole(g);
    std::map<std::vector<EdgeId>, int> idx;
    for (auto t : enumerate_spanning_trees(s)) {
        std::sort(t.begin(), t.end());
        idx.emplace(t, static_cast<int>(idx.size()));
    }
    ASSERT_EQ(idx.size(), 16u);
    std::vector<long> counts(16, 0);
    RngStream rng(99);
    for (int k = 0; k < 32000; ++k) ++counts[idx.at(wilson_ust(s, rng))];
    EXPECT_GT(chi_square_pvalue(counts, std::vector<double>(16, 1.0 / 16)), 0.001);
}

TEST(LoopErasedWalk, PathEndsInTargetsWithoutRepeats) {
    Graph g = make_grid(3, 3);
    RngStream rng(4);
    const Subgraph s = whole(g);
    for (int k = 0; k < 100; ++k) {
        auto path = loop_erased_walk(s, 0, {8}, rng);
        ASSERT_GE(path.size(), 5u);
        EXPECT_EQ(path.front(), 0);
        EXPECT_EQ(path.back(), 8);
        std::set<NodeId> uniq(path.begin(), path.end());
        EXPECT_EQ(uniq.size(), path.size());
        for (std::size_t i = 0; i + 1 < path.size(); ++i) EXPECT_NE(g.find_edge(path[i], path[i + 1]), -1);
    }
}

TEST(LoopErasedWalk, Errors) {
    Graph g = make_path(4);
    RngStream rng(4);
    EXPECT_THROW(loop_erased_walk(whole(g), 0, {0}, rng), Error);
    EXPECT_THROW(loop_erased_walk(induced_subgraph(g, {0, 1, 3}), 0, {3}, rng), Error);
    EXPECT_THROW(loop_erased_walk(induced_subgraph(g, {0, 1}), 0, {3}, rng), Error);
}
