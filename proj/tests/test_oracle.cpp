#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "frcom/oracle.hpp"
#include "frcom/validate.hpp"

using namespace frcom;

TEST(Oracle, SpanningTreeEnumerationCounts) {
    for (auto g : {make_grid(2, 3), make_complete(4), make_cycle(5)}) {
        std::vector<NodeId> all(g.size());
        for (int i = 0; i < g.size(); ++i) all[i] = i;
        auto s = induced_subgraph(g, all);
        EXPECT_EQ(enumerate_spanning_trees(s).size(), brute_count_trees(s));
    }
}

TEST(Oracle, PathOfThreeCatalog) {
    Graph g = make_path(3);
    auto cat = enumerate_partitions(g, 2, {1, 2});
    ASSERT_EQ(cat.partitions.size(), 2u);
    MeasureParams p;
    p.pop_window = {1, 2};
    auto d = exact_distribution(cat, g, p);
    EXPECT_NEAR(d[0], 0.5, 1e-12);
}

TEST(Oracle, EnumeratorsAgree) {
    for (const auto& fx : oracle_fixtures()) {
        auto a = enumerate_partitions(fx.graph, fx.n, fx.window);
        auto b = enumerate_partitions_by_labels(fx.graph, fx.n, fx.window);
        EXPECT_EQ(a.partitions.size(), b.partitions.size()) << fx.name;
    }
    auto g4 = make_grid(4, 4);
    EXPECT_EQ(enumerate_partitions(g4, 2, {8, 8}).partitions.size(), 70u);
    EXPECT_EQ(enumerate_partitions(g4, 4, {4, 4}).partitions.size(), 117u);
    EXPECT_EQ(enumerate_partitions(g4, 8, {2, 2}).partitions.size(), 36u);
}

TEST(Oracle, Guards) {
    EXPECT_THROW(enumerate_partitions_by_labels(make_grid(4, 4), 4, {4, 4}), Error);
    EXPECT_THROW(enumerate_partitions(make_grid(9, 8), 2, {36, 36}), Error);
    EXPECT_TRUE(enumerate_partitions(make_grid(2, 2), 2, {3, 2}).partitions.empty());
}

TEST(Oracle, WeightsFollowTreeCounts) {
    const auto fx = find_fixture("grid2x3-wide");
    auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
    MeasureParams p;
    p.pop_window = fx.window;
    p.gamma = 0.0;
    auto d = exact_distribution(cat, fx.graph, p);
    double total_tau = 0;
    for (const auto& a : cat.partitions) total_tau += std::exp(log_forest_count(fx.graph, a).value);
    for (std::size_t k = 0; k < d.size(); ++k)
        EXPECT_NEAR(d[k], std::exp(log_forest_count(fx.graph, cat.partitions[k]).value) / total_tau, 1e-12);
    EXPECT_EQ(enumerate_forests(fx.graph, cat).size(), static_cast<std::size_t>(std::lround(total_tau)));
}

TEST(Oracle, CatalogRoundTrip) {
    const auto fx = find_fixture("grid2x3-wide");
    auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
    MeasureParams p;
    p.pop_window = fx.window;
    p.compactness_cap = 12.0; // excludes some partitions: -inf weights
    p.w_c = 0.1;
    weigh_catalog(cat, fx.graph, p);
    std::stringstream io;
    write_catalog(io, cat);
    auto back = read_catalog(io);
    ASSERT_EQ(back.partitions.size(), cat.partitions.size());
    for (std::size_t k = 0; k < cat.partitions.size(); ++k) {
        EXPECT_EQ(back.partitions[k].labels, cat.partitions[k].labels);
        if (std::isinf(cat.log_weights[k])) EXPECT_TRUE(std::isinf(back.log_weights[k]));
        else EXPECT_NEAR(back.log_weights[k], cat.log_weights[k], 1e-12);
    }
}

TEST(Oracle, KernelRowsAreStochastic) {
    const auto fx = find_fixture("grid2x3-n3");
    auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
    MeasureParams p;
    p.pop_window = fx.window;
    p.gamma = 0.5;
    auto ek = exact_kernel(fx.graph, cat, PairMethod::UniformNeighbor, fx.window, p);
    for (const auto& row : ek.k) {
        double s = 0;
        for (double x : row) s += x;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Oracle, StationaryVectorIsFixedPoint) {
    const auto fx = find_fixture("grid2x4");
    auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
    MeasureParams p;
    p.pop_window = fx.window;
    p.gamma = 1.0;
    p.w_c = 0.45;
    auto ek = exact_kernel(fx.graph, cat, PairMethod::BoundaryWeighted, fx.window, p);
    const std::size_t s = ek.pi.size();
    double l1 = 0;
    for (std::size_t y = 0; y < s; ++y) {
        double v = 0;
        for (std::size_t x = 0; x < s; ++x) v += ek.pi[x] * ek.k[x][y];
        l1 += std::abs(v - ek.pi[y]);
    }
    EXPECT_LT(l1, 1e-10);
}

TEST(Oracle, ForestKeyIgnoresLabels) {
    Graph g = make_path(3);
    auto a = make_forest(g, {root_tree({0}, {}, g), root_tree({1, 2}, {1}, g)});
    auto b = make_forest(g, {root_tree({1, 2}, {1}, g), root_tree({0}, {}, g)});
    EXPECT_EQ(forest_key(a), forest_key(b));
    EXPECT_EQ(canonical_forest(g, b).assignment.labels, a.assignment.labels);
}
