#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "frcom/observables.hpp"
#include "frcom/oracle.hpp"
#include "frcom/validate.hpp"

using namespace frcom;

namespace {
Graph voting_grid() {
    Graph g = make_grid(2, 3);
    std::vector<NodeRecord> nodes = g.nodes();
    const int a[] = {5, 1, 1, 5, 1, 1}, b[] = {1, 5, 5, 1, 5, 5};
    for (int v = 0; v < 6; ++v) nodes[v].votes["syn"] = {a[v], b[v]};
    return Graph(nodes, g.edges());
}
Graph uniform_votes(int rows, int cols, int va, int vb) {
    Graph g = make_grid(rows, cols);
    std::vector<NodeRecord> nodes = g.nodes();
    for (auto& n : nodes) n.votes["e"] = {va, vb};
    return Graph(nodes, g.edges());
}
} // namespace

TEST(Seats, Examples) {
    Graph g = voting_grid();
    auto s = seats(g, make_assignment(g, {0, 1, 2, 0, 1, 2}, 3), "syn");
    EXPECT_EQ(s.party_a, 1);
    EXPECT_EQ(s.party_b, 2);
    Graph all_a = uniform_votes(1, 3, 10, 0);
    EXPECT_EQ(seats(all_a, make_assignment(all_a, {0, 1, 2}, 3), "e").party_a, 3);
    Graph tied = uniform_votes(1, 3, 4, 4);
    auto t = seats(tied, make_assignment(tied, {0, 1, 2}, 3), "e");
    EXPECT_EQ(t.party_a + t.party_b, 0);
    EXPECT_EQ(t.ties, 3);
    EXPECT_THROW(seats(g, make_assignment(g, {0, 1, 2, 0, 1, 2}, 3), "missing"), Error);
}

TEST(Marginals, SortedSharesAndLabelInvariance) {
    Graph g = voting_grid();
    Assignment cols = make_assignment(g, {0, 0, 1, 0, 1, 1}, 2);
    Assignment swapped = make_assignment(g, {1, 1, 0, 1, 0, 0}, 2);
    auto m1 = ordered_marginals({cols}, g, "syn");
    auto m2 = ordered_marginals({swapped}, g, "syn");
    ASSERT_EQ(m1.size(), 2u);
    EXPECT_EQ(m1[0].bins(), 500);
    EXPECT_EQ(m1[0].counts, m2[0].counts);
    EXPECT_EQ(m1[1].counts, m2[1].counts);
    // shares are 11/18 and 3/18
    EXPECT_EQ(m1[0].counts[static_cast<int>(3.0 / 18 / 0.002)], 1);
    EXPECT_EQ(m1[1].counts[static_cast<int>(11.0 / 18 / 0.002)], 1);
    EXPECT_THROW(ordered_marginals({}, g, "syn"), Error);
}

TEST(TotalVariation, Examples) {
    Histogram a = Histogram::uniform(0, 1, 2), b = Histogram::uniform(0, 1, 2);
    a.add(0.1, 3);
    a.add(0.9, 1);
    b.add(0.1, 1);
    b.add(0.9, 3);
    EXPECT_NEAR(total_variation(a, b), 0.5, 1e-12);
    EXPECT_NEAR(total_variation(a, a), 0.0, 1e-12);
    Histogram c = Histogram::uniform(0, 1, 2), d = Histogram::uniform(0, 1, 2);
    c.add(0.1);
    d.add(0.9);
    EXPECT_NEAR(total_variation(c, d), 1.0, 1e-12);
    EXPECT_THROW(total_variation(a, Histogram::uniform(0, 2, 2)), Error);
}

TEST(TotalVariation, MetricPropertiesOnRandomHistograms) {
    RngStream rng(10);
    for (int rep = 0; rep < 200; ++rep) {
        Histogram h[3] = {Histogram::uniform(0, 1, 6), Histogram::uniform(0, 1, 6), Histogram::uniform(0, 1, 6)};
        for (auto& x : h)
            for (int k = 0; k < 20; ++k) x.add(rng.uniform(), 1 + static_cast<long>(rng.below(5)));
        const double ab = total_variation(h[0], h[1]), ba = total_variation(h[1], h[0]);
        EXPECT_NEAR(ab, ba, 1e-12);
        EXPECT_LE(ab, total_variation(h[0], h[2]) + total_variation(h[2], h[1]) + 1e-12);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
    }
}

TEST(Histogram, MergeAddsCounts) {
    Histogram a = Histogram::uniform(0, 1, 4), b = Histogram::uniform(0, 1, 4);
    a.add(0.1);
    b.add(0.1);
    b.add(2.0); // clamped into the last bin
    a.merge(b);
    EXPECT_EQ(a.total, 3);
    EXPECT_EQ(a.counts[0], 2);
    EXPECT_EQ(a.counts[3], 1);
    EXPECT_THROW(a.merge(Histogram::uniform(0, 1, 3)), Error);
}

TEST(PowerLaw, Fits) {
    std::vector<std::pair<double, double>> s, flat;
    for (int k = 1; k <= 20; ++k) {
        s.push_back({k * 10.0, 3.0 * std::pow(k * 10.0, -0.5)});
        flat.push_back({k * 10.0, 0.2});
    }
    auto f = power_law_fit(s);
    EXPECT_NEAR(f.exponent, 0.5, 1e-9);
    EXPECT_NEAR(f.prefactor, 3.0, 1e-9);
    EXPECT_NEAR(power_law_fit(flat).exponent, 0.0, 1e-12);
    EXPECT_THROW(power_law_fit({{1, 1}, {2, 0}, {3, 1}}), Error);
    EXPECT_THROW(power_law_fit({{1, 1}, {2, 1}}), Error);
}

TEST(PowerLaw, NoisyDecayInObservedRange) {
    RngStream rng(6);
    for (double expo : {0.25, 0.32, 0.52}) {
        std::vector<std::pair<double, double>> s;
        for (double x = 100; x < 1e6; x *= 1.3) s.push_back({x, std::pow(x, -expo) * std::exp(0.05 * (rng.uniform() - 0.5))});
        EXPECT_NEAR(power_law_fit(s).exponent, expo, 0.02);
    }
}

TEST(DecadeSmooth, GeometricMeanPerDecade) {
    auto d = decade_smooth({{1, 1.0}, {5, 0.25}, {10, 0.1}, {50, 0.1}});
    ASSERT_EQ(d.size(), 2u);
    EXPECT_NEAR(d[0].second, 0.5, 1e-12);
    EXPECT_NEAR(d[1].second, 0.1, 1e-12);
}

TEST(ForestCountHistogram, Examples) {
    auto h = forest_count_histogram({1.0, 1.0, 1.0});
    EXPECT_EQ(h.bins(), 1);
    EXPECT_EQ(h.total, 3);
    // P3 catalog: both partitions have ln tau = 0
    Graph p3 = make_path(3);
    auto cat = enumerate_partitions(p3, 2, {1, 2});
    std::vector<double> lt;
    for (const auto& a : cat.partitions) lt.push_back(log_forest_count(p3, a).value);
    auto hp = forest_count_histogram(lt);
    EXPECT_EQ(hp.counts[0], 2);
    // 2x3 catalog against brute force products
    Graph g = make_grid(2, 3);
    auto c2 = enumerate_partitions(g, 2, {2, 4});
    std::vector<double> kir, brute;
    for (const auto& a : c2.partitions) {
        kir.push_back(log_forest_count(g, a).value);
        double b = 1;
        for (int i = 0; i < a.n; ++i) b *= brute_count_trees(induced_subgraph(g, a.members(i)));
        brute.push_back(std::log(b));
    }
    EXPECT_EQ(forest_count_histogram(kir).counts, forest_count_histogram(brute).counts);
    EXPECT_THROW(forest_count_histogram({}), Error);
}

TEST(TvSeries, CheckpointsAndCsv) {
    std::vector<int> keys{0, 1, 0, 1};
    std::map<int, double> exact{{0, 0.5}, {1, 0.5}};
    auto s = tv_series(keys, exact, {1, 2, 4});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_NEAR(s[0].second, 0.5, 1e-12);
    EXPECT_NEAR(s[2].second, 0.0, 1e-12);
    EXPECT_EQ(log_checkpoints(25), (std::vector<long>{1, 2, 5, 10, 20, 25}));
    std::ostringstream out;
    write_series_csv(out, s);
    EXPECT_EQ(out.str().substr(0, 9), "steps,tv\n");
}
