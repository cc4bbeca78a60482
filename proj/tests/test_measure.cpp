#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "frcom/chain.hpp"
#include "frcom/measure.hpp"
#include "frcom/validate.hpp"

using namespace frcom;

TEST(DistrictStats, TopRowOfTwoByThree) {
    Graph g = make_grid(2, 3);
    auto d = district_stats(g, make_assignment(g, {0, 0, 0, 1, 1, 1}, 2));
    EXPECT_EQ(d[0].pop, 3);
    EXPECT_DOUBLE_EQ(d[0].area, 3.0);
    EXPECT_DOUBLE_EQ(d[0].perimeter, 8.0);
    MeasureParams p;
    p.pop_window = {3, 3};
    p.w_c = 1.0;
    auto s = score(g, make_assignment(g, {0, 0, 0, 1, 1, 1}, 2), p);
    EXPECT_NEAR(s.j_compact, 2 * 64.0 / 3.0, 1e-12);
    EXPECT_TRUE(s.feasible());
}

TEST(DistrictStats, IncrementalMatchesFull) {
    Graph g = make_grid(3, 3);
    Assignment a = make_assignment(g, {0, 0, 1, 0, 2, 1, 2, 2, 1}, 3);
    auto full = district_stats(g, a);
    for (int i = 0; i < 3; ++i) {
        auto m = a.members(i);
        auto d = district_stats(g, m, [&](NodeId v) { return a.labels[v] == i; });
        EXPECT_EQ(d.pop, full[i].pop);
        EXPECT_NEAR(d.perimeter, full[i].perimeter, 1e-12);
        EXPECT_NEAR(d.area, full[i].area, 1e-12);
    }
}

TEST(Score, PopulationWindowIsHard) {
    Graph g = make_grid(2, 3);
    MeasureParams p;
    p.pop_window = {3, 3};
    auto s = score(g, make_assignment(g, {0, 0, 1, 0, 1, 1}, 2), p);
    EXPECT_TRUE(s.feasible());
    s = score(g, make_assignment(g, {0, 0, 1, 0, 0, 1}, 2), p);
    EXPECT_FALSE(s.feasible());
    EXPECT_EQ(log_target(s, 0.0, p), -kInf);
    p.beta = 0.0; // still excluded at beta = 0
    EXPECT_EQ(log_target(s, 0.0, p), -kInf);
}

TEST(Score, CompactnessCap) {
    Graph g = make_grid(1, 3);
    MeasureParams p;
    p.pop_window = {3, 3};
    p.compactness_cap = 20.0; // row has P^2/A = 64/3
    auto s = score(g, make_assignment(g, {0, 0, 0}, 1), p);
    EXPECT_TRUE(s.cap_violated);
    EXPECT_FALSE(s.feasible());
    p.compactness_cap = 22.0;
    EXPECT_TRUE(score(g, make_assignment(g, {0, 0, 0}, 1), p).feasible());
}

TEST(Score, ZeroAreaOnlyMattersWithGeometry) {
    Graph g = make_path(2);
    MeasureParams p;
    p.pop_window = {1, 1};
    EXPECT_NO_THROW(score(g, make_assignment(g, {0, 1}, 2), p));
    p.w_c = 0.5;
    EXPECT_THROW(score(g, make_assignment(g, {0, 1}, 2), p), Error);
}

TEST(Params, Validation) {
    MeasureParams p;
    p.pop_window = {1, 2};
    EXPECT_FALSE(p.validate().has_value());
    p.beta = 2.0;
    EXPECT_TRUE(p.validate().has_value());
    p.gamma = 1.5;
    EXPECT_THROW(p.validate(), Error);
    p.gamma = 0.5;
    p.pop_window = {3, 2};
    EXPECT_THROW(p.validate(), Error);
}

TEST(PolsbyPopper, Examples) {
    Graph g = make_grid(1, 3);
    auto pp = polsby_popper(g, make_assignment(g, {0, 0, 0}, 1));
    EXPECT_NEAR(pp[0], 12 * std::numbers::pi / 64, 1e-12);
    Graph sq = make_grid(1, 1);
    EXPECT_NEAR(polsby_popper(sq, make_assignment(sq, {0}, 1))[0], std::numbers::pi / 4, 1e-12);
    std::vector<DistrictStats> disc{{1, std::numbers::pi, 2 * std::numbers::pi}};
    EXPECT_NEAR(polsby_popper(disc)[0], 1.0, 1e-12);
    EXPECT_THROW(polsby_popper(std::vector<DistrictStats>{{1, 1.0, 0.0}}), Error);
}

// The incremental acceptance must equal the ratio of freshly computed
// targets times the proposal ratio.
TEST(Acceptance, MatchesFullRecomputation) {
    Graph g = make_grid(3, 3);
    MeasureParams p;
    p.pop_window = {3, 3};
    p.gamma = 0.7;
    p.w_c = 0.3;
    p.beta = 0.8;
    RngStream rng(77);
    ChainState st = make_state(g, initial_forest(g, 3, p.pop_window, rng), p, true);
    ChainStats stats;
    int checked = 0;
    for (int k = 0; k < 300; ++k) {
        Proposal prop = propose(st.forest, PairMethod::BoundaryWeighted, p.pop_window, g, rng);
        if (!prop.self_loop) {
            auto trees = st.forest.trees;
            trees[prop.pair.first] = prop.new_trees.first;
            trees[prop.pair.second] = prop.new_trees.second;
            SpanningForest next = make_forest(g, trees);
            const double lt0 = log_target(g, st.forest, part_log_tree_counts(g, st.forest.assignment), p);
            const double lt1 = log_target(g, next, part_log_tree_counts(g, next.assignment), p);
            const double want = std::min(0.0, lt1 - lt0 + log_proposal_ratio(prop));
            EXPECT_NEAR(log_acceptance(st, prop, p, g), want, 1e-9);
            ++checked;
        }
        mh_step(st, p, PairMethod::BoundaryWeighted, g, rng, stats);
    }
    EXPECT_GT(checked, 100);
}

TEST(Acceptance, GammaNeedsTreeCounts) {
    Graph g = make_grid(2, 2);
    MeasureParams p;
    p.pop_window = {2, 2};
    p.gamma = 0.5;
    RngStream rng(1);
    ChainState st = make_state(g, initial_forest(g, 2, p.pop_window, rng), p, false);
    EXPECT_THROW(log_target(st, p), Error);
}
