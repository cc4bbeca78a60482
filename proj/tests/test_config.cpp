#include <gtest/gtest.h>

#include "frcom/config.hpp"

using namespace frcom;
using nlohmann::json;

namespace {
const std::string kDir = FRCOM_FIXTURES;
json base() {
    return json::parse(R"({"graph":"p3.json","n":2,"beta":1,"gamma":0,"w_c":0,"pop_window":[1,2],
        "method":"uniform_neighbor","steps":10,"seed":1,"snapshot_every":1})");
}
} // namespace

TEST(Config, LoadsShippedFixtures) {
    auto [cfg, g] = load_chain_config(kDir + "/p3_run.json");
    EXPECT_EQ(g.size(), 3);
    EXPECT_EQ(cfg.params.pop_window, (PopWindow{1, 2}));
    auto [c2, g2] = load_chain_config(kDir + "/grid4x4_run.json");
    EXPECT_EQ(c2.params.pop_window, (PopWindow{8, 8}));
    EXPECT_EQ(c2.method, PairMethod::BoundaryWeighted);
    EXPECT_EQ(c2.chains, 2);
    auto [lc, g3] = load_ladder_config(kDir + "/grid4x4_ladder.json");
    EXPECT_EQ(lc.rungs.size(), 4u);
    EXPECT_TRUE(lc.record_all_rungs);
}

TEST(Config, Errors) {
    auto expect_error = [](json j, const std::string& needle) {
        try {
            chain_config_from_json(j, kDir);
            FAIL() << "accepted " << j.dump();
        } catch (const Error& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    json j = base();
    j["bogus"] = 1;
    expect_error(j, "unknown field 'bogus'");
    j = base();
    j.erase("steps");
    expect_error(j, "missing field 'steps'");
    j = base();
    j["pop_deviation"] = 0.1;
    expect_error(j, "exactly one of pop_window or pop_deviation");
    j = base();
    j["graph"] = "nowhere.json";
    expect_error(j, "graph not found");
    j = base();
    j["n"] = "two";
    expect_error(j, "wrong type");
    j = base();
    j["gamma"] = 2;
    expect_error(j, "gamma");
    EXPECT_THROW(load_chain_config(kDir + "/absent.json"), Error);
}

TEST(Config, LadderNeedsOneRungList) {
    json j = {{"base", base()}, {"swap_every", 5}};
    EXPECT_THROW(ladder_config_from_json(j, kDir), Error);
    j["rungs"] = json::array({{{"gamma", 0}, {"w_c", 0}}, {{"gamma", 1}, {"w_c", 0.2}}});
    auto [cfg, g] = ladder_config_from_json(j, kDir);
    EXPECT_EQ(cfg.rungs.size(), 2u);
    j["linear_rungs"] = {{"count", 3}, {"gamma_max", 1}, {"w_c_max", 0}};
    EXPECT_THROW(ladder_config_from_json(j, kDir), Error);
}
