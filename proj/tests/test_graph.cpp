#include <gtest/gtest.h>

#include <sstream>

#include "frcom/graph.hpp"

using namespace frcom;

TEST(Graph, GridShape) {
    Graph g = make_grid(2, 3);
    EXPECT_EQ(g.size(), 6);
    EXPECT_EQ(g.edge_count(), 7);
    EXPECT_EQ(g.total_pop(), 6);
    EXPECT_EQ(g.node(0).external_perimeter, 2.0);
    EXPECT_EQ(g.node(1).external_perimeter, 1.0);
    EXPECT_NE(g.find_edge(0, 3), -1);
    EXPECT_EQ(g.find_edge(0, 4), -1);
}

TEST(Graph, RejectsBadInput) {
    EXPECT_THROW(Graph({{"a", 1, 0, 0, {}}, {"b", 1, 0, 0, {}}}, {}), Error); // disconnected
    EXPECT_THROW(Graph({{"a", 1, 0, 0, {}}}, {{0, 0, 1}}), Error);           // self-loop
    EXPECT_THROW(Graph({{"a", 1, 0, 0, {}}, {"b", 1, 0, 0, {}}}, {{0, 1, 1}, {1, 0, 1}}), Error);
    EXPECT_THROW(Graph({{"a", -1, 0, 0, {}}}, {}), Error);
}

TEST(Graph, DisconnectedMessage) {
    try {
        Graph({{"a", 1, 0, 0, {}}, {"b", 1, 0, 0, {}}}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("disconnected"), std::string::npos);
    }
}

TEST(Graph, JsonRoundTrip) {
    std::istringstream in(R"({"nodes":[{"id":"x","pop":3,"area":1.5,"external_perimeter":2,
        "votes":{"e":[4,5]}},{"id":7,"pop":2}],"edges":[{"u":"x","v":7,"border_length":0.5}]})");
    Graph g = load_graph(in);
    EXPECT_EQ(g.size(), 2);
    EXPECT_EQ(g.total_pop(), 5);
    EXPECT_EQ(g.node(1).name, "7");
    EXPECT_EQ(g.node(0).votes.at("e").second, 5);
    Graph h = graph_from_json(graph_to_json(g));
    EXPECT_EQ(graph_to_json(h), graph_to_json(g));
}

TEST(Graph, SchemaErrors) {
    EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"nodes":[{"id":"a"}],"edges":[]})")), Error);
    EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"nodes":[{"id":"a","pop":1}],
        "edges":[{"u":"a","v":"zz"}]})")), Error);
    EXPECT_THROW(load_graph_file("/nonexistent/graph.json"), Error);
}

TEST(PopWindow, FromDeviation) {
    EXPECT_EQ(PopWindow::from_deviation(16, 2, 0.05), (PopWindow{8, 8}));
    EXPECT_EQ(PopWindow::from_deviation(100, 2, 0.05), (PopWindow{48, 52}));
    EXPECT_EQ(PopWindow::from_real(1.2, 3.0), (PopWindow{2, 3}));
    EXPECT_TRUE((PopWindow{3, 2}).empty());
}

TEST(Assignment, CanonicalizeOrdersByMinVertex) {
    Graph g = make_path(4);
    Assignment a = make_assignment(g, {1, 1, 0, 0}, 2);
    EXPECT_EQ(canonicalize(a).labels, (std::vector<PartId>{0, 0, 1, 1}));
    EXPECT_THROW(make_assignment(g, {0, 1, 0, 1}, 2), Error); // disconnected parts
}

TEST(Assignment, AdjacencyAndMerge) {
    Graph g = make_grid(2, 3);
    Assignment a = make_assignment(g, {0, 1, 2, 0, 1, 2}, 3);
    auto adj = partition_adjacency(g, a);
    EXPECT_EQ(adj.size(), 2u);
    EXPECT_EQ(adj.at({0, 1}), 2);
    EXPECT_THROW(merged_subgraph(g, a, 0, 2), Error);
    Subgraph m = merged_subgraph(g, a, 1, 2);
    EXPECT_EQ(m.size(), 4);
    EXPECT_TRUE(is_connected(m));
    EXPECT_EQ(partition_weights(g, a), (std::vector<Pop>{2, 2, 2}));
}
