#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace frcom {

using NodeId = int;
using EdgeId = int;
using PartId = int;
using Pop = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NodeRecord {
    std::string name; // id as it appeared in the input
    Pop pop = 0;
    double area = 0.0;
    double external_perimeter = 0.0;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> votes;
};

struct EdgeRecord {
    NodeId u = 0;
    NodeId v = 0;
    double border_length = 1.0;
};

struct Neighbor {
    NodeId node;
    EdgeId edge;
};

/// Immutable, connected, simple undirected graph with dense node and edge ids.
class Graph {
public:
    Graph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
        : nodes_(std::move(nodes)), edges_(std::move(edges)), adj_(nodes_.size()) {
        if (nodes_.empty()) throw Error("graph has no nodes");
        std::map<std::pair<NodeId, NodeId>, EdgeId> seen;
        for (std::size_t v = 0; v < nodes_.size(); ++v) {
            const auto& n = nodes_[v];
            if (n.pop < 0) throw Error("negative population at node '" + n.name + "'");
            if (n.area < 0) throw Error("negative area at node '" + n.name + "'");
            if (n.external_perimeter < 0)
                throw Error("negative external_perimeter at node '" + n.name + "'");
            total_pop_ += n.pop;
        }
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto [u, v, len] = edges_[e];
            if (u < 0 || v < 0 || u >= size() || v >= size())
                throw Error("edge " + std::to_string(e) + " references an unknown node");
            if (u == v) throw Error("self-loop at node '" + nodes_[u].name + "'");
            if (len < 0) throw Error("negative border_length on edge " + std::to_string(e));
            auto key = std::minmax(u, v);
            if (!seen.emplace(key, static_cast<EdgeId>(e)).second)
                throw Error("duplicate edge ('" + nodes_[u].name + "', '" + nodes_[v].name + "')");
            adj_[u].push_back({v, static_cast<EdgeId>(e)});
            adj_[v].push_back({u, static_cast<EdgeId>(e)});
        }
        // connectivity
        std::vector<char> mark(nodes_.size(), 0);
        std::vector<NodeId> stack{0};
        mark[0] = 1;
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            for (auto [y, e] : adj_[x])
                if (!mark[y]) mark[y] = 1, stack.push_back(y);
        }
        for (std::size_t v = 0; v < nodes_.size(); ++v)
            if (!mark[v])
                throw Error("graph is disconnected: node '" + nodes_[v].name +
                            "' is unreachable from '" + nodes_[0].name + "'");
    }

    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
    const NodeRecord& node(NodeId v) const { return nodes_[v]; }
    const EdgeRecord& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<NodeRecord>& nodes() const noexcept { return nodes_; }
    const std::vector<EdgeRecord>& edges() const noexcept { return edges_; }
    const std::vector<Neighbor>& neighbors(NodeId v) const { return adj_[v]; }
    Pop pop(NodeId v) const { return nodes_[v].pop; }
    Pop total_pop() const noexcept { return total_pop_; }

    NodeId other(EdgeId e, NodeId v) const {
        const auto& r = edges_[e];
        return r.u == v ? r.v : r.u;
    }

    /// Edge id joining u and v, or -1.
    EdgeId find_edge(NodeId u, NodeId v) const {
        for (auto [w, e] : adj_[u])
            if (w == v) return e;
        return -1;
    }

private:
    std::vector<NodeRecord> nodes_;
    std::vector<EdgeRecord> edges_;
    std::vector<std::vector<Neighbor>> adj_;
    Pop total_pop_ = 0;
};

// ---------------------------------------------------------------------------
// graph-JSON loading

namespace detail {
inline std::string id_key(const nlohmann::json& id) {
    if (id.is_string()) return id.get<std::string>();
    if (id.is_number_integer()) return std::to_string(id.get<long long>());
    throw Error("malformed schema: node id must be a string or integer, got " + id.dump());
}
} // namespace detail

inline Graph graph_from_json(const nlohmann::json& doc) {
    using nlohmann::json;
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
        throw Error("malformed schema: expected object with a \"nodes\" array");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw Error("malformed schema: expected an \"edges\" array");

    std::vector<NodeRecord> nodes;
    std::unordered_map<std::string, NodeId> index;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object() || !jn.contains("id"))
            throw Error("malformed schema: node without id: " + jn.dump());
        NodeRecord rec;
        rec.name = detail::id_key(jn["id"]);
        if (!jn.contains("pop") || !jn["pop"].is_number_integer())
            throw Error("malformed schema: node '" + rec.name + "' needs an integer pop");
        rec.pop = jn["pop"].get<Pop>();
        if (jn.contains("area")) {
            if (!jn["area"].is_number()) throw Error("malformed schema: area of node '" + rec.name + "'");
            rec.area = jn["area"].get<double>();
        }
        if (jn.contains("external_perimeter")) {
            if (!jn["external_perimeter"].is_number())
                throw Error("malformed schema: external_perimeter of node '" + rec.name + "'");
            rec.external_perimeter = jn["external_perimeter"].get<double>();
        }
        if (jn.contains("votes")) {
            if (!jn["votes"].is_object()) throw Error("malformed schema: votes of node '" + rec.name + "'");
            for (const auto& [election, tally] : jn["votes"].items()) {
                if (!tally.is_array() || tally.size() != 2 || !tally[0].is_number_integer() ||
                    !tally[1].is_number_integer())
                    throw Error("malformed schema: votes['" + election + "'] of node '" + rec.name +
                                "' must be [int, int]");
                rec.votes[election] = {tally[0].get<std::int64_t>(), tally[1].get<std::int64_t>()};
            }
        }
        if (!index.emplace(rec.name, static_cast<NodeId>(nodes.size())).second)
            throw Error("malformed schema: duplicate node id '" + rec.name + "'");
        nodes.push_back(std::move(rec));
    }

    std::vector<EdgeRecord> edges;
    for (const auto& je : doc["edges"]) {
        if (!je.is_object() || !je.contains("u") || !je.contains("v"))
            throw Error("malformed schema: edge needs u and v: " + je.dump());
        auto lookup = [&](const json& id) {
            auto it = index.find(detail::id_key(id));
            if (it == index.end()) throw Error("malformed schema: edge references unknown node " + id.dump());
            return it->second;
        };
        EdgeRecord rec{lookup(je["u"]), lookup(je["v"]), 1.0};
        if (rec.u == rec.v) throw Error("self-loop at node '" + nodes[rec.u].name + "'");
        if (je.contains("border_length")) {
            if (!je["border_length"].is_number()) throw Error("malformed schema: border_length " + je.dump());
            rec.border_length = je["border_length"].get<double>();
        }
        edges.push_back(rec);
    }
    return Graph(std::move(nodes), std::move(edges));
}

inline Graph load_graph(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("malformed schema: ") + e.what());
    }
    return graph_from_json(doc);
}

inline Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("graph not found: " + path);
    return load_graph(in);
}

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
    for (const auto& n : g.nodes()) {
        nlohmann::json jn{{"id", n.name}, {"pop", n.pop}};
        if (n.area != 0) jn["area"] = n.area;
        if (n.external_perimeter != 0) jn["external_perimeter"] = n.external_perimeter;
        if (!n.votes.empty()) {
            nlohmann::json jv = nlohmann::json::object();
            for (const auto& [k, t] : n.votes) jv[k] = {t.first, t.second};
            jn["votes"] = jv;
        }
        nodes.push_back(std::move(jn));
    }
    for (const auto& e : g.edges())
        edges.push_back({{"u", g.node(e.u).name}, {"v", g.node(e.v).name}, {"border_length", e.border_length}});
    return {{"nodes", nodes}, {"edges", edges}};
}

// ---------------------------------------------------------------------------
// synthetic fixtures

/// rows x cols lattice of unit squares, node id r*cols+c, unit populations.
/// Boundary squares carry the outer sides as external perimeter.
inline Graph make_grid(int rows, int cols) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int outer = (r == 0) + (r == rows - 1) + (c == 0) + (c == cols - 1);
            nodes.push_back({std::to_string(r * cols + c), 1, 1.0, static_cast<double>(outer), {}});
        }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) edges.push_back({v, v + 1, 1.0});
            if (r + 1 < rows) edges.push_back({v, v + cols, 1.0});
        }
    return Graph(std::move(nodes), std::move(edges));
}

inline Graph make_path(int n) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i) nodes.push_back({std::to_string(i), 1, 0.0, 0.0, {}});
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return Graph(std::move(nodes), std::move(edges));
}

inline Graph make_cycle(int n) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i) nodes.push_back({std::to_string(i), 1, 0.0, 0.0, {}});
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return Graph(std::move(nodes), std::move(edges));
}

inline Graph make_complete(int n) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i) nodes.push_back({std::to_string(i), 1, 0.0, 0.0, {}});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    return Graph(std::move(nodes), std::move(edges));
}

// ---------------------------------------------------------------------------
// population window

/// Inclusive integer population bounds. May be empty (lo > hi).
struct PopWindow {
    Pop lo = 0;
    Pop hi = 0;

    bool contains(Pop p) const noexcept { return lo <= p && p <= hi; }
    bool empty() const noexcept { return lo > hi; }

    /// Integers inside the real interval [lo, hi].
    static PopWindow from_real(double lo, double hi) {
        return {static_cast<Pop>(std::ceil(lo - 1e-9)), static_cast<Pop>(std::floor(hi + 1e-9))};
    }

    /// [ideal(1-f), ideal(1+f)] with ideal = total/n, rounded inward.
    static PopWindow from_deviation(Pop total, int n, double f) {
        if (n < 1) throw Error("partition count must be positive");
        if (f < 0) throw Error("population deviation must be nonnegative");
        const long double ideal = static_cast<long double>(total) / n;
        const long double eps = 1e-9L * std::max<long double>(1.0L, ideal);
        return {static_cast<Pop>(std::ceil(ideal * (1 - f) - eps)),
                static_cast<Pop>(std::floor(ideal * (1 + f) + eps))};
    }

    friend bool operator==(const PopWindow&, const PopWindow&) = default;
};

// ---------------------------------------------------------------------------
// subgraphs

struct LocalEdge {
    int a;
    int b;
    EdgeId id; // global edge id
};

/// Induced subgraph with a stable local <-> global node mapping.
struct Subgraph {
    std::vector<NodeId> nodes;                     // local -> global, ascending
    std::unordered_map<NodeId, int> local;         // global -> local
    std::vector<LocalEdge> edges;
    std::vector<std::vector<std::pair<int, int>>> adj; // local: (neighbor, local edge index)

    int size() const noexcept { return static_cast<int>(nodes.size()); }
    int edge_count() const noexcept { return static_cast<int>(edges.size()); }
    bool contains(NodeId v) const { return local.count(v) != 0; }
};

inline Subgraph induced_subgraph(const Graph& g, std::vector<NodeId> vertices) {
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    Subgraph s;
    s.nodes = std::move(vertices);
    s.adj.resize(s.nodes.size());
    for (int i = 0; i < s.size(); ++i) s.local.emplace(s.nodes[i], i);
    for (int i = 0; i < s.size(); ++i)
        for (auto [w, e] : g.neighbors(s.nodes[i])) {
            auto it = s.local.find(w);
            if (it == s.local.end() || it->second < i) continue;
            int k = s.edge_count();
            s.edges.push_back({i, it->second, e});
            s.adj[i].push_back({it->second, k});
            s.adj[it->second].push_back({i, k});
        }
    return s;
}

inline bool is_connected(const Subgraph& s) {
    if (s.size() == 0) return false;
    std::vector<char> mark(s.nodes.size(), 0);
    std::vector<int> stack{0};
    mark[0] = 1;
    int seen = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (auto [y, k] : s.adj[x])
            if (!mark[y]) mark[y] = 1, ++seen, stack.push_back(y);
    }
    return seen == s.size();
}

// ---------------------------------------------------------------------------
// assignments

/// Node -> partition labelling with every part nonempty and connected.
struct Assignment {
    std::vector<PartId> labels;
    int n = 0;

    std::vector<NodeId> members(PartId i) const {
        std::vector<NodeId> out;
        for (std::size_t v = 0; v < labels.size(); ++v)
            if (labels[v] == i) out.push_back(static_cast<NodeId>(v));
        return out;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

inline void check_assignment(const Graph& g, const Assignment& a) {
    if (static_cast<int>(a.labels.size()) != g.size())
        throw Error("assignment has " + std::to_string(a.labels.size()) + " labels for " +
                    std::to_string(g.size()) + " nodes");
    if (a.n < 1) throw Error("assignment needs at least one partition");
    std::vector<int> used(a.n, 0);
    for (auto l : a.labels) {
        if (l < 0 || l >= a.n) throw Error("label " + std::to_string(l) + " out of range");
        used[l] = 1;
    }
    for (int i = 0; i < a.n; ++i) {
        if (!used[i]) throw Error("partition " + std::to_string(i) + " is empty");
        if (!is_connected(induced_subgraph(g, a.members(i))))
            throw Error("partition " + std::to_string(i) + " is disconnected");
    }
}

inline Assignment make_assignment(const Graph& g, std::vector<PartId> labels, int n) {
    Assignment a{std::move(labels), n};
    check_assignment(g, a);
    return a;
}

/// Relabel so parts are numbered by their smallest node id, ascending.
inline Assignment canonicalize(const Assignment& a) {
    std::vector<PartId> remap(a.n, -1);
    int next = 0;
    Assignment out{a.labels, a.n};
    for (auto& l : out.labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    return out;
}

inline Pop partition_weight(const Graph& g, const Assignment& a, PartId i) {
    if (i < 0 || i >= a.n) throw Error("partition id " + std::to_string(i) + " out of range");
    Pop s = 0;
    for (std::size_t v = 0; v < a.labels.size(); ++v)
        if (a.labels[v] == i) s += g.pop(static_cast<NodeId>(v));
    return s;
}

inline std::vector<Pop> partition_weights(const Graph& g, const Assignment& a) {
    std::vector<Pop> w(a.n, 0);
    for (std::size_t v = 0; v < a.labels.size(); ++v) w[a.labels[v]] += g.pop(static_cast<NodeId>(v));
    return w;
}

using PartitionAdjacency = std::map<std::pair<PartId, PartId>, int>;

/// Crossing-edge counts for every adjacent unordered pair (i < j).
inline PartitionAdjacency partition_adjacency(const Graph& g, const std::vector<PartId>& labels) {
    PartitionAdjacency out;
    for (const auto& e : g.edges()) {
        PartId a = labels[e.u], b = labels[e.v];
        if (a != b) ++out[std::minmax(a, b)];
    }
    return out;
}

inline PartitionAdjacency partition_adjacency(const Graph& g, const Assignment& a) {
    return partition_adjacency(g, a.labels);
}

inline Subgraph merged_subgraph(const Graph& g, const Assignment& a, PartId i, PartId j) {
    if (i == j || i < 0 || j < 0 || i >= a.n || j >= a.n)
        throw Error("invalid partition pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    std::vector<NodeId> verts;
    bool crossing = false;
    for (std::size_t v = 0; v < a.labels.size(); ++v)
        if (a.labels[v] == i || a.labels[v] == j) verts.push_back(static_cast<NodeId>(v));
    for (const auto& e : g.edges()) {
        PartId x = a.labels[e.u], y = a.labels[e.v];
        if ((x == i && y == j) || (x == j && y == i)) {
            crossing = true;
            break;
        }
    }
    if (!crossing)
        throw Error("partitions " + std::to_string(i) + " and " + std::to_string(j) + " are not adjacent");
    return induced_subgraph(g, std::move(verts));
}

} // namespace frcom
