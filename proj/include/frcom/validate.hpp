#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "chain.hpp"
#include "observables.hpp"
#include "oracle.hpp"

namespace frcom {

// ---------------------------------------------------------------------------
// fixtures

/// Copy of `g` with node populations replaced.
inline Graph with_pops(const Graph& g, const std::vector<Pop>& pops) {
    if (static_cast<int>(pops.size()) != g.size()) throw Error("population list does not match node count");
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (NodeId v = 0; v < g.size(); ++v) {
        nodes.push_back(g.node(v));
        nodes.back().pop = pops[v];
    }
    for (EdgeId e = 0; e < g.edge_count(); ++e) edges.push_back(g.edge(e));
    return Graph(std::move(nodes), std::move(edges));
}

/// Copy of `g` where every node is a unit cell with one unit of outer boundary.
inline Graph with_unit_geometry(const Graph& g) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (NodeId v = 0; v < g.size(); ++v) {
        nodes.push_back(g.node(v));
        nodes.back().area = 1.0;
        nodes.back().external_perimeter = 1.0;
    }
    for (EdgeId e = 0; e < g.edge_count(); ++e) edges.push_back(g.edge(e));
    return Graph(std::move(nodes), std::move(edges));
}

/// Connected graph on `nodes` vertices: a random tree plus each remaining
/// pair with probability `extra`.
inline Graph random_connected_graph(int nodes, double extra, RngStream& rng) {
    std::vector<NodeRecord> recs;
    for (int v = 0; v < nodes; ++v) recs.push_back({std::to_string(v), 1, 1.0, 1.0, {}});
    std::vector<std::vector<char>> has(nodes, std::vector<char>(nodes, 0));
    std::vector<EdgeRecord> edges;
    for (int v = 1; v < nodes; ++v) {
        int u = static_cast<int>(rng.below(v));
        has[u][v] = has[v][u] = 1;
        edges.push_back({u, v, 1.0});
    }
    for (int u = 0; u < nodes; ++u)
        for (int v = u + 1; v < nodes; ++v)
            if (!has[u][v] && rng.uniform() < extra) edges.push_back({u, v, 1.0});
    return Graph(std::move(recs), std::move(edges));
}

struct OracleFixture {
    std::string name;
    Graph graph;
    int n = 2;
    PopWindow window;
};

inline std::vector<OracleFixture> oracle_fixtures() {
    std::vector<OracleFixture> f;
    f.push_back({"p3", make_grid(1, 3), 2, {1, 2}});
    f.push_back({"c4", make_grid(2, 2), 2, {2, 2}});
    f.push_back({"c4-wide", make_grid(2, 2), 2, {1, 3}});
    f.push_back({"k4", with_unit_geometry(make_complete(4)), 2, {2, 2}});
    f.push_back({"grid2x3", make_grid(2, 3), 2, {3, 3}});
    f.push_back({"grid2x3-wide", make_grid(2, 3), 2, {2, 4}});
    f.push_back({"grid2x3-n3", make_grid(2, 3), 3, {2, 2}});
    f.push_back({"grid2x4", make_grid(2, 4), 2, {4, 4}});
    f.push_back({"grid2x3-weighted", with_pops(make_grid(2, 3), {1, 2, 3, 3, 2, 1}), 2, {5, 7}});
    return f;
}

inline OracleFixture find_fixture(const std::string& name) {
    for (auto& f : oracle_fixtures())
        if (f.name == name) return f;
    throw Error("unknown fixture '" + name + "'");
}

/// 4x4 unit grid split in two at 5% deviation.
inline OracleFixture grid4x4_fixture() {
    Graph g = make_grid(4, 4);
    PopWindow w = PopWindow::from_deviation(g.total_pop(), 2, 0.05);
    return {"grid4x4", std::move(g), 2, w};
}

// ---------------------------------------------------------------------------
// statistics helpers

/// Upper tail probability of the chi-square statistic for observed counts
/// against expected probabilities (df = cells - 1).
inline double chi_square_pvalue(const std::vector<long>& observed, const std::vector<double>& probs,
                                double* stat_out = nullptr) {
    if (observed.size() != probs.size() || observed.size() < 2) throw Error("chi-square needs at least two cells");
    const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
    double stat = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double e = total * probs[k];
        if (!(e > 0)) throw Error("chi-square cell with zero expectation");
        stat += (observed[k] - e) * (observed[k] - e) / e;
    }
    if (stat_out) *stat_out = stat;
    const double df = static_cast<double>(observed.size() - 1);
    return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

inline long scaled(long count, double scale) { return std::max(1L, std::lround(count * scale)); }

// ---------------------------------------------------------------------------
// suite plumbing

struct SuiteOptions {
    std::uint64_t seed = 20240611;
    double scale = 1.0;             // multiplies trial and step counts
    bool corrupt_tau_cache = false; // test hook for the coherence suite
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Suite {
    std::string name;
    std::string description;
    std::function<SuiteResult(const SuiteOptions&)> run;
};

namespace detail {

class Report {
public:
    explicit Report(std::string name) : name_(std::move(name)) {}
    void check(bool ok, const std::string& what) {
        if (!ok) {
            ok_ = false;
            if (failures_++ < 8) out_ << "FAIL " << what << "; ";
        }
    }
    void note(const std::string& s) { out_ << s << "; "; }
    SuiteResult finish() {
        if (failures_ > 8) out_ << "(" << failures_ - 8 << " more failures)";
        std::string d = out_.str();
        while (!d.empty() && (d.back() == ' ' || d.back() == ';')) d.pop_back();
        return {name_, ok_, d, 0.0};
    }
    bool ok() const { return ok_; }

private:
    std::string name_;
    std::ostringstream out_;
    bool ok_ = true;
    int failures_ = 0;
};

inline std::string fmt(double x, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

inline std::vector<EdgeId> sorted(std::vector<EdgeId> v) {
    std::sort(v.begin(), v.end());
    return v;
}

/// Every connected induced vertex set of size >= 2 (graphs up to 20 nodes).
inline std::vector<std::vector<NodeId>> connected_subsets(const Graph& g) {
    if (g.size() > 20) throw Error("subset enumeration limited to 20 nodes");
    std::vector<std::vector<NodeId>> out;
    for (std::uint32_t mask = 1; mask < (1u << g.size()); ++mask) {
        if (std::popcount(mask) < 2) continue;
        std::vector<NodeId> vs;
        for (NodeId v = 0; v < g.size(); ++v)
            if (mask >> v & 1u) vs.push_back(v);
        if (is_connected(induced_subgraph(g, vs))) out.push_back(std::move(vs));
    }
    return out;
}

inline std::vector<Tree> all_trees(const Graph& g, const std::vector<NodeId>& vs) {
    std::vector<Tree> out;
    for (auto& edges : enumerate_spanning_trees(induced_subgraph(g, vs))) out.push_back(root_tree(vs, std::move(edges), g));
    return out;
}

using PartitionKey = std::vector<PartId>;

inline PartitionKey partition_key(const Assignment& a) { return canonicalize(a).labels; }

/// Exact distribution over the catalog as a map keyed by canonical labels.
inline std::map<PartitionKey, double> exact_partition_map(const Graph& g, const PartitionCatalog& cat,
                                                          const MeasureParams& params) {
    auto p = exact_distribution(cat, g, params);
    std::map<PartitionKey, double> out;
    for (std::size_t k = 0; k < p.size(); ++k) out[partition_key(cat.partitions[k])] += p[k];
    return out;
}

/// Canonical partition after every step of a chain.
inline std::vector<PartitionKey> partition_trace(const Graph& g, const ChainConfig& cfg, ChainStats* stats = nullptr) {
    std::vector<PartitionKey> keys;
    keys.reserve(cfg.steps);
    auto s = run_chain(g, cfg, 0, nullptr, [&](long, const ChainState& st, const StepOutcome&) {
        keys.push_back(partition_key(st.forest.assignment));
    });
    if (stats) *stats = s;
    return keys;
}

inline ChainConfig chain_setup(const OracleFixture& fx, double gamma, double beta, double w_c, long steps,
                               std::uint64_t seed) {
    ChainConfig cfg;
    cfg.n = fx.n;
    cfg.params.beta = beta;
    cfg.params.gamma = gamma;
    cfg.params.w_c = w_c;
    cfg.params.pop_window = fx.window;
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.snapshot_every = 1;
    return cfg;
}

} // namespace detail

// ---------------------------------------------------------------------------
// suites

/// Kirchhoff log tree counts against brute-force enumeration.
inline SuiteResult suite_kirchhoff(const SuiteOptions& opt) {
    detail::Report r("kirchhoff");
    auto check = [&](const Graph& g, const std::string& label, double expect_log) {
        const Subgraph sub = induced_subgraph(g, [&] {
            std::vector<NodeId> v(g.size());
            std::iota(v.begin(), v.end(), 0);
            return v;
        }());
        const double k = log_tree_count(sub).value;
        const double brute = std::log(static_cast<double>(brute_count_trees(sub)));
        r.check(std::abs(k - brute) <= 1e-9, label + ": kirchhoff " + detail::fmt(k, 15) + " vs brute " +
                                                  detail::fmt(brute, 15));
        if (!std::isnan(expect_log))
            r.check(std::abs(k - expect_log) <= 1e-9, label + ": expected " + detail::fmt(expect_log, 15));
    };
    check(make_path(3), "P3", 0.0);
    check(make_cycle(4), "C4", std::log(4.0));
    check(make_complete(4), "K4", std::log(16.0));
    check(make_grid(2, 3), "grid2x3", std::log(15.0));
    RngStream rng = RngStream(opt.seed).split(0, "kirchhoff");
    const long graphs = scaled(1000, opt.scale);
    for (long k = 0; k < graphs; ++k) {
        const int nodes = 1 + static_cast<int>(rng.below(7));
        const double extra = rng.uniform();
        check(random_connected_graph(nodes, extra, rng), "random graph " + std::to_string(k), std::nan(""));
    }
    r.note(std::to_string(graphs) + " random graphs");
    return r.finish();
}

/// Chi-square uniformity of Wilson trees.
inline SuiteResult suite_wilson(const SuiteOptions& opt) {
    detail::Report r("wilson");
    const long draws = scaled(100000, opt.scale);
    int idx = 0;
    for (auto [label, g] : {std::pair<std::string, Graph>{"C4", make_cycle(4)}, {"grid2x3", make_grid(2, 3)}}) {
        std::vector<NodeId> all(g.size());
        std::iota(all.begin(), all.end(), 0);
        const Subgraph sub = induced_subgraph(g, all);
        std::map<std::vector<EdgeId>, int> index;
        for (auto& t : enumerate_spanning_trees(sub)) index.emplace(detail::sorted(t), static_cast<int>(index.size()));
        std::vector<long> counts(index.size(), 0);
        RngStream rng = RngStream(opt.seed).split(idx++, "wilson");
        bool stray = false;
        for (long d = 0; d < draws; ++d) {
            auto it = index.find(wilson_ust(sub, rng));
            if (it == index.end()) stray = true;
            else ++counts[it->second];
        }
        r.check(!stray, label + ": sampled edge set is not a spanning tree");
        double stat = 0;
        const double p = chi_square_pvalue(counts, std::vector<double>(counts.size(), 1.0 / counts.size()), &stat);
        r.check(p > 0.001, label + ": chi-square p=" + detail::fmt(p));
        r.note(label + " trees=" + std::to_string(counts.size()) + " chi2=" + detail::fmt(stat, 4) +
               " p=" + detail::fmt(p, 4));
    }
    return r.finish();
}

/// Incremental cut search against the explicitly joined tree, exhaustively.
inline SuiteResult suite_cutsearch(const SuiteOptions& opt) {
    detail::Report r("cutsearch");
    std::vector<std::pair<std::string, Graph>> graphs;
    for (auto& fx : oracle_fixtures())
        if (fx.graph.size() <= 8) graphs.push_back({fx.name, fx.graph});
    RngStream rng = RngStream(opt.seed).split(0, "cutsearch");
    for (int k = 0; k < 3; ++k) {
        Graph g = random_connected_graph(8, 0.25, rng);
        std::vector<Pop> pops;
        for (int v = 0; v < g.size(); ++v) pops.push_back(1 + static_cast<Pop>(rng.below(4)));
        graphs.push_back({"random8-" + std::to_string(k), with_pops(g, pops)});
    }
    std::set<std::string> seen;
    long combos = 0, windows = 0;
    for (const auto& [name, g] : graphs) {
        if (!seen.insert(graph_to_json(g).dump()).second) continue; // fixtures may share a graph
        for (const auto& u : detail::connected_subsets(g)) {
            const int m = static_cast<int>(u.size());
            // bipartitions with u[0] on side A
            for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
                std::vector<NodeId> a{u[0]}, b;
                for (int k = 1; k < m; ++k) (mask >> (k - 1) & 1u ? a : b).push_back(u[k]);
                if (b.empty()) continue;
                if (!is_connected(induced_subgraph(g, a)) || !is_connected(induced_subgraph(g, b))) continue;
                std::vector<EdgeId> connecting;
                for (NodeId v : a)
                    for (auto [w, e] : g.neighbors(v))
                        if (std::binary_search(b.begin(), b.end(), w)) connecting.push_back(e);
                const auto ta = detail::all_trees(g, a), tb = detail::all_trees(g, b);
                for (const Tree& ti : ta)
                    for (const Tree& tj : tb)
                        for (EdgeId e : connecting) {
                            ++combos;
                            std::vector<EdgeId> edges = ti.edges;
                            edges.insert(edges.end(), tj.edges.begin(), tj.edges.end());
                            edges.push_back(e);
                            const Tree joined = root_tree(u, edges, g);
                            const Pop total = joined.total;
                            for (Pop lo = 0; lo <= total; ++lo)
                                for (Pop hi = lo; hi <= total; ++hi) {
                                    ++windows;
                                    const PopWindow w{lo, hi};
                                    const auto want = detail::sorted(find_cut_edges(joined, w));
                                    const auto got1 = detail::sorted(joined_cut_edges(ti, tj, e, g, w));
                                    const auto got2 = detail::sorted(joined_cut_edges(tj, ti, e, g, w));
                                    if (got1 != want || got2 != want) {
                                        r.check(false, name + ": mismatch for edge " + std::to_string(e) +
                                                           " window [" + std::to_string(lo) + "," +
                                                           std::to_string(hi) + "]");
                                    }
                                }
                        }
            }
        }
    }
    r.note(std::to_string(combos) + " (tree pair, edge) combinations, " + std::to_string(windows) + " windows");
    return r.finish();
}

/// Analytic proposal probabilities against the oracle and against sampling.
inline SuiteResult suite_proposal(const SuiteOptions& opt) {
    detail::Report r("proposal");
    const long trials = scaled(1000000, opt.scale);
    int stream = 0;
    long outcomes = 0;
    double worst_z = 0.0;
    for (const std::string name : {"p3", "grid2x3"}) {
        const OracleFixture fx = find_fixture(name);
        const Graph& g = fx.graph;
        const auto cat = enumerate_partitions(g, fx.n, fx.window);
        for (PairMethod method : {PairMethod::UniformNeighbor, PairMethod::BoundaryWeighted}) {
            for (const SpanningForest& start : enumerate_forests(g, cat)) {
                const TransitionRow row = exact_transition(start, method, fx.window, g, MeasureParams{});
                // analytic Q from the proposal's own bookkeeping
                using MoveKey = std::pair<std::pair<PartId, PartId>, std::pair<detail::TreeKey, detail::TreeKey>>;
                std::map<MoveKey, double> expect;
                for (const PairMove& mv : row.moves) {
                    const auto [i, j] = mv.pair;
                    const Proposal p = complete_proposal(start, method, fx.window, g, mv.pair,
                                                         {mv.target.trees[i], mv.target.trees[j]}, -1);
                    const double log_tau = log_tree_count(merged_subgraph(g, start.assignment, i, j)).value;
                    const double fwd = std::exp(p.log_pair_fwd + p.log_fwd_boundary - log_tau);
                    const double rev = std::exp(p.log_pair_bwd + p.log_bwd_boundary - log_tau);
                    r.check(std::abs(fwd - mv.forward) <= 1e-9,
                            name + ": analytic Q " + detail::fmt(fwd, 12) + " vs exact " + detail::fmt(mv.forward, 12));
                    r.check(std::abs(rev - mv.reverse) <= 1e-9,
                            name + ": analytic reverse Q " + detail::fmt(rev, 12) + " vs exact " +
                                detail::fmt(mv.reverse, 12));
                    expect[{mv.pair, {detail::tree_key(mv.target.trees[i]), detail::tree_key(mv.target.trees[j])}}] +=
                        mv.forward;
                }
                // empirical frequencies
                RngStream rng = RngStream(opt.seed).split(stream++, "proposal");
                std::map<MoveKey, long> seen;
                long self_loops = 0;
                for (long t = 0; t < trials; ++t) {
                    const Proposal p = propose(start, method, fx.window, g, rng);
                    if (p.self_loop) {
                        ++self_loops;
                        continue;
                    }
                    ++seen[{p.pair, {detail::tree_key(p.new_trees.first), detail::tree_key(p.new_trees.second)}}];
                }
                auto within = [&](long count, double prob, const std::string& what) {
                    const double f = static_cast<double>(count) / trials;
                    const double se = std::sqrt(prob * (1 - prob) / trials);
                    const double z = se > 0 ? std::abs(f - prob) / se : (f == prob ? 0.0 : kInf);
                    worst_z = std::max(worst_z, z);
                    ++outcomes;
                    r.check(z <= 3.0, name + " " + to_string(method) + ": " + what + " frequency " + detail::fmt(f) +
                                          " vs " + detail::fmt(prob) + " (" + detail::fmt(z, 3) + " SE)");
                };
                for (const auto& [key, prob] : expect) within(seen.count(key) ? seen.at(key) : 0, prob, "outcome");
                for (const auto& [key, c] : seen)
                    r.check(expect.count(key) > 0, name + ": sampled an outcome the oracle excludes");
                if (row.no_cut_mass > 0 || self_loops > 0) within(self_loops, row.no_cut_mass, "self-loop");
            }
        }
    }
    r.note(std::to_string(outcomes) + " outcomes x " + std::to_string(trials) + " trials, worst " +
           detail::fmt(worst_z, 3) + " SE");
    return r.finish();
}

/// Exact kernel detailed balance on every oracle fixture.
inline SuiteResult suite_balance(const SuiteOptions&) {
    detail::Report r("balance");
    long kernels = 0, moves_checked = 0;
    double worst = 0.0;
    for (const OracleFixture& fx : oracle_fixtures()) {
        const Graph& g = fx.graph;
        const auto cat = enumerate_partitions(g, fx.n, fx.window);
        for (PairMethod method : {PairMethod::UniformNeighbor, PairMethod::BoundaryWeighted})
            for (double gamma : {0.0, 1.0})
                for (double beta : {0.0, 1.0})
                    for (double w_c : {0.0, 0.45}) {
                        MeasureParams params;
                        params.beta = beta;
                        params.gamma = gamma;
                        params.w_c = w_c;
                        params.pop_window = fx.window;
                        const std::string tag = fx.name + " " + to_string(method) + " gamma=" + detail::fmt(gamma) +
                                                " beta=" + detail::fmt(beta) + " w_c=" + detail::fmt(w_c);
                        const ExactKernel ek = exact_kernel(g, cat, method, fx.window, params);
                        ++kernels;
                        const int s = static_cast<int>(ek.states.size());
                        for (int x = 0; x < s; ++x) {
                            double rowsum = 0;
                            for (int y = 0; y < s; ++y) {
                                rowsum += ek.k[x][y];
                                r.check(ek.k[x][y] >= 0, tag + ": negative kernel entry");
                                const double d = std::abs(ek.pi[x] * ek.k[x][y] - ek.pi[y] * ek.k[y][x]);
                                worst = std::max(worst, d);
                                r.check(d <= 1e-12, tag + ": balance violated by " + detail::fmt(d));
                            }
                            r.check(std::abs(rowsum - 1.0) <= 1e-12, tag + ": row sums to " + detail::fmt(rowsum, 15));
                        }
                        // the chain's acceptance rule must agree with the oracle's
                        const bool track = gamma != 0.0;
                        for (int x = 0; x < s; ++x) {
                            const ChainState st = make_state(g, ek.states[x], params, track);
                            const TransitionRow row = exact_transition(ek.states[x], method, fx.window, g, params);
                            for (const PairMove& mv : row.moves) {
                                const auto [i, j] = mv.pair;
                                const Proposal p = complete_proposal(ek.states[x], method, fx.window, g, mv.pair,
                                                                     {mv.target.trees[i], mv.target.trees[j]}, -1);
                                const double a = std::exp(log_acceptance(st, p, params, g));
                                ++moves_checked;
                                r.check(std::abs(a - mv.accept) <= 1e-9,
                                        tag + ": chain acceptance " + detail::fmt(a, 12) + " vs oracle " +
                                            detail::fmt(mv.accept, 12));
                            }
                        }
                    }
    }
    r.note(std::to_string(kernels) + " kernels, " + std::to_string(moves_checked) +
           " acceptance probabilities cross-checked, worst imbalance " + detail::fmt(worst, 3));
    return r.finish();
}

namespace detail {

inline SuiteResult stationarity(const std::string& name, double gamma, const SuiteOptions& opt) {
    Report r(name);
    const long steps = scaled(100000, opt.scale);
    int idx = 0;
    for (const OracleFixture& fx : {find_fixture("grid2x3-wide"), grid4x4_fixture()}) {
        const auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
        ChainConfig cfg = chain_setup(fx, gamma, 1.0, 0.0, steps, RngStream(opt.seed).split(idx++, name).next());
        const auto exact = exact_partition_map(fx.graph, cat, cfg.params);
        const auto trace = partition_trace(fx.graph, cfg);
        std::map<PartitionKey, double> emp;
        for (const auto& k : trace) emp[k] += 1.0 / static_cast<double>(trace.size());
        const double tv = total_variation(emp, exact);
        r.check(tv <= 0.05, fx.name + ": TV " + fmt(tv, 4) + " exceeds 0.05");
        r.note(fx.name + " partitions=" + std::to_string(cat.partitions.size()) + " TV=" + fmt(tv, 4));
    }
    return r.finish();
}

} // namespace detail

inline SuiteResult suite_stationarity_uniform(const SuiteOptions& opt) {
    return detail::stationarity("stationarity-gamma1", 1.0, opt);
}

inline SuiteResult suite_stationarity_weighted(const SuiteOptions& opt) {
    return detail::stationarity("stationarity-gamma0", 0.0, opt);
}

/// Acceptance rate across gamma on the 4x4 grid.
inline SuiteResult suite_acceptance_trend(const SuiteOptions& opt) {
    detail::Report r("acceptance-trend");
    const OracleFixture fx = grid4x4_fixture();
    const long steps = scaled(100000, opt.scale);
    std::vector<double> rates;
    for (double gamma : {0.0, 0.5, 1.0}) {
        ChainConfig cfg = detail::chain_setup(fx, gamma, 1.0, 0.0, steps, opt.seed);
        const ChainStats s = run_chain(fx.graph, cfg, 0, nullptr);
        rates.push_back(s.acceptance_rate());
        r.note("gamma=" + detail::fmt(gamma) + " acceptance=" + detail::fmt(s.acceptance_rate(), 4));
    }
    for (std::size_t k = 1; k < rates.size(); ++k)
        r.check(rates[k] <= rates[k - 1], "acceptance increased between gamma rungs");
    return r.finish();
}

/// Swap acceptance between two rungs against its enumerated expectation.
inline SuiteResult suite_tempering(const SuiteOptions& opt) {
    detail::Report r("tempering");
    const OracleFixture fx = find_fixture("grid2x3-wide");
    const Graph& g = fx.graph;
    const auto cat = enumerate_partitions(g, fx.n, fx.window);
    MeasureParams pa, pb;
    pa.pop_window = pb.pop_window = fx.window;
    pa.gamma = 0.0;
    pa.w_c = 0.0;
    pb.gamma = 1.0;
    pb.w_c = 0.45;
    const auto dist_a = exact_distribution(cat, g, pa), dist_b = exact_distribution(cat, g, pb);
    // forest-level log target of a partition (every forest of it shares the value)
    auto forest_lt = [&](const Assignment& a, const MeasureParams& p) {
        const ScoreBreakdown s = score(g, a, p);
        return -p.beta * s.total - p.gamma * log_forest_count(g, a).value;
    };
    const std::size_t m = cat.partitions.size();
    double expect = 0.0;
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) {
            const double lr = forest_lt(cat.partitions[y], pa) + forest_lt(cat.partitions[x], pb) -
                              forest_lt(cat.partitions[x], pa) - forest_lt(cat.partitions[y], pb);
            expect += dist_a[x] * dist_b[y] * std::min(1.0, std::exp(lr));
        }
    const long attempts = scaled(100000, opt.scale);
    RngStream root = RngStream(opt.seed).split(0, "tempering");
    RngStream draw = root.split(0, "draw"), swap = root.split(1, "swap");
    auto sample = [&](const std::vector<double>& dist) {
        double u = draw.uniform(), c = 0.0;
        std::size_t k = 0;
        for (; k + 1 < dist.size(); ++k) {
            c += dist[k];
            if (u < c) break;
        }
        const Assignment& a = cat.partitions[k];
        std::vector<Tree> trees;
        for (int i = 0; i < a.n; ++i) {
            auto members = a.members(i);
            trees.push_back(root_tree(members, wilson_ust(induced_subgraph(g, members), draw), g));
        }
        return make_forest(g, std::move(trees));
    };
    long accepted = 0;
    for (long t = 0; t < attempts; ++t) {
        ChainState a = make_state(g, sample(dist_a), pa, true);
        ChainState b = make_state(g, sample(dist_b), pb, true);
        if (ladder_swap(a, b, pa, pb, swap)) ++accepted;
    }
    const double f = static_cast<double>(accepted) / attempts;
    const double se = std::sqrt(expect * (1 - expect) / attempts);
    const double z = std::abs(f - expect) / se;
    r.check(z <= 3.0, "swap frequency off by " + detail::fmt(z, 3) + " SE");
    r.note("expected " + detail::fmt(expect, 6) + " observed " + detail::fmt(f, 6) + " (" + detail::fmt(z, 3) +
           " SE) over " + std::to_string(attempts) + " swaps");
    return r.finish();
}

/// Forests visited within the most common partition are uniform.
inline SuiteResult suite_lemma(const SuiteOptions& opt) {
    detail::Report r("lemma");
    const OracleFixture fx = find_fixture("grid2x3-wide");
    const Graph& g = fx.graph;
    const long thin = 10;
    ChainConfig cfg = detail::chain_setup(fx, 0.0, 1.0, 0.0, scaled(200000, opt.scale),
                                          RngStream(opt.seed).split(0, "lemma").next());
    std::map<detail::PartitionKey, std::map<ForestKey, long>> visits;
    std::map<detail::PartitionKey, long> per_partition;
    run_chain(g, cfg, 0, nullptr, [&](long step, const ChainState& st, const StepOutcome&) {
        if (step % thin) return;
        const auto pk = detail::partition_key(st.forest.assignment);
        ++visits[pk][forest_key(st.forest)];
        ++per_partition[pk];
    });
    auto best = std::max_element(per_partition.begin(), per_partition.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    const Assignment a = make_assignment(g, best->first, fx.n);
    std::uint64_t forests = 1;
    for (int i = 0; i < a.n; ++i) forests *= brute_count_trees(induced_subgraph(g, a.members(i)));
    const auto& seen = visits[best->first];
    r.check(seen.size() <= forests, "more distinct forests than brute force allows");
    if (forests < 2) {
        r.check(false, "most visited partition has a single forest; the test would be vacuous");
        return r.finish();
    }
    std::vector<long> counts;
    for (const auto& [k, c] : seen) counts.push_back(c);
    counts.resize(forests, 0);
    double stat = 0;
    const double p = chi_square_pvalue(counts, std::vector<double>(forests, 1.0 / forests), &stat);
    r.check(p > 0.001, "chi-square p=" + detail::fmt(p));
    r.note("partition visited " + std::to_string(best->second) + " times over " + std::to_string(forests) +
           " forests, chi2=" + detail::fmt(stat, 4) + " p=" + detail::fmt(p, 4));
    return r.finish();
}

/// TV-vs-steps series of the uniform 4x4 stationarity run.
inline std::vector<std::pair<double, double>> grid4x4_tv_series(const SuiteOptions& opt) {
    const OracleFixture fx = grid4x4_fixture();
    const auto cat = enumerate_partitions(fx.graph, fx.n, fx.window);
    // same stream as the second fixture of the gamma=1 stationarity suite
    ChainConfig cfg = detail::chain_setup(fx, 1.0, 1.0, 0.0, scaled(100000, opt.scale),
                                          RngStream(opt.seed).split(1, "stationarity-gamma1").next());
    const auto exact = detail::exact_partition_map(fx.graph, cat, cfg.params);
    const auto trace = detail::partition_trace(fx.graph, cfg);
    std::vector<long> checkpoints;
    for (double x = 1.0; x <= static_cast<double>(trace.size()); x *= std::pow(10.0, 0.05)) {
        const long c = std::lround(x);
        if (checkpoints.empty() || checkpoints.back() != c) checkpoints.push_back(c);
    }
    if (checkpoints.back() != static_cast<long>(trace.size())) checkpoints.push_back(static_cast<long>(trace.size()));
    return tv_series(trace, exact, checkpoints);
}

inline SuiteResult suite_diagnostics(const SuiteOptions& opt) {
    detail::Report r("diagnostics");
    std::vector<std::pair<double, double>> synth;
    for (int k = 0; k < 40; ++k) {
        const double x = std::pow(10.0, k / 8.0);
        synth.push_back({x, std::pow(x, -0.5)});
    }
    const PowerLawFit fit = power_law_fit(synth);
    r.check(std::abs(fit.exponent - 0.5) <= 1e-6, "synthetic exponent " + detail::fmt(fit.exponent, 12));
    r.note("synthetic exponent " + detail::fmt(fit.exponent, 10));
    const auto smooth = decade_smooth(grid4x4_tv_series(opt));
    std::string trail;
    for (std::size_t k = 0; k < smooth.size(); ++k) {
        trail += (k ? " " : "") + detail::fmt(smooth[k].second, 3);
        if (k) r.check(smooth[k].second <= smooth[k - 1].second, "smoothed TV rose at 1e" + std::to_string(k));
    }
    r.note("decade TV " + trail);
    return r.finish();
}

/// Identical config and seed give identical sample bytes.
inline SuiteResult suite_determinism(const SuiteOptions& opt) {
    detail::Report r("determinism");
    const OracleFixture fx = grid4x4_fixture();
    ChainConfig cfg = detail::chain_setup(fx, 0.5, 1.0, 0.45, scaled(20000, opt.scale), opt.seed);
    cfg.snapshot_every = 10;
    auto run = [&] {
        std::ostringstream out;
        JsonlSink sink(out);
        run_chain(fx.graph, cfg, 0, &sink);
        return out.str();
    };
    const std::string a = run(), b = run();
    r.check(!a.empty() && a == b, "sample streams differ");
    r.note(std::to_string(a.size()) + " bytes compared");
    return r.finish();
}

/// Incremental district, tree-count and score caches against recomputation.
inline SuiteResult suite_coherence(const SuiteOptions& opt) {
    detail::Report r("coherence");
    for (const OracleFixture& fx : {find_fixture("grid2x3-n3"), grid4x4_fixture()}) {
        MeasureParams params;
        params.gamma = 0.5;
        params.w_c = 0.45;
        params.pop_window = fx.window;
        RngStream root = RngStream(opt.seed).split(0, "coherence");
        RngStream init = root.split(0, "init"), rng = root.split(0, "chain");
        ChainState st = make_state(fx.graph, initial_forest(fx.graph, fx.n, fx.window, init), params, true);
        ChainStats stats;
        const long steps = scaled(5000, opt.scale);
        bool broken = false;
        for (long s = 1; s <= steps && !broken; ++s) {
            mh_step(st, params, PairMethod::UniformNeighbor, fx.graph, rng, stats);
            if (opt.corrupt_tau_cache && s == steps / 2) st.log_tau[0] += 0.25;
            check_forest(fx.graph, st.forest);
            const auto tau = part_log_tree_counts(fx.graph, st.forest.assignment);
            const auto districts = district_stats(fx.graph, st.forest.assignment);
            for (int i = 0; i < st.forest.parts(); ++i) {
                if (std::abs(tau[i] - st.log_tau[i]) > 1e-9 || districts[i].pop != st.districts[i].pop ||
                    std::abs(districts[i].area - st.districts[i].area) > 1e-9 ||
                    std::abs(districts[i].perimeter - st.districts[i].perimeter) > 1e-9) {
                    r.check(false, "cache coherence: " + fx.name + " step " + std::to_string(s) + " district " +
                                       std::to_string(i) + " cache differs from recomputation");
                    broken = true;
                }
            }
            const double total = score(districts, params).total;
            if (!broken && std::abs(total - st.score.total) > 1e-9 * std::max(1.0, std::abs(total))) {
                r.check(false, "cache coherence: " + fx.name + " score cache differs at step " + std::to_string(s));
                broken = true;
            }
        }
        r.note(fx.name + " " + std::to_string(steps) + " steps, acceptance " +
               detail::fmt(stats.acceptance_rate(), 3));
    }
    return r.finish();
}

/// Region-growing and label-enumeration catalogs agree.
inline SuiteResult suite_enumeration(const SuiteOptions&) {
    detail::Report r("enumeration");
    for (const OracleFixture& fx : oracle_fixtures()) {
        auto a = enumerate_partitions(fx.graph, fx.n, fx.window);
        auto b = enumerate_partitions_by_labels(fx.graph, fx.n, fx.window);
        std::set<detail::PartitionKey> ka, kb;
        for (const auto& x : a.partitions) ka.insert(detail::partition_key(x));
        for (const auto& x : b.partitions) kb.insert(detail::partition_key(x));
        r.check(ka == kb && ka.size() == a.partitions.size(),
                fx.name + ": " + std::to_string(ka.size()) + " vs " + std::to_string(kb.size()) + " partitions");
        r.note(fx.name + "=" + std::to_string(ka.size()));
    }
    return r.finish();
}

inline const std::vector<Suite>& suites() {
    static const std::vector<Suite> all = {
        {"kirchhoff", "log tree counts against brute force", suite_kirchhoff},
        {"wilson", "uniformity of sampled spanning trees", suite_wilson},
        {"cutsearch", "incremental cut search against the joined tree", suite_cutsearch},
        {"proposal", "proposal probabilities against oracle and sampling", suite_proposal},
        {"balance", "detailed balance of the exact kernel", suite_balance},
        {"stationarity-gamma1", "chain matches the uniform partition distribution", suite_stationarity_uniform},
        {"stationarity-gamma0", "chain matches the tree-weighted distribution", suite_stationarity_weighted},
        {"acceptance-trend", "acceptance does not increase with gamma", suite_acceptance_trend},
        {"tempering", "swap acceptance against its expectation", suite_tempering},
        {"lemma", "forests within a partition are uniform", suite_lemma},
        {"diagnostics", "power-law fit and TV decay", suite_diagnostics},
        {"determinism", "same seed gives the same samples", suite_determinism},
        {"coherence", "incremental caches match recomputation", suite_coherence},
        {"enumeration", "two partition enumerators agree", suite_enumeration},
    };
    return all;
}

inline SuiteResult run_suite(const Suite& s, const SuiteOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res;
    try {
        res = s.run(opt);
    } catch (const std::exception& e) {
        res = {s.name, false, std::string("error: ") + e.what(), 0.0};
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Run every suite, or only the named one.
inline std::vector<SuiteResult> run_suites(const std::string& selector, const SuiteOptions& opt) {
    std::vector<SuiteResult> out;
    for (const Suite& s : suites())
        if (selector.empty() || selector == "all" || selector == s.name) out.push_back(run_suite(s, opt));
    if (out.empty()) throw Error("unknown suite '" + selector + "'");
    return out;
}

inline nlohmann::json results_to_json(const std::vector<SuiteResult>& results) {
    nlohmann::json j;
    bool all = true;
    for (const auto& r : results) {
        j["suites"].push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
        all = all && r.passed;
    }
    j["passed"] = all;
    return j;
}

} // namespace frcom
