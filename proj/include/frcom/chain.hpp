#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "measure.hpp"
#include "proposal.hpp"
#include "ust.hpp"

namespace frcom {

struct ChainStats {
    long proposals = 0;
    long accepts = 0;
    long rejections = 0;
    long self_loops = 0;
    long swap_attempts = 0;
    long swap_accepts = 0;

    double acceptance_rate() const noexcept {
        return proposals ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
    }
};

inline nlohmann::json stats_to_json(const ChainStats& s) {
    return {{"proposals", s.proposals},         {"accepts", s.accepts},
            {"rejections", s.rejections},       {"self_loops", s.self_loops},
            {"acceptance_rate", s.acceptance_rate()}, {"swap_attempts", s.swap_attempts},
            {"swap_accepts", s.swap_accepts}};
}

// ---------------------------------------------------------------------------
// initial state

/// Recursive splitting: draw a UST on what is left, cut off one balanced
/// piece whose complement can still host the remaining parts, repeat.
/// A failed level redraws its tree up to `retries` times, then the whole
/// construction starts over, at most `max_restarts` times.
inline SpanningForest initial_forest(const Graph& g, int n, const PopWindow& window, RngStream& rng, int retries = 64,
                                     int max_restarts = 1000) {
    if (n < 1) throw Error("partition count must be positive");
    if (window.empty()) throw Error("population window is empty");
    const Pop total = g.total_pop();
    if (window.lo * n > total || window.hi * n < total)
        throw Error("population window [" + std::to_string(window.lo) + ", " + std::to_string(window.hi) +
                    "] cannot hold total population " + std::to_string(total) + " in " + std::to_string(n) +
                    " parts");

    std::vector<NodeId> all(g.size());
    for (NodeId v = 0; v < g.size(); ++v) all[v] = v;

    for (int restart = 0; restart <= max_restarts; ++restart) {
        std::vector<Tree> trees;
        std::vector<NodeId> remaining = all;
        std::optional<Tree> rest_tree;
        bool ok = true;
        for (int k = n; k >= 2 && ok; --k) {
            const PopWindow rest{window.lo * (k - 1), window.hi * (k - 1)};
            const Subgraph sub = induced_subgraph(g, remaining);
            bool found = false;
            for (int attempt = 0; attempt <= retries && !found; ++attempt) {
                Tree t = root_tree(remaining, wilson_ust(sub, rng), g);
                struct Candidate {
                    EdgeId edge;
                    bool freeze_child_side;
                };
                std::vector<Candidate> cands;
                for (int x = 0; x < t.size(); ++x) {
                    if (t.parent[x] < 0) continue;
                    const Pop s = t.below[x];
                    if (window.contains(s) && rest.contains(t.total - s)) cands.push_back({t.parent_edge[x], true});
                    if (window.contains(t.total - s) && rest.contains(s)) cands.push_back({t.parent_edge[x], false});
                }
                if (cands.empty()) continue;
                const Candidate c = cands[rng.below(cands.size())];
                auto [p1, p2] = split_tree(t, c.edge, g);
                // p1 holds the root (smallest vertex); the child side is p2
                Tree& frozen = c.freeze_child_side ? p2 : p1;
                Tree& other = c.freeze_child_side ? p1 : p2;
                remaining = other.vertices;
                rest_tree = std::move(other);
                trees.push_back(std::move(frozen));
                found = true;
            }
            ok = found;
        }
        if (!ok) continue;
        if (n == 1) {
            const Subgraph sub = induced_subgraph(g, remaining);
            rest_tree = root_tree(remaining, wilson_ust(sub, rng), g);
            if (!window.contains(rest_tree->total)) continue;
        }
        trees.push_back(std::move(*rest_tree));
        std::sort(trees.begin(), trees.end(),
                  [](const Tree& a, const Tree& b) { return a.min_vertex() < b.min_vertex(); });
        return make_forest(g, std::move(trees));
    }
    throw Error("initial_forest: no balanced forest found after " + std::to_string(max_restarts) +
                " restarts (window [" + std::to_string(window.lo) + ", " + std::to_string(window.hi) + "], " +
                std::to_string(n) + " parts)");
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings step

struct StepOutcome {
    bool accepted = false;
    bool self_loop = false;
};

/// Replace partitions i and j of the state with the proposal's trees.
inline void apply_proposal(ChainState& s, Proposal&& prop, const ProposalEval& ev) {
    const auto [i, j] = prop.pair;
    for (NodeId v : prop.new_trees.first.vertices) s.forest.assignment.labels[v] = i;
    for (NodeId v : prop.new_trees.second.vertices) s.forest.assignment.labels[v] = j;
    s.forest.trees[i] = std::move(prop.new_trees.first);
    s.forest.trees[j] = std::move(prop.new_trees.second);
    s.districts[i] = ev.new_i;
    s.districts[j] = ev.new_j;
    if (s.tracks_log_tau()) {
        s.log_tau[i] = ev.new_log_tau_i;
        s.log_tau[j] = ev.new_log_tau_j;
    }
    s.score = ev.new_score;
}

inline StepOutcome mh_step(ChainState& state, const MeasureParams& params, PairMethod method, const Graph& g,
                           RngStream& rng, ChainStats& stats) {
    ++stats.proposals;
    Proposal prop = propose(state.forest, method, params.pop_window, g, rng);
    if (prop.self_loop) {
        ++stats.self_loops;
        return {false, true};
    }
    const ProposalEval ev = evaluate_proposal(state, prop, params, g);
    if (rng.log_uniform() < ev.log_accept) {
        apply_proposal(state, std::move(prop), ev);
        ++stats.accepts;
        return {true, false};
    }
    ++stats.rejections;
    return {false, false};
}

// ---------------------------------------------------------------------------
// sample sinks

struct Snapshot {
    int chain = 0;
    long step = 0;
    std::vector<PartId> labels;
    ScoreBreakdown score;
    std::optional<std::vector<double>> log_tau;
    bool accepted = false;
};

inline Snapshot take_snapshot(int chain, long step, const ChainState& s, bool accepted, bool with_log_tau) {
    Snapshot snap{chain, step, s.forest.assignment.labels, s.score, std::nullopt, accepted};
    if (with_log_tau) snap.log_tau = s.log_tau;
    return snap;
}

inline nlohmann::json snapshot_to_json(const Snapshot& s) {
    nlohmann::json j;
    j["chain"] = s.chain;
    j["step"] = s.step;
    j["labels"] = s.labels;
    if (std::isfinite(s.score.j_pop))
        j["j_pop"] = 0;
    else
        j["j_pop"] = "inf";
    j["j_compact"] = s.score.j_compact;
    if (s.log_tau) j["log_tau"] = *s.log_tau;
    j["accepted"] = s.accepted;
    return j;
}

inline Snapshot snapshot_from_json(const nlohmann::json& j) {
    Snapshot s;
    try {
        s.chain = j.at("chain").get<int>();
        s.step = j.at("step").get<long>();
        s.labels = j.at("labels").get<std::vector<PartId>>();
        const auto& jp = j.at("j_pop");
        s.score.j_pop = jp.is_string() ? kInf : jp.get<double>();
        s.score.j_compact = j.at("j_compact").get<double>();
        if (j.contains("log_tau")) s.log_tau = j["log_tau"].get<std::vector<double>>();
        s.accepted = j.at("accepted").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed sample record: ") + e.what());
    }
    return s;
}

class SampleSink {
public:
    virtual ~SampleSink() = default;
    virtual void write(const Snapshot& s) = 0;
    virtual void flush() {}
};

class JsonlSink final : public SampleSink {
public:
    explicit JsonlSink(std::ostream& out) : out_(out) {}
    void write(const Snapshot& s) override { out_ << snapshot_to_json(s).dump() << '\n'; }
    void flush() override { out_.flush(); }

private:
    std::ostream& out_;
};

class VectorSink final : public SampleSink {
public:
    void write(const Snapshot& s) override { samples.push_back(s); }
    std::vector<Snapshot> samples;
};

// ---------------------------------------------------------------------------
// single chains

struct ChainConfig {
    std::string graph_path;
    int n = 2;
    MeasureParams params;
    PairMethod method = PairMethod::UniformNeighbor;
    long steps = 0;
    std::uint64_t seed = 0;
    long snapshot_every = 1;
    int init_retries = 64;
    int max_restarts = 1000;
    int chains = 1;

    void validate() const {
        if (n < 2) throw Error("n must be at least 2");
        if (steps < 0) throw Error("steps must be nonnegative");
        if (snapshot_every < 1) throw Error("snapshot_every must be at least 1");
        if (chains < 1) throw Error("chains must be at least 1");
        if (init_retries < 0) throw Error("init_retries must be nonnegative");
        params.validate();
    }
};

/// Called after every step with (step index, state, outcome).
using StepObserver = std::function<void(long, const ChainState&, const StepOutcome&)>;

inline ChainStats run_chain(const Graph& g, const ChainConfig& cfg, int chain_index, SampleSink* sink,
                            const StepObserver& observer = {}) {
    const RngStream root(cfg.seed);
    RngStream init_rng = root.split(chain_index, "init");
    RngStream rng = root.split(chain_index, "chain");
    const bool track = cfg.params.gamma != 0.0;
    ChainState state = make_state(
        g, initial_forest(g, cfg.n, cfg.params.pop_window, init_rng, cfg.init_retries, cfg.max_restarts), cfg.params,
        track);
    ChainStats stats;
    if (sink) sink->write(take_snapshot(chain_index, 0, state, false, track));
    for (long step = 1; step <= cfg.steps; ++step) {
        StepOutcome out = mh_step(state, cfg.params, cfg.method, g, rng, stats);
        if (observer) observer(step, state, out);
        if (sink && step % cfg.snapshot_every == 0) sink->write(take_snapshot(chain_index, step, state, out.accepted, track));
    }
    if (sink) sink->flush();
    return stats;
}

/// Worker cap from FRCOM_THREADS (default: hardware concurrency).
inline int worker_count() {
    int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("FRCOM_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (...) {
        }
    }
    return hw;
}

/// Run jobs 0..count-1 on at most `workers` threads. Exceptions are rethrown
/// after all workers finish (the first one by job index).
inline void parallel_for(int count, int workers, const std::function<void(int)>& job) {
    std::vector<std::exception_ptr> errors(count);
    std::mutex m;
    int next = 0;
    auto worker = [&] {
        for (;;) {
            int k;
            {
                std::lock_guard lock(m);
                if (next >= count) return;
                k = next++;
            }
            try {
                job(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, count) - 1; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// parallel tempering

/// Metropolised exchange of two states between rungs with parameters
/// params_a and params_b. A swap that breaks either rung's hard constraints
/// is rejected. On acceptance the states trade places and are rescored.
inline bool ladder_swap(ChainState& a, ChainState& b, const MeasureParams& params_a, const MeasureParams& params_b,
                        RngStream& rng) {
    const bool need_tau = params_a.gamma != 0.0 || params_b.gamma != 0.0;
    if (need_tau && (!a.tracks_log_tau() || !b.tracks_log_tau()))
        throw Error("ladder swap needs cached log tree counts when any gamma != 0");
    auto lt = [](const ChainState& s, const MeasureParams& p) {
        return log_target(score(s.districts, p), p.gamma != 0.0 ? s.sum_log_tau() : 0.0, p);
    };
    const double swapped_a = lt(b, params_a), swapped_b = lt(a, params_b);
    if (!std::isfinite(swapped_a) || !std::isfinite(swapped_b)) {
        rng.uniform(); // keep the stream aligned whatever the outcome
        return false;
    }
    const double current = lt(a, params_a) + lt(b, params_b);
    const double log_ratio = std::isfinite(current) ? swapped_a + swapped_b - current : 0.0;
    if (rng.log_uniform() < std::min(0.0, log_ratio)) {
        std::swap(a, b);
        a.rescore(params_a);
        b.rescore(params_b);
        return true;
    }
    return false;
}

struct Rung {
    double gamma = 0.0;
    double w_c = 0.0;
};

struct LadderConfig {
    ChainConfig base;
    std::vector<Rung> rungs;
    long swap_every = 1;
    bool record_all_rungs = false;

    MeasureParams rung_params(std::size_t k) const {
        MeasureParams p = base.params;
        p.gamma = rungs[k].gamma;
        p.w_c = rungs[k].w_c;
        return p;
    }

    void validate() const {
        base.validate();
        if (rungs.size() < 2) throw Error("a ladder needs at least two rungs");
        if (swap_every < 1) throw Error("swap_every must be at least 1");
        for (std::size_t k = 0; k < rungs.size(); ++k) rung_params(k).validate();
    }

    /// gamma = i/(m-1), w_c = w_max * i/(m-1) for i = 0..m-1.
    static std::vector<Rung> linear_rungs(int m, double gamma_max, double w_max) {
        std::vector<Rung> out;
        for (int i = 0; i < m; ++i) {
            double t = static_cast<double>(i) / (m - 1);
            out.push_back({gamma_max * t, w_max * t});
        }
        return out;
    }
};

struct LadderResult {
    std::vector<ChainStats> rung_stats;
    std::vector<long> pair_attempts; // per adjacent pair (k, k+1)
    std::vector<long> pair_accepts;
};

/// One chain per rung. Rungs advance in parallel between swap points; every
/// swap_every steps one uniformly chosen adjacent pair attempts a swap.
/// `sinks[k]` (may be null) receives rung k's snapshots.
inline LadderResult run_ladder(const Graph& g, const LadderConfig& cfg, const std::vector<SampleSink*>& sinks) {
    cfg.validate();
    const int m = static_cast<int>(cfg.rungs.size());
    std::vector<MeasureParams> params(m);
    bool track = false;
    for (int k = 0; k < m; ++k) {
        params[k] = cfg.rung_params(k);
        track = track || params[k].gamma != 0.0;
    }
    const RngStream root(cfg.base.seed);
    RngStream swap_rng = root.split(0, "ladder-swap");
    std::vector<RngStream> rngs;
    std::vector<ChainState> states;
    for (int k = 0; k < m; ++k) {
        RngStream init_rng = root.split(k, "init");
        states.push_back(make_state(g,
                                    initial_forest(g, cfg.base.n, params[k].pop_window, init_rng,
                                                   cfg.base.init_retries, cfg.base.max_restarts),
                                    params[k], track));
        rngs.push_back(root.split(k, "chain"));
    }
    LadderResult res;
    res.rung_stats.resize(m);
    res.pair_attempts.assign(m - 1, 0);
    res.pair_accepts.assign(m - 1, 0);
    auto sink_for = [&](int k) -> SampleSink* {
        if (k >= static_cast<int>(sinks.size())) return nullptr;
        return sinks[k];
    };
    for (int k = 0; k < m; ++k)
        if (auto* s = sink_for(k)) s->write(take_snapshot(k, 0, states[k], false, params[k].gamma != 0.0));

    const int workers = worker_count();
    long done = 0;
    while (done < cfg.base.steps) {
        const long block = std::min(cfg.swap_every, cfg.base.steps - done);
        parallel_for(m, workers, [&](int k) {
            for (long s = 1; s <= block; ++s) {
                const long step = done + s;
                StepOutcome out = mh_step(states[k], params[k], cfg.base.method, g, rngs[k], res.rung_stats[k]);
                if (auto* sink = sink_for(k); sink && step % cfg.base.snapshot_every == 0)
                    sink->write(take_snapshot(k, step, states[k], out.accepted, params[k].gamma != 0.0));
            }
        });
        done += block;
        if (block == cfg.swap_every) {
            const int k = static_cast<int>(swap_rng.below(m - 1));
            ++res.pair_attempts[k];
            ++res.rung_stats[k].swap_attempts;
            ++res.rung_stats[k + 1].swap_attempts;
            if (ladder_swap(states[k], states[k + 1], params[k], params[k + 1], swap_rng)) {
                ++res.pair_accepts[k];
                ++res.rung_stats[k].swap_accepts;
                ++res.rung_stats[k + 1].swap_accepts;
            }
        }
    }
    for (auto* s : sinks)
        if (s) s->flush();
    return res;
}

} // namespace frcom
