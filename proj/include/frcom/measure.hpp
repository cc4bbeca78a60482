#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "forest.hpp"
#include "proposal.hpp"
#include "tree_count.hpp"

namespace frcom {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Everything defining the target measure and its score function.
struct MeasureParams {
    double beta = 1.0;
    double gamma = 0.0;
    double w_c = 0.0;
    PopWindow pop_window;
    /// Maximum isoperimetric ratio P^2/A of any district (110 reproduces a
    /// Polsby-Popper floor of 4*pi/110 ~ 0.114).
    std::optional<double> compactness_cap;

    bool needs_geometry() const noexcept { return w_c > 0.0 || compactness_cap.has_value(); }

    /// Returns a warning message for accepted-but-unusual settings.
    std::optional<std::string> validate() const {
        if (beta < 0) throw Error("beta must be nonnegative");
        if (gamma < 0 || gamma > 1) throw Error("gamma must lie in [0, 1]");
        if (w_c < 0) throw Error("w_c must be nonnegative");
        if (pop_window.empty()) throw Error("population window is empty");
        if (compactness_cap && *compactness_cap <= 0) throw Error("compactness_cap must be positive");
        if (beta > 1) return "beta > 1 is outside the usual [0, 1] range";
        return std::nullopt;
    }
};

/// Per-district aggregates the score depends on.
struct DistrictStats {
    Pop pop = 0;
    double area = 0.0;
    double perimeter = 0.0;
};

/// Population, area and perimeter of the vertex set `verts`, where
/// `inside(v)` tells membership. Perimeter counts border length of every
/// edge leaving the set plus the members' external perimeter.
template <class Inside>
DistrictStats district_stats(const Graph& g, const std::vector<NodeId>& verts, Inside inside) {
    DistrictStats d;
    for (NodeId v : verts) {
        const auto& n = g.node(v);
        d.pop += n.pop;
        d.area += n.area;
        d.perimeter += n.external_perimeter;
        for (auto [w, e] : g.neighbors(v))
            if (!inside(w)) d.perimeter += g.edge(e).border_length;
    }
    return d;
}

inline std::vector<DistrictStats> district_stats(const Graph& g, const Assignment& a) {
    std::vector<DistrictStats> out(a.n);
    for (NodeId v = 0; v < g.size(); ++v) {
        auto& d = out[a.labels[v]];
        const auto& n = g.node(v);
        d.pop += n.pop;
        d.area += n.area;
        d.perimeter += n.external_perimeter;
        for (auto [w, e] : g.neighbors(v))
            if (a.labels[w] != a.labels[v]) d.perimeter += g.edge(e).border_length;
    }
    return out;
}

struct ScoreBreakdown {
    double j_pop = 0.0;     // 0 or +inf
    double j_compact = 0.0; // sum of P_d^2 / A_d
    bool cap_violated = false;
    double total = 0.0;     // j_pop + w_c * j_compact, +inf when a hard constraint fails

    bool feasible() const noexcept { return std::isfinite(total); }
};

inline ScoreBreakdown score(const std::vector<DistrictStats>& districts, const MeasureParams& params) {
    ScoreBreakdown s;
    bool area_missing = false;
    for (const auto& d : districts) {
        if (!params.pop_window.contains(d.pop)) s.j_pop = kInf;
        if (d.area <= 0) {
            area_missing = true;
            continue;
        }
        const double ratio = d.perimeter * d.perimeter / d.area;
        s.j_compact += ratio;
        if (params.compactness_cap && ratio > *params.compactness_cap) s.cap_violated = true;
    }
    if (area_missing) {
        if (params.needs_geometry()) throw Error("district with zero area while compactness is scored");
        s.j_compact = 0.0;
    }
    s.total = (s.cap_violated || !std::isfinite(s.j_pop)) ? kInf : params.w_c * s.j_compact;
    return s;
}

inline ScoreBreakdown score(const Graph& g, const Assignment& a, const MeasureParams& params) {
    return score(district_stats(g, a), params);
}

/// Unnormalised log density of a forest from its score and part tree counts.
/// Hard constraints give -inf irrespective of beta.
inline double log_target(const ScoreBreakdown& s, double sum_log_tau, const MeasureParams& params) {
    if (!s.feasible()) return -kInf;
    return -params.beta * s.total - params.gamma * sum_log_tau;
}

inline double log_target(const Graph& g, const SpanningForest& forest, const std::vector<double>& cached_log_tau,
                         const MeasureParams& params) {
    double sum = 0.0;
    if (params.gamma != 0.0) {
        if (static_cast<int>(cached_log_tau.size()) != forest.parts())
            throw Error("log tree counts required when gamma != 0");
        for (double x : cached_log_tau) sum += x;
    }
    return log_target(score(g, forest.assignment, params), sum, params);
}

/// Forest plus the per-district caches the chain maintains incrementally.
struct ChainState {
    SpanningForest forest;
    std::vector<DistrictStats> districts;
    std::vector<double> log_tau; // empty unless tree counts are tracked
    ScoreBreakdown score;

    bool tracks_log_tau() const noexcept { return !log_tau.empty(); }
    double sum_log_tau() const {
        double s = 0.0;
        for (double x : log_tau) s += x;
        return s;
    }
    void rescore(const MeasureParams& params) { score = frcom::score(districts, params); }
};

inline ChainState make_state(const Graph& g, SpanningForest forest, const MeasureParams& params, bool track_log_tau) {
    ChainState s;
    s.districts = district_stats(g, forest.assignment);
    if (track_log_tau) s.log_tau = part_log_tree_counts(g, forest.assignment);
    s.forest = std::move(forest);
    s.rescore(params);
    return s;
}

inline double log_target(const ChainState& s, const MeasureParams& params) {
    if (params.gamma != 0.0 && !s.tracks_log_tau()) throw Error("log tree counts required when gamma != 0");
    return log_target(s.score, params.gamma != 0.0 ? s.sum_log_tau() : 0.0, params);
}

/// Result of scoring a proposal against the current state.
struct ProposalEval {
    double log_accept = 0.0;
    DistrictStats new_i, new_j;
    double new_log_tau_i = 0.0, new_log_tau_j = 0.0;
    ScoreBreakdown new_score;
};

inline ProposalEval evaluate_proposal(const ChainState& state, const Proposal& prop, const MeasureParams& params,
                                      const Graph& g) {
    if (prop.self_loop) throw Error("cannot evaluate a self-loop proposal");
    const auto [i, j] = prop.pair;
    const auto& [ti, tj] = prop.new_trees;
    ProposalEval ev;
    ev.new_i = district_stats(g, ti.vertices, [&](NodeId v) { return ti.contains(v); });
    ev.new_j = district_stats(g, tj.vertices, [&](NodeId v) { return tj.contains(v); });
    auto districts = state.districts;
    districts[i] = ev.new_i;
    districts[j] = ev.new_j;
    ev.new_score = score(districts, params);

    if (state.tracks_log_tau()) {
        ev.new_log_tau_i = log_tree_count(induced_subgraph(g, ti.vertices)).value;
        ev.new_log_tau_j = log_tree_count(induced_subgraph(g, tj.vertices)).value;
    } else if (params.gamma != 0.0) {
        throw Error("log tree counts required when gamma != 0");
    }

    if (!ev.new_score.feasible()) {
        ev.log_accept = -kInf;
        return ev;
    }
    if (!state.score.feasible()) {
        ev.log_accept = 0.0;
        return ev;
    }
    double log_ratio = log_proposal_ratio(prop);
    if (params.beta != 0.0) log_ratio -= params.beta * (ev.new_score.total - state.score.total);
    if (params.gamma != 0.0)
        log_ratio += params.gamma * (state.log_tau[i] + state.log_tau[j] - ev.new_log_tau_i - ev.new_log_tau_j);
    ev.log_accept = std::min(0.0, log_ratio);
    return ev;
}

/// ln A(T, T') using only the two districts the proposal touches.
inline double log_acceptance(const ChainState& state, const Proposal& prop, const MeasureParams& params,
                             const Graph& g) {
    return evaluate_proposal(state, prop, params, g).log_accept;
}

/// 4 pi A_d / P_d^2 per district.
inline std::vector<double> polsby_popper(const std::vector<DistrictStats>& districts) {
    std::vector<double> out;
    out.reserve(districts.size());
    for (const auto& d : districts) {
        if (d.perimeter <= 0) throw Error("district with zero perimeter");
        out.push_back(4.0 * std::numbers::pi * d.area / (d.perimeter * d.perimeter));
    }
    return out;
}

inline std::vector<double> polsby_popper(const Graph& g, const Assignment& a) {
    return polsby_popper(district_stats(g, a));
}

} // namespace frcom
