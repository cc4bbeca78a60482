#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "chain.hpp"
#include "graph.hpp"

namespace frcom {

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw Error("unknown field '" + k + "' in " + where);
}

template <class T>
T require(const nlohmann::json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw Error("missing field '" + key + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error("field '" + key + "' in " + where + " has the wrong type");
    }
}

template <class T>
T optional_field(const nlohmann::json& j, const std::string& key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return require<T>(j, key, where);
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config not found: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("config " + path + " is not valid JSON: " + e.what());
    }
}

} // namespace detail

/// Population window from either "pop_window": [lo, hi] or
/// "pop_deviation": f (window = ideal * [1-f, 1+f]).
inline PopWindow window_from_json(const nlohmann::json& j, Pop total, int n, const std::string& where) {
    const bool has_w = j.contains("pop_window"), has_d = j.contains("pop_deviation");
    if (has_w == has_d) throw Error("exactly one of pop_window or pop_deviation is required in " + where);
    if (has_w) {
        auto w = detail::require<std::vector<Pop>>(j, "pop_window", where);
        if (w.size() != 2) throw Error("pop_window must be [lo, hi] in " + where);
        return {w[0], w[1]};
    }
    return PopWindow::from_deviation(total, n, detail::require<double>(j, "pop_deviation", where));
}

inline const std::set<std::string> kChainKeys = {
    "graph", "n", "beta", "gamma", "w_c", "pop_window", "pop_deviation", "compactness_cap", "method", "steps",
    "seed", "snapshot_every", "init_retries", "max_restarts", "chains"};

/// Parse a chain config; the graph path is resolved against `base_dir`.
inline std::pair<ChainConfig, Graph> chain_config_from_json(const nlohmann::json& j,
                                                            const std::filesystem::path& base_dir,
                                                            const std::string& where = "chain config") {
    using detail::optional_field;
    using detail::require;
    if (!j.is_object()) throw Error(where + " must be a JSON object");
    detail::reject_unknown(j, kChainKeys, where);
    ChainConfig cfg;
    std::filesystem::path gp = require<std::string>(j, "graph", where);
    if (gp.is_relative()) gp = base_dir / gp;
    cfg.graph_path = gp.string();
    Graph g = load_graph_file(cfg.graph_path);
    cfg.n = require<int>(j, "n", where);
    cfg.params.beta = require<double>(j, "beta", where);
    cfg.params.gamma = require<double>(j, "gamma", where);
    cfg.params.w_c = require<double>(j, "w_c", where);
    cfg.params.pop_window = window_from_json(j, g.total_pop(), cfg.n, where);
    if (j.contains("compactness_cap")) cfg.params.compactness_cap = require<double>(j, "compactness_cap", where);
    cfg.method = pair_method_from_string(require<std::string>(j, "method", where));
    cfg.steps = require<long>(j, "steps", where);
    cfg.seed = require<std::uint64_t>(j, "seed", where);
    cfg.snapshot_every = require<long>(j, "snapshot_every", where);
    cfg.init_retries = optional_field<int>(j, "init_retries", 64, where);
    cfg.max_restarts = optional_field<int>(j, "max_restarts", 1000, where);
    cfg.chains = optional_field<int>(j, "chains", 1, where);
    cfg.validate();
    return {std::move(cfg), std::move(g)};
}

inline std::pair<ChainConfig, Graph> load_chain_config(const std::string& path) {
    return chain_config_from_json(detail::read_json_file(path), std::filesystem::path(path).parent_path());
}

inline std::pair<LadderConfig, Graph> ladder_config_from_json(const nlohmann::json& j,
                                                              const std::filesystem::path& base_dir) {
    using detail::require;
    const std::string where = "ladder config";
    if (!j.is_object()) throw Error(where + " must be a JSON object");
    detail::reject_unknown(j, {"base", "rungs", "linear_rungs", "swap_every", "record_all_rungs"}, where);
    auto [base, g] = chain_config_from_json(require<nlohmann::json>(j, "base", where), base_dir, "ladder base");
    LadderConfig cfg;
    cfg.base = std::move(base);
    cfg.swap_every = require<long>(j, "swap_every", where);
    cfg.record_all_rungs = detail::optional_field<bool>(j, "record_all_rungs", false, where);
    if (j.contains("rungs") == j.contains("linear_rungs"))
        throw Error("exactly one of rungs or linear_rungs is required in " + where);
    if (j.contains("rungs")) {
        for (const auto& r : require<nlohmann::json>(j, "rungs", where)) {
            detail::reject_unknown(r, {"gamma", "w_c"}, "rung");
            cfg.rungs.push_back({require<double>(r, "gamma", "rung"), require<double>(r, "w_c", "rung")});
        }
    } else {
        const auto lr = require<nlohmann::json>(j, "linear_rungs", where);
        detail::reject_unknown(lr, {"count", "gamma_max", "w_c_max"}, "linear_rungs");
        cfg.rungs = LadderConfig::linear_rungs(require<int>(lr, "count", "linear_rungs"),
                                               require<double>(lr, "gamma_max", "linear_rungs"),
                                               require<double>(lr, "w_c_max", "linear_rungs"));
    }
    cfg.validate();
    return {std::move(cfg), std::move(g)};
}

inline std::pair<LadderConfig, Graph> load_ladder_config(const std::string& path) {
    return ladder_config_from_json(detail::read_json_file(path), std::filesystem::path(path).parent_path());
}

} // namespace frcom
