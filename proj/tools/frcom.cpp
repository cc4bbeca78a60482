// frcom: run chains and ladders, enumerate small state spaces, analyze
// ensembles and run the validation suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "frcom/frcom.hpp"
#include "frcom/validate.hpp"

namespace fs = std::filesystem;
using namespace frcom;

namespace {

std::string read_file(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(what + " not found: " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string hex64(std::uint64_t x) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << x;
    return s.str();
}

// Write through a temporary file and rename into place.
template <class Fn>
void write_atomic(const fs::path& path, Fn&& fill) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        fill(out);
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

nlohmann::json manifest(const std::string& config_path, std::uint64_t seed, const std::string& command) {
    return {{"command", command},
            {"config", config_path},
            {"config_fnv1a64", hex64(hash_tag(read_file(config_path, "config")))},
            {"seed", seed},
            {"version", kVersion}};
}

// ---------------------------------------------------------------------------
// run / ladder

int cmd_run(const std::string& config_path, const fs::path& out_dir) {
    auto [cfg, g] = load_chain_config(config_path);
    ensure_dir(out_dir);
    std::vector<ChainStats> stats(cfg.chains);
    parallel_for(cfg.chains, worker_count(), [&, &cfg = cfg, &g = g](int k) {
        write_atomic(out_dir / ("chain" + std::to_string(k) + ".jsonl"), [&](std::ostream& out) {
            JsonlSink sink(out);
            stats[k] = run_chain(g, cfg, k, &sink);
        });
    });
    nlohmann::json js;
    ChainStats total;
    for (int k = 0; k < cfg.chains; ++k) {
        js["chains"].push_back(stats_to_json(stats[k]));
        total.proposals += stats[k].proposals;
        total.accepts += stats[k].accepts;
        total.rejections += stats[k].rejections;
        total.self_loops += stats[k].self_loops;
    }
    js["total"] = stats_to_json(total);
    write_json(out_dir / "stats.json", js);
    auto m = manifest(config_path, cfg.seed, "run");
    m["chains"] = cfg.chains;
    write_json(out_dir / "manifest.json", m);
    std::cerr << "acceptance rate " << total.acceptance_rate() << " over " << total.proposals << " proposals\n";
    return 0;
}

int cmd_ladder(const std::string& config_path, const fs::path& out_dir) {
    auto [cfg, g] = load_ladder_config(config_path);
    ensure_dir(out_dir);
    const int m = static_cast<int>(cfg.rungs.size());
    const int recorded = cfg.record_all_rungs ? m : 1;
    std::vector<fs::path> finals, tmps;
    std::vector<std::ofstream> files(recorded);
    std::vector<std::unique_ptr<JsonlSink>> sinks;
    std::vector<SampleSink*> ptrs;
    for (int k = 0; k < recorded; ++k) {
        finals.push_back(out_dir / ("rung" + std::to_string(k) + ".jsonl"));
        tmps.push_back(finals.back().string() + ".tmp");
        files[k].open(tmps.back(), std::ios::binary | std::ios::trunc);
        if (!files[k]) throw Error("cannot write " + tmps.back().string());
        sinks.push_back(std::make_unique<JsonlSink>(files[k]));
        ptrs.push_back(sinks.back().get());
    }
    const LadderResult res = run_ladder(g, cfg, ptrs);
    for (int k = 0; k < recorded; ++k) {
        files[k].close();
        fs::rename(tmps[k], finals[k]);
    }
    nlohmann::json js;
    for (int k = 0; k < m; ++k) {
        auto r = stats_to_json(res.rung_stats[k]);
        r["gamma"] = cfg.rungs[k].gamma;
        r["w_c"] = cfg.rungs[k].w_c;
        js["rungs"].push_back(r);
    }
    for (int k = 0; k + 1 < m; ++k)
        js["swaps"].push_back({{"pair", {k, k + 1}},
                               {"attempts", res.pair_attempts[k]},
                               {"accepts", res.pair_accepts[k]},
                               {"rate", res.pair_attempts[k] ? double(res.pair_accepts[k]) / res.pair_attempts[k] : 0.0}});
    write_json(out_dir / "stats.json", js);
    auto man = manifest(config_path, cfg.base.seed, "ladder");
    man["rungs"] = m;
    write_json(out_dir / "manifest.json", man);
    return 0;
}

// ---------------------------------------------------------------------------
// enumerate

struct EnumerateArgs {
    std::string graph;
    int n = 2;
    double deviation = 0.0;
    double beta = 1.0, gamma = 0.0, w_c = 0.0;
    std::optional<double> cap;
    bool by_labels = false;
};

int cmd_enumerate(const EnumerateArgs& a, const fs::path& out_dir) {
    const Graph g = load_graph_file(a.graph);
    MeasureParams params;
    params.beta = a.beta;
    params.gamma = a.gamma;
    params.w_c = a.w_c;
    params.compactness_cap = a.cap;
    params.pop_window = PopWindow::from_deviation(g.total_pop(), a.n, a.deviation);
    params.validate();
    PartitionCatalog cat = a.by_labels ? enumerate_partitions_by_labels(g, a.n, params.pop_window)
                                       : enumerate_partitions(g, a.n, params.pop_window);
    if (cat.partitions.empty()) throw Error("no partition satisfies the population window");
    weigh_catalog(cat, g, params);
    const auto p = normalize_log_weights(cat.log_weights);
    ensure_dir(out_dir);
    write_atomic(out_dir / "catalog.jsonl", [&](std::ostream& out) { write_catalog(out, cat); });
    write_atomic(out_dir / "distribution.csv", [&](std::ostream& out) {
        out << "index,log_tau,probability\n" << std::setprecision(17);
        for (std::size_t k = 0; k < p.size(); ++k)
            out << k << ',' << log_forest_count(g, cat.partitions[k]).value << ',' << p[k] << '\n';
    });
    std::cerr << cat.partitions.size() << " partitions in window [" << params.pop_window.lo << ", "
              << params.pop_window.hi << "]\n";
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::vector<std::string> samples;
    std::string catalog;
    std::string graph;
    std::string election;
    std::string tv_mode;
    double log_tau_width = 0.5;
};

std::vector<Snapshot> load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("samples not found: " + path);
    std::vector<Snapshot> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(snapshot_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error&) {
            throw Error(path + ":" + std::to_string(lineno) + ": invalid JSON");
        }
    }
    if (out.empty()) throw Error("no samples in " + path);
    return out;
}

using Key = std::vector<PartId>;

Key canonical_key(const std::vector<PartId>& labels) {
    int n = 0;
    for (PartId l : labels) n = std::max(n, l + 1);
    return canonicalize(Assignment{labels, n}).labels;
}

int cmd_analyze(const AnalyzeArgs& a, const fs::path& out_dir) {
    std::vector<std::vector<Snapshot>> chains;
    for (const auto& p : a.samples) chains.push_back(load_samples(p));
    // cadence check: every file must sample the same steps
    for (std::size_t c = 1; c < chains.size(); ++c) {
        bool same = chains[c].size() == chains[0].size();
        for (std::size_t k = 0; same && k < chains[c].size(); ++k) same = chains[c][k].step == chains[0][k].step;
        if (!same)
            throw Error("incompatible snapshot cadences: " + a.samples[c] + " does not sample the same steps as " +
                        a.samples[0]);
    }
    if (!a.tv_mode.empty() && a.tv_mode != "max" && a.tv_mode != "mean")
        throw Error("--tv-mode must be max or mean");
    if (a.catalog.empty() && chains.size() < 2)
        throw Error("pairwise total variation needs at least two chains (or pass --catalog)");
    if (chains.size() >= 2 && a.tv_mode.empty())
        throw Error("--tv-mode max|mean is required when analysing several chains");

    std::optional<Graph> g;
    if (!a.graph.empty()) g = load_graph_file(a.graph);
    if (!a.election.empty() && !g) throw Error("--election needs --graph for vote data");
    ensure_dir(out_dir);

    const std::size_t len = chains[0].size();
    std::vector<std::vector<Key>> keys(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (const auto& s : chains[c]) keys[c].push_back(canonical_key(s.labels));
    const auto checkpoints = log_checkpoints(static_cast<long>(len));
    auto reduce = [&](const std::vector<double>& v) {
        if (a.tv_mode == "max") return *std::max_element(v.begin(), v.end());
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };

    std::vector<std::pair<double, double>> series;
    std::string tv_kind;
    if (!a.catalog.empty()) {
        std::ifstream in(a.catalog);
        if (!in) throw Error("catalog not found: " + a.catalog);
        const PartitionCatalog cat = read_catalog(in);
        if (cat.log_weights.empty()) throw Error("catalog has no weights; regenerate it with frcom enumerate");
        const auto p = normalize_log_weights(cat.log_weights);
        std::map<Key, double> exact;
        for (std::size_t k = 0; k < p.size(); ++k) exact[canonicalize(cat.partitions[k]).labels] += p[k];
        std::vector<std::vector<std::pair<double, double>>> per(chains.size());
        for (std::size_t c = 0; c < chains.size(); ++c) per[c] = tv_series(keys[c], exact, checkpoints);
        for (std::size_t k = 0; k < per[0].size(); ++k) {
            std::vector<double> v;
            for (auto& s : per) v.push_back(s[k].second);
            series.push_back({per[0][k].first, reduce(v)});
        }
        tv_kind = "catalog";
    } else {
        for (long cp : checkpoints) {
            std::vector<std::map<Key, double>> emp(chains.size());
            for (std::size_t c = 0; c < chains.size(); ++c)
                for (long k = 0; k < cp; ++k) emp[c][keys[c][k]] += 1.0 / static_cast<double>(cp);
            std::vector<double> v;
            for (std::size_t x = 0; x < chains.size(); ++x)
                for (std::size_t y = x + 1; y < chains.size(); ++y) v.push_back(total_variation(emp[x], emp[y]));
            series.push_back({static_cast<double>(cp), reduce(v)});
        }
        tv_kind = "pairwise";
    }
    write_atomic(out_dir / "tv_series.csv", [&](std::ostream& out) { write_series_csv(out, series); });

    nlohmann::json fit = {{"tv_reference", tv_kind}, {"tv_mode", a.tv_mode.empty() ? "single" : a.tv_mode}};
    std::vector<std::pair<double, double>> positive;
    for (auto [x, y] : series)
        if (y > 0) positive.push_back({x, y});
    try {
        const PowerLawFit f = power_law_fit(positive);
        fit["exponent"] = f.exponent;
        fit["prefactor"] = f.prefactor;
    } catch (const Error& e) {
        fit["exponent"] = nullptr;
        fit["note"] = e.what();
    }
    write_json(out_dir / "fit.json", fit);

    // forest counts, when the samples carry them
    std::vector<double> log_tau;
    for (const auto& ch : chains)
        for (const auto& s : ch)
            if (s.log_tau) log_tau.push_back(std::accumulate(s.log_tau->begin(), s.log_tau->end(), 0.0));
    if (!log_tau.empty())
        write_atomic(out_dir / "forest_counts.csv",
                     [&](std::ostream& out) { write_histogram_csv(out, forest_count_histogram(log_tau, a.log_tau_width)); });

    if (!a.election.empty()) {
        std::vector<Assignment> all;
        std::map<int, long> seat_hist;
        long ties = 0;
        for (const auto& ch : chains)
            for (const auto& s : ch) {
                Assignment asg = make_assignment(*g, s.labels, 1 + *std::max_element(s.labels.begin(), s.labels.end()));
                const SeatCount sc = seats(*g, asg, a.election);
                ++seat_hist[sc.party_a];
                ties += sc.ties;
                all.push_back(std::move(asg));
            }
        write_atomic(out_dir / "seats.csv", [&](std::ostream& out) {
            out << "seats,count\n";
            for (auto [k, c] : seat_hist) out << k << ',' << c << '\n';
        });
        const auto marg = ordered_marginals(all, *g, a.election);
        for (std::size_t r = 0; r < marg.size(); ++r)
            write_atomic(out_dir / ("marginal_rank" + std::to_string(r + 1) + ".csv"),
                         [&](std::ostream& out) { write_histogram_csv(out, marg[r]); });
        fit["tied_districts"] = ties;
    }
    std::cerr << "final TV " << series.back().second << " (" << tv_kind << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& suite, const SuiteOptions& opt, const std::string& report) {
    const auto results = run_suites(suite, opt);
    for (const auto& r : results)
        std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << std::fixed << std::setprecision(2)
                  << r.seconds << " s) " << r.detail << '\n';
    const auto j = results_to_json(results);
    if (!report.empty()) write_json(report, j);
    std::cout << j.dump(2) << '\n';
    return j["passed"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metropolized forest recombination sampler"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config, out;
    auto* run = app.add_subcommand("run", "run one or more chains from a config");
    run->add_option("-c,--config", config, "chain config JSON")->required();
    run->add_option("-o,--out", out, "output directory")->required();

    auto* ladder = app.add_subcommand("ladder", "run a parallel tempering ladder");
    ladder->add_option("-c,--config", config, "ladder config JSON")->required();
    ladder->add_option("-o,--out", out, "output directory")->required();

    EnumerateArgs ea;
    double cap = 0.0;
    auto* en = app.add_subcommand("enumerate", "enumerate every balanced partition of a small graph");
    en->add_option("-g,--graph", ea.graph, "graph JSON")->required();
    en->add_option("-n,--parts", ea.n, "number of partitions")->required()->check(CLI::PositiveNumber);
    en->add_option("--window", ea.deviation, "population deviation fraction")->required()->check(CLI::NonNegativeNumber);
    en->add_option("--beta", ea.beta, "inverse temperature");
    en->add_option("--gamma", ea.gamma, "spanning forest exponent");
    en->add_option("--wc", ea.w_c, "compactness weight");
    auto* cap_opt = en->add_option("--cap", cap, "compactness cap on P^2/A");
    en->add_flag("--by-labels", ea.by_labels, "use label enumeration instead of region growing");
    en->add_option("-o,--out", out, "output directory")->required();

    AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "summarise sample files");
    an->add_option("-s,--samples", aa.samples, "sample JSONL files")->required();
    an->add_option("--catalog", aa.catalog, "catalog JSONL from enumerate");
    an->add_option("-g,--graph", aa.graph, "graph JSON (needed for votes)");
    an->add_option("--election", aa.election, "election id for seats and marginals");
    an->add_option("--tv-mode", aa.tv_mode, "reduction across chains: max or mean")
        ->check(CLI::IsMember({"max", "mean"}));
    an->add_option("--log-tau-width", aa.log_tau_width, "bin width of the forest count histogram")
        ->check(CLI::PositiveNumber);
    an->add_option("-o,--out", out, "output directory")->required();

    std::string suite, report;
    SuiteOptions vo;
    auto* va = app.add_subcommand("validate", "run the validation suites");
    va->add_option("--suite", suite, "run only this suite");
    va->add_option("--scale", vo.scale, "scale trial and step counts")->check(CLI::PositiveNumber);
    va->add_option("--seed", vo.seed, "seed");
    va->add_option("--report", report, "also write the JSON report here");
    va->add_flag("--corrupt-tau-cache", vo.corrupt_tau_cache, "test hook: damage the tree count cache");
    va->add_flag_callback("--list", [] {
        for (const auto& s : suites()) std::cout << s.name << '\t' << s.description << '\n';
        std::exit(0);
    }, "list suites");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, out);
        if (*ladder) return cmd_ladder(config, out);
        if (*en) {
            if (*cap_opt) ea.cap = cap;
            return cmd_enumerate(ea, out);
        }
        if (*an) return cmd_analyze(aa, out);
        if (*va) return cmd_validate(suite, vo, report);
    } catch (const std::exception& e) {
        std::cerr << "frcom: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
