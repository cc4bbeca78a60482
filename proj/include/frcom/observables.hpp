#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace frcom {

// ---------------------------------------------------------------------------
// seats

struct SeatCount {
    int party_a = 0;
    int party_b = 0;
    int ties = 0;
};

namespace detail {
inline std::vector<std::pair<std::int64_t, std::int64_t>> district_votes(const Graph& g,
                                                                         const std::vector<PartId>& labels, int n,
                                                                         const std::string& election) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out(n, {0, 0});
    for (NodeId v = 0; v < g.size(); ++v) {
        const auto& votes = g.node(v).votes;
        auto it = votes.find(election);
        if (it == votes.end())
            throw Error("node '" + g.node(v).name + "' has no votes for election '" + election + "'");
        out[labels[v]].first += it->second.first;
        out[labels[v]].second += it->second.second;
    }
    return out;
}
} // namespace detail

/// Districts won by each party; exact ties go to neither.
inline SeatCount seats(const Graph& g, const Assignment& a, const std::string& election) {
    SeatCount s;
    for (auto [va, vb] : detail::district_votes(g, a.labels, a.n, election)) {
        if (va > vb) ++s.party_a;
        else if (vb > va) ++s.party_b;
        else ++s.ties;
    }
    return s;
}

/// Party-A share of the two-party vote per district (0.5 for empty districts).
inline std::vector<double> vote_shares(const Graph& g, const Assignment& a, const std::string& election) {
    std::vector<double> out;
    for (auto [va, vb] : detail::district_votes(g, a.labels, a.n, election))
        out.push_back(va + vb > 0 ? static_cast<double>(va) / static_cast<double>(va + vb) : 0.5);
    return out;
}

// ---------------------------------------------------------------------------
// histograms

struct Histogram {
    std::vector<double> edges; // strictly increasing, counts.size() + 1 entries
    std::vector<long> counts;
    long total = 0;

    static Histogram uniform(double lo, double hi, int bins) {
        if (bins < 1 || !(hi > lo)) throw Error("histogram needs hi > lo and at least one bin");
        Histogram h;
        h.counts.assign(bins, 0);
        for (int k = 0; k <= bins; ++k) h.edges.push_back(lo + (hi - lo) * k / bins);
        return h;
    }

    int bins() const noexcept { return static_cast<int>(counts.size()); }

    /// Values outside the range are clamped into the end bins.
    void add(double x, long count = 1) {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        int k = static_cast<int>(it - edges.begin()) - 1;
        k = std::clamp(k, 0, bins() - 1);
        counts[k] += count;
        total += count;
    }

    void merge(const Histogram& other) {
        if (other.edges != edges) throw Error("cannot merge histograms with different bin edges");
        for (int k = 0; k < bins(); ++k) counts[k] += other.counts[k];
        total += other.total;
    }
};

/// Half the L1 distance between the normalised histograms.
inline double total_variation(const Histogram& a, const Histogram& b) {
    if (a.edges != b.edges) throw Error("total variation needs identical bin edges");
    if (a.total == 0 || b.total == 0) throw Error("total variation of an empty histogram");
    double s = 0.0;
    for (int k = 0; k < a.bins(); ++k)
        s += std::abs(static_cast<double>(a.counts[k]) / a.total - static_cast<double>(b.counts[k]) / b.total);
    return 0.5 * s;
}

/// Total variation between two discrete distributions given as maps.
template <class Key>
double total_variation(const std::map<Key, double>& p, const std::map<Key, double>& q) {
    double s = 0.0;
    for (const auto& [k, v] : p) {
        auto it = q.find(k);
        s += std::abs(v - (it == q.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : q)
        if (!p.count(k)) s += std::abs(v);
    return 0.5 * s;
}

inline constexpr double kMarginalBinWidth = 0.002;

/// Rank-r histogram of the r-th smallest district vote share, r = 1..n.
inline std::vector<Histogram> ordered_marginals(const std::vector<Assignment>& samples, const Graph& g,
                                                const std::string& election) {
    if (samples.empty()) throw Error("ordered marginals need at least one sample");
    const int n = samples.front().n;
    const int bins = static_cast<int>(std::lround(1.0 / kMarginalBinWidth));
    std::vector<Histogram> out(n, Histogram::uniform(0.0, 1.0, bins));
    for (const auto& a : samples) {
        auto shares = vote_shares(g, a, election);
        std::sort(shares.begin(), shares.end());
        for (int r = 0; r < n; ++r) out[r].add(shares[r]);
    }
    return out;
}

/// Fixed-width histogram of ln tau values. Bins are aligned to multiples of
/// `width` and cover the observed range.
inline Histogram forest_count_histogram(const std::vector<double>& log_tau, double width = 0.5) {
    if (log_tau.empty()) throw Error("forest count histogram needs samples");
    if (!(width > 0)) throw Error("bin width must be positive");
    auto [mn, mx] = std::minmax_element(log_tau.begin(), log_tau.end());
    const double lo = std::floor(*mn / width) * width;
    const int bins = std::max(1, static_cast<int>(std::floor((*mx - lo) / width)) + 1);
    Histogram h = Histogram::uniform(lo, lo + bins * width, bins);
    for (double x : log_tau) h.add(x);
    return h;
}

// ---------------------------------------------------------------------------
// convergence fits

struct PowerLawFit {
    double exponent = 0.0;  // tv ~ prefactor * steps^(-exponent)
    double prefactor = 0.0;
};

/// Least squares on (ln steps, ln tv).
inline PowerLawFit power_law_fit(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 3) throw Error("power-law fit needs at least three points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : series) {
        if (!(x > 0) || !(y > 0)) throw Error("power-law fit needs positive values");
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(series.size());
    const double den = m * sxx - sx * sx;
    if (den == 0) throw Error("power-law fit needs at least two distinct step counts");
    const double slope = (m * sxy - sx * sy) / den;
    const double intercept = (sy - slope * sx) / m;
    return {-slope, std::exp(intercept)};
}

/// Geometric mean of tv within each decade of steps, as (decade start, mean).
inline std::vector<std::pair<double, double>> decade_smooth(const std::vector<std::pair<double, double>>& series) {
    std::map<int, std::pair<double, int>> acc;
    for (auto [x, y] : series) {
        if (!(x > 0) || !(y > 0)) continue;
        auto& [s, c] = acc[static_cast<int>(std::floor(std::log10(x) + 1e-12))];
        s += std::log(y);
        ++c;
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& [d, sc] : acc) out.push_back({std::pow(10.0, d), std::exp(sc.first / sc.second)});
    return out;
}

/// Empirical distribution of keys[0..count) against an exact distribution,
/// evaluated at each checkpoint.
template <class Key>
std::vector<std::pair<double, double>> tv_series(const std::vector<Key>& keys, const std::map<Key, double>& exact,
                                                 const std::vector<long>& checkpoints) {
    std::vector<std::pair<double, double>> out;
    std::map<Key, long> counts;
    std::size_t next = 0;
    for (long c : checkpoints) {
        if (c <= 0 || static_cast<std::size_t>(c) > keys.size()) continue;
        while (next < static_cast<std::size_t>(c)) ++counts[keys[next++]];
        std::map<Key, double> emp;
        for (const auto& [k, v] : counts) emp[k] = static_cast<double>(v) / static_cast<double>(c);
        out.push_back({static_cast<double>(c), total_variation(emp, exact)});
    }
    return out;
}

/// Roughly log-spaced checkpoints 1, 2, 5, 10, 20, 50, ... up to and including n.
inline std::vector<long> log_checkpoints(long n) {
    std::vector<long> out;
    for (long base = 1; base <= n; base *= 10)
        for (long m : {1L, 2L, 5L})
            if (base * m <= n) out.push_back(base * m);
    if (out.empty() || out.back() != n) out.push_back(n);
    return out;
}

// ---------------------------------------------------------------------------
// CSV emitters

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_left,bin_right,count\n";
    for (int k = 0; k < h.bins(); ++k) out << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
}

inline void write_series_csv(std::ostream& out, const std::vector<std::pair<double, double>>& s) {
    out << "steps,tv\n";
    for (auto [x, y] : s) out << static_cast<long>(x) << ',' << y << '\n';
}

} // namespace frcom
