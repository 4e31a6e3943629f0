#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "msab/core/linalg.hpp"

namespace msab {

struct OspaConfig {
    double cutoff = 200.0;  ///< c, meters
    double order = 1.0;     ///< p >= 1
    int window = 5;         ///< OSPA(2) sliding-window length, steps
    double window_weight_power = 0.0;  ///< 0 = uniform weights in the window

    void validate() const {
        if (!(cutoff > 0.0)) throw std::invalid_argument("OspaConfig: cutoff must be positive");
        if (order < 1.0) throw std::invalid_argument("OspaConfig: order must be >= 1");
        if (window < 1) throw std::invalid_argument("OspaConfig: window must be >= 1");
    }
};

/// Signed cardinality error (positive = overestimate).
inline int cardinality_error(int estimated, int truth) { return estimated - truth; }

namespace detail {

/// Minimum-cost assignment of rows to columns (rows <= cols), the classic
/// potentials formulation in O(n^2 m). Returns the column index per row.
inline std::vector<int> min_cost_assignment(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) throw std::invalid_argument("min_cost_assignment: needs rows <= cols");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[static_cast<std::size_t>(j)] > 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
    return row_to_col;
}

/// OSPA over a precomputed base-distance matrix whose entries are already
/// cutoff-saturated.
inline double ospa_from_distances(const Mat& d, double cutoff, double order) {
    const int nx = static_cast<int>(d.rows());
    const int ny = static_cast<int>(d.cols());
    if (nx == 0 && ny == 0) return 0.0;
    if (nx == 0 || ny == 0) return cutoff;
    const Mat& cost = nx <= ny ? d : Mat(d.transpose());
    const int n_small = static_cast<int>(cost.rows());
    const int n_large = static_cast<int>(cost.cols());
    const auto assign = min_cost_assignment(cost);
    double acc = std::pow(cutoff, order) * (n_large - n_small);
    for (int i = 0; i < n_small; ++i)
        acc += std::pow(cost(i, assign[static_cast<std::size_t>(i)]), order);
    return std::pow(acc / n_large, 1.0 / order);
}

}  // namespace detail

/// OSPA distance between two point sets (empty vs empty is 0, empty vs
/// non-empty is the cutoff; never exceeds the cutoff).
inline double ospa(const std::vector<Vec>& x, const std::vector<Vec>& y, const OspaConfig& cfg) {
    cfg.validate();
    Mat d(static_cast<int>(x.size()), static_cast<int>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            d(static_cast<int>(i), static_cast<int>(j)) =
                std::min(cfg.cutoff, (x[i] - y[j]).norm());
    return detail::ospa_from_distances(d, cfg.cutoff, cfg.order);
}

/// A track is a partial trajectory: step index -> position.
using TrackHistory = std::map<int, Vec>;
using TrackSet = std::vector<TrackHistory>;

namespace detail {

/// OSPA(2) base distance between two tracks over window [first, last]:
/// per-step cutoff-saturated distance (cutoff when exactly one exists, 0 when
/// neither), averaged over the steps where at least one exists.
inline double track_base_distance(const TrackHistory& a, const TrackHistory& b, int first,
                                  int last, const OspaConfig& cfg) {
    double acc = 0.0;
    int active = 0;
    for (int t = first; t <= last; ++t) {
        const auto ia = a.find(t);
        const auto ib = b.find(t);
        const bool in_a = ia != a.end();
        const bool in_b = ib != b.end();
        if (!in_a && !in_b) continue;
        ++active;
        if (in_a && in_b)
            acc += std::pow(std::min(cfg.cutoff, (ia->second - ib->second).norm()), cfg.order);
        else
            acc += std::pow(cfg.cutoff, cfg.order);
    }
    if (active == 0) return 0.0;
    return std::pow(acc / active, 1.0 / cfg.order);
}

}  // namespace detail

/// OSPA(2) at one step: OSPA over the sets of tracks active in the window
/// ending at `step`, under the time-averaged base distance.
inline double ospa2_at(const TrackSet& estimates, const TrackSet& truth, int step,
                       const OspaConfig& cfg) {
    cfg.validate();
    const int first = step - cfg.window + 1;
    auto active = [&](const TrackSet& set) {
        std::vector<const TrackHistory*> out;
        for (const auto& track : set)
            for (int t = std::max(first, 0); t <= step; ++t)
                if (track.count(t)) {
                    out.push_back(&track);
                    break;
                }
        return out;
    };
    const auto est_active = active(estimates);
    const auto truth_active = active(truth);
    Mat d(static_cast<int>(est_active.size()), static_cast<int>(truth_active.size()));
    for (std::size_t i = 0; i < est_active.size(); ++i)
        for (std::size_t j = 0; j < truth_active.size(); ++j)
            d(static_cast<int>(i), static_cast<int>(j)) = detail::track_base_distance(
                *est_active[i], *truth_active[j], first, step, cfg);
    return detail::ospa_from_distances(d, cfg.cutoff, cfg.order);
}

/// Per-step OSPA(2) sequence over [0, num_steps).
inline std::vector<double> ospa2(const TrackSet& estimates, const TrackSet& truth, int num_steps,
                                 const OspaConfig& cfg) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(num_steps));
    for (int k = 0; k < num_steps; ++k) out.push_back(ospa2_at(estimates, truth, k, cfg));
    return out;
}

}  // namespace msab
