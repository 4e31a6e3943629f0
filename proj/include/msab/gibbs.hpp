#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "msab/association.hpp"
#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab {

struct GibbsConfig {
    int iterations = 1000;              ///< T, number of full Gibbs sweeps
    std::optional<int> restart_period;  ///< reset chain to all-missed every N sweeps
    std::uint64_t rng_seed = 0;
    double tau = 1.0;        ///< mask indices with r_A(j) > tau; index 0 never masked
    int min_detections = 0;  ///< tuples below this are chain state only, not returned
};

struct GibbsResult {
    /// Distinct visited tuples in first-visit order, min_detections applied.
    std::vector<MeasurementTuple> tuples;
    /// Sweep-end visit counts over all recorded tuples (pre-filter); sums to T
    /// minus nothing: exactly one tuple is recorded per sweep.
    std::map<MeasurementTuple, int> visit_counts;
    /// Sensors whose conditional weights were all zero (forced missed detection).
    int forced_missed_fallbacks = 0;
};

/// One coordinate update: returns J with coordinate s redrawn categorically
/// from `weights` (length m^{(s)}+1). All-zero weights are a contract
/// violation; the sampler applies its fallback before calling.
template <typename RngT>
MeasurementTuple chain_step(const MeasurementTuple& j, int s, std::span<const double> weights,
                            RngT& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("chain_step: all-zero weights");
    return j.with_index(s, rng.categorical(weights));
}

/// Gibbs sampler over measurement tuples. Starts from the all-missed tuple,
/// visits sensors in a freshly shuffled order each sweep, draws each
/// coordinate from the backend's conditional weights restricted to the
/// unmasked candidate set, and records the sweep-end tuple. Requires
/// p_D < 1 and r_A < 1 for the irreducibility argument to hold.
template <typename Backend>
GibbsResult sample_birth_tuples(const MultiSensorMeasurements& z, const SensorList& sensors,
                                const AssociationTable& table, const Backend& backend,
                                const GibbsConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("GibbsConfig: iterations must be >= 1");
    if (cfg.restart_period && *cfg.restart_period < 1)
        throw std::invalid_argument("GibbsConfig: restart_period must be >= 1");
    if (cfg.tau < 0.0 || cfg.tau > 1.0)
        throw std::invalid_argument("GibbsConfig: tau outside [0,1]");
    const int num_sensors = static_cast<int>(sensors.size());
    if (static_cast<int>(z.size()) != num_sensors || table.num_sensors() != num_sensors)
        throw std::invalid_argument("sample_birth_tuples: dimension mismatch");

    // Remark-1 pre-pruning: keep index 0 plus indices with r_A(j) <= tau.
    std::vector<std::vector<int>> candidates(static_cast<std::size_t>(num_sensors));
    for (int s = 0; s < num_sensors; ++s) {
        candidates[static_cast<std::size_t>(s)].push_back(0);
        for (int j = 1; j <= static_cast<int>(z[static_cast<std::size_t>(s)].size()); ++j)
            if (table.entry(s, j) <= cfg.tau) candidates[static_cast<std::size_t>(s)].push_back(j);
    }

    Rng rng(cfg.rng_seed);
    MeasurementTuple current = MeasurementTuple::all_missed(num_sensors);
    std::vector<int> order(static_cast<std::size_t>(num_sensors));
    std::iota(order.begin(), order.end(), 0);

    GibbsResult result;
    for (int t = 1; t <= cfg.iterations; ++t) {
        rng.shuffle(order);
        for (int s : order) {
            const auto& cand = candidates[static_cast<std::size_t>(s)];
            if (cand.size() == 1) {  // only index 0 survives masking
                current = current.with_index(s, 0);
                continue;
            }
            const std::vector<double> w = backend.conditional_weights(s, current, table, cand);
            double total = 0.0;
            for (double wi : w) total += wi;
            if (!(total > 0.0)) {
                current = current.with_index(s, 0);
                ++result.forced_missed_fallbacks;
                continue;
            }
            current = chain_step(current, s, w, rng);
        }
        auto [it, inserted] = result.visit_counts.try_emplace(current, 0);
        ++it->second;
        if (it->second == 1 && current.non_missed_count() >= cfg.min_detections)
            result.tuples.push_back(current);
        if (cfg.restart_period && t % *cfg.restart_period == 0)
            current = MeasurementTuple::all_missed(num_sensors);
    }
    return result;
}

}  // namespace msab
