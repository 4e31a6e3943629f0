#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "msab/association.hpp"
#include "msab/core/types.hpp"

namespace msab {

struct BirthConfig {
    double r_b_max = 1.0;    ///< maximum existence probability of a newborn target
    double lambda_b = 0.5;   ///< expected number of births per step
    int min_detections = 2;  ///< tuples with fewer non-missed indices are dropped

    void validate() const {
        if (r_b_max < 0.0 || r_b_max > 1.0)
            throw std::invalid_argument("BirthConfig: r_b_max outside [0,1]");
        if (lambda_b < 0.0) throw std::invalid_argument("BirthConfig: lambda_b negative");
        if (min_detections < 0) throw std::invalid_argument("BirthConfig: min_detections negative");
    }
};

/// Effective birth probabilities r-hat(J) = r_U(J) psi-bar(J) / sum over the
/// sampled set. The normalizer runs over the sampled tuples (the Gibbs output
/// is precisely the high-mass set; the missing mass is the truncated tail).
/// Outputs sum to 1; an empty map signals that every numerator vanished.
template <typename Backend>
std::map<MeasurementTuple, double> effective_birth_probs(
    const std::vector<MeasurementTuple>& tuples, const AssociationTable& table,
    const Backend& backend) {
    if (tuples.empty()) throw std::invalid_argument("effective_birth_probs: no tuples");
    std::vector<double> log_terms;
    log_terms.reserve(tuples.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& j : tuples) {
        const double lt = log_unassociation_prob(j, table) + backend.log_psi_bar(j);
        log_terms.push_back(lt);
        max_log = std::max(max_log, lt);
    }
    std::map<MeasurementTuple, double> out;
    if (!std::isfinite(max_log)) return out;  // all numerators zero
    double total = 0.0;
    for (double lt : log_terms) total += std::exp(lt - max_log);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const double p = std::exp(log_terms[i] - max_log) / total;
        if (p > 0.0) out[tuples[i]] = p;
    }
    return out;
}

/// Assemble the truncated birth LMB from sampled tuples: drop tuples below
/// min_detections, renormalize r-hat over the survivors, set existence to
/// min(r_b_max, r-hat * lambda_b) and build each component's spatial
/// distribution (already predicted to step k+1 by the backend).
template <typename Backend, typename SpatialBuilder>
LmbDensity build_birth_lmb(const std::vector<MeasurementTuple>& tuples,
                           const AssociationTable& table, const Backend& backend,
                           SpatialBuilder&& spatial_builder, const BirthConfig& cfg,
                           int timestep) {
    cfg.validate();
    std::vector<MeasurementTuple> survivors;
    for (const auto& j : tuples)
        if (j.non_missed_count() >= cfg.min_detections) survivors.push_back(j);

    LmbDensity birth;
    if (survivors.empty()) return birth;
    const auto r_hat = effective_birth_probs(survivors, table, backend);
    for (const auto& [tuple, p] : r_hat) {
        const double existence = std::min(cfg.r_b_max, p * cfg.lambda_b);
        if (!(existence > 0.0)) continue;
        try {
            birth.add(BernoulliComponent(tuple_to_label(tuple, timestep), existence,
                                         spatial_builder(tuple)));
        } catch (const InconsistentTupleError&) {
            // A Monte Carlo backend can report zero support for a tuple whose
            // own psi-bar draw was barely positive; such a component carries
            // no usable spatial information and is dropped.
        }
    }
    return birth;
}

}  // namespace msab
