#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab {

/// Per-sensor association probabilities r_A(j) for j in {1..m}; r_A(0) is 0
/// by convention. Entries are clamped to [0, 1-1e-9] so no detected index is
/// ever assigned exactly zero sampling probability across the board, which
/// preserves the Gibbs chain's irreducibility.
class AssociationTable {
public:
    static constexpr double kMaxEntry = 1.0 - 1e-9;

    AssociationTable() = default;
    explicit AssociationTable(std::vector<Vec> per_sensor) : per_sensor_(std::move(per_sensor)) {
        for (auto& v : per_sensor_)
            for (int j = 0; j < v.size(); ++j) {
                if (!(v(j) >= 0.0) || !(v(j) <= 1.0))
                    throw std::invalid_argument("AssociationTable: entry outside [0,1]");
                v(j) = std::min(v(j), kMaxEntry);
            }
    }

    static AssociationTable zeros(const MultiSensorMeasurements& z) {
        std::vector<Vec> vs;
        vs.reserve(z.size());
        for (const auto& zs : z) vs.push_back(Vec::Zero(static_cast<int>(zs.size())));
        return AssociationTable(std::move(vs));
    }

    int num_sensors() const { return static_cast<int>(per_sensor_.size()); }
    int num_measurements(int s) const { return static_cast<int>(per_sensor_.at(static_cast<std::size_t>(s)).size()); }

    /// r_A(j) with the r_A(0) = 0 convention.
    double entry(int s, int j) const {
        const Vec& v = per_sensor_.at(static_cast<std::size_t>(s));
        if (j == 0) return 0.0;
        if (j < 0 || j > v.size()) throw std::out_of_range("AssociationTable: index out of range");
        return v(j - 1);
    }

    const std::vector<Vec>& per_sensor() const { return per_sensor_; }

private:
    std::vector<Vec> per_sensor_;
};

/// r_U(J) = prod_s (1 - r_A(j_s)): probability the whole tuple is
/// unassociated with existing tracks.
inline double unassociation_prob(const MeasurementTuple& j, const AssociationTable& table) {
    if (j.num_sensors() != table.num_sensors())
        throw std::invalid_argument("unassociation_prob: sensor count mismatch");
    double r_u = 1.0;
    for (int s = 0; s < j.num_sensors(); ++s) r_u *= 1.0 - table.entry(s, j[s]);
    return r_u;
}

inline double log_unassociation_prob(const MeasurementTuple& j, const AssociationTable& table) {
    if (j.num_sensors() != table.num_sensors())
        throw std::invalid_argument("unassociation_prob: sensor count mismatch");
    double acc = 0.0;
    for (int s = 0; s < j.num_sensors(); ++s) acc += std::log1p(-table.entry(s, j[s]));
    return acc;
}

namespace detail {

/// Predictive likelihood <p, g(z|.)> of one measurement under a component's
/// spatial distribution. Linear sensors on Gaussian densities evaluate the
/// innovation density; everything else integrates over particles.
inline double predictive_likelihood(const SpatialDistribution& spatial, const Vec& z,
                                    const SensorModel& sensor) {
    if (std::holds_alternative<GaussianDensity>(spatial)) {
        if (!sensor.is_linear())
            throw std::invalid_argument(
                "predictive_likelihood: Gaussian spatial requires a linear sensor");
        const auto& g = std::get<GaussianDensity>(spatial);
        const auto& lin = sensor.linear();
        const Mat s_innov = lin.H * g.cov() * lin.H.transpose() + lin.R;
        return std::exp(gaussian_log_pdf(z, lin.H * g.mean(), s_innov));
    }
    const auto& p = std::get<ParticleSet>(spatial);
    double acc = 0.0;
    for (int n = 0; n < p.size(); ++n)
        acc += p.weights()(n) * sensor.likelihood(z, p.states().col(n));
    return acc;
}

/// Unnormalized Bernoulli association branch weights for one track:
/// index 0 holds the no-detection branch 1 - r + r(1 - p_D), index j > 0
/// holds r p_D <p, g(z_j|.)> / kappa(z_j).
inline std::vector<double> bernoulli_branch_weights(const BernoulliComponent& track,
                                                    const MeasurementSet& z_set,
                                                    const SensorModel& sensor) {
    const double r = track.existence;
    const double pd = sensor.detection_prob();
    std::vector<double> w(z_set.size() + 1);
    w[0] = 1.0 - r + r * (1.0 - pd);
    for (std::size_t j = 0; j < z_set.size(); ++j) {
        const Vec& z = z_set[j];
        w[j + 1] = r * pd * predictive_likelihood(track.spatial, z, sensor) /
                   sensor.clutter_intensity(z);
    }
    return w;
}

}  // namespace detail

/// Marginal probability, per measurement, that some existing track generated
/// it: r_A(j) = min(1, sum_t beta_tj) from track-local normalized branch
/// weights. Surrogate for the delta-GLMB hypothesis sum of Eq.-(15) style,
/// matching the iterated-corrector LMB harness.
inline Vec lmb_association_probs(const LmbDensity& prior, const MeasurementSet& z_set,
                                 const SensorModel& sensor) {
    Vec r_a = Vec::Zero(static_cast<int>(z_set.size()));
    for (const auto& track : prior.components()) {
        const auto w = detail::bernoulli_branch_weights(track, z_set, sensor);
        double total = 0.0;
        for (double wi : w) total += wi;
        if (!(total > 0.0)) continue;
        for (std::size_t j = 0; j < z_set.size(); ++j)
            r_a(static_cast<int>(j)) += w[j + 1] / total;
    }
    for (int j = 0; j < r_a.size(); ++j) r_a(j) = std::min(r_a(j), 1.0);
    return r_a;
}

}  // namespace msab
