#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "msab/core/linalg.hpp"
#include "msab/core/random.hpp"
#include "msab/core/types.hpp"

namespace msab {

using MeasurementSet = std::vector<Vec>;
using MultiSensorMeasurements = std::vector<MeasurementSet>;

/// z = H x + eta, eta ~ N(0, R).
struct LinearGaussian {
    Mat H;
    Mat R;
};

/// z = [bearing, range] of the target as seen from sensor_pos, with
/// bearing = atan2(sx - px, sy - py) (bearing-from-north style, sensor minus
/// target in both arguments) and additive noise N(0, R).
struct BearingRange {
    Eigen::Vector2d sensor_pos;
    Mat R;
    int position_x_dim = 0;  // state indices of planar position
    int position_y_dim = 2;
};

/// Detection probability, uniform clutter intensity over the observation
/// window, and the measurement likelihood for one sensor.
class SensorModel {
public:
    SensorModel(double detection_prob, double clutter_rate, double window_volume,
                std::variant<LinearGaussian, BearingRange> kind)
        : detection_prob_(detection_prob),
          clutter_rate_(clutter_rate),
          window_volume_(window_volume),
          kind_(std::move(kind)) {
        if (detection_prob_ < 0.0 || detection_prob_ > 1.0)
            throw std::invalid_argument("SensorModel: detection_prob outside [0,1]");
        if (!(clutter_rate_ > 0.0) || !(window_volume_ > 0.0))
            throw std::invalid_argument("SensorModel: clutter intensity must be positive");
        const Mat& r = noise_cov();
        if (!is_symmetric(r) || !is_positive_definite(r))
            throw std::invalid_argument("SensorModel: R must be symmetric positive definite");
    }

    double detection_prob() const { return detection_prob_; }
    double clutter_rate() const { return clutter_rate_; }
    double window_volume() const { return window_volume_; }
    const std::variant<LinearGaussian, BearingRange>& kind() const { return kind_; }

    bool is_linear() const { return std::holds_alternative<LinearGaussian>(kind_); }
    const LinearGaussian& linear() const { return std::get<LinearGaussian>(kind_); }
    const BearingRange& bearing_range() const { return std::get<BearingRange>(kind_); }

    const Mat& noise_cov() const {
        return std::visit([](const auto& k) -> const Mat& { return k.R; }, kind_);
    }

    int measurement_dim() const { return static_cast<int>(noise_cov().rows()); }

    /// kappa(z) = lambda_c * U(window); constant inside the window.
    double clutter_intensity(const Vec&) const { return clutter_rate_ / window_volume_; }
    double log_clutter_intensity(const Vec&) const {
        return std::log(clutter_rate_) - std::log(window_volume_);
    }

    /// h(x): noiseless measurement of state x.
    Vec observe(const Vec& x) const {
        if (is_linear()) return linear().H * x;
        const auto& br = bearing_range();
        const double dx = br.sensor_pos.x() - x(br.position_x_dim);
        const double dy = br.sensor_pos.y() - x(br.position_y_dim);
        Vec z(2);
        z << std::atan2(dx, dy), std::sqrt(dx * dx + dy * dy);
        return z;
    }

    double log_likelihood(const Vec& z, const Vec& x) const {
        Vec resid = z - observe(x);
        if (!is_linear()) resid(0) = wrap_angle(resid(0));
        return gaussian_log_pdf(resid, Vec::Zero(resid.size()), noise_cov());
    }

    double likelihood(const Vec& z, const Vec& x) const { return std::exp(log_likelihood(z, x)); }

    template <typename RngT>
    Vec sample_measurement(const Vec& x, RngT& rng) const {
        const auto llt = cholesky(noise_cov(), "sensor noise");
        Vec z = observe(x) + llt.matrixL() * rng.normal_vec(measurement_dim());
        if (!is_linear()) z(0) = wrap_angle(z(0));
        return z;
    }

private:
    double detection_prob_;
    double clutter_rate_;
    double window_volume_;
    std::variant<LinearGaussian, BearingRange> kind_;
};

using SensorList = std::vector<SensorModel>;

/// Eq.-(9)-style pseudolikelihood in log space: log(1 - p_D) for j = 0,
/// log(p_D g(z_j|x) / kappa(z_j)) for j > 0.
inline double log_pseudolikelihood(const Vec& x, int j, const MeasurementSet& z_set,
                                   const SensorModel& sensor) {
    if (j < 0 || j > static_cast<int>(z_set.size()))
        throw std::out_of_range("pseudolikelihood: measurement index out of range");
    if (j == 0) return std::log1p(-sensor.detection_prob());
    const Vec& z = z_set[static_cast<std::size_t>(j - 1)];
    return std::log(sensor.detection_prob()) + sensor.log_likelihood(z, x) -
           sensor.log_clutter_intensity(z);
}

inline double pseudolikelihood(const Vec& x, int j, const MeasurementSet& z_set,
                               const SensorModel& sensor) {
    return std::exp(log_pseudolikelihood(x, j, z_set, sensor));
}

/// Product over sensors of per-sensor pseudolikelihoods for tuple J, in log space.
inline double log_pseudolikelihood_tuple(const Vec& x, const MeasurementTuple& j,
                                         const MultiSensorMeasurements& z,
                                         const SensorList& sensors) {
    if (j.num_sensors() != static_cast<int>(sensors.size()))
        throw std::invalid_argument("pseudolikelihood tuple: sensor count mismatch");
    double acc = 0.0;
    for (int s = 0; s < j.num_sensors(); ++s)
        acc += log_pseudolikelihood(x, j[s], z[static_cast<std::size_t>(s)], sensors[static_cast<std::size_t>(s)]);
    return acc;
}

}  // namespace msab
