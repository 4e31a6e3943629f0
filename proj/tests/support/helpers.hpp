#pragma once

#include <vector>

#include "msab/core/motion_model.hpp"
#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab::test {

/// Random SPD matrix A A^T + eps I with controlled scale.
inline Mat random_spd(Rng& rng, int dim, double scale) {
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.normal() * scale;
    return a * a.transpose() + 0.1 * scale * scale * Mat::Identity(dim, dim);
}

/// Sensor observing the full state through H = I with isotropic noise.
inline SensorModel identity_sensor(int dim, double sigma, double p_d = 0.95,
                                   double clutter_rate = 1.0, double window_volume = 1e8) {
    return SensorModel(p_d, clutter_rate, window_volume,
                       LinearGaussian{Mat::Identity(dim, dim),
                                      sigma * sigma * Mat::Identity(dim, dim)});
}

/// XY-position sensor on the [px, vx, py, vy] state layout.
inline SensorModel position_sensor(double sigma, double p_d = 0.95, double clutter_rate = 1.0,
                                   double window_volume = 1e8) {
    Mat h = Mat::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return SensorModel(p_d, clutter_rate, window_volume,
                       LinearGaussian{std::move(h), sigma * sigma * Mat::Identity(2, 2)});
}

inline MeasurementTuple tuple_of(std::vector<int> idx) { return MeasurementTuple(std::move(idx)); }

}  // namespace msab::test
