#pragma once

#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"
#include "support/helpers.hpp"

namespace msab::test {

struct Instance2d {
    MultiSensorMeasurements z;
    SensorList sensors;
    GaussianDensity prior;
};

/// Random 2D linear instance: full-state sensors, moderate covariances so a
/// quadrature box around the prior captures everything.
inline Instance2d random_instance_2d(Rng& rng, int num_sensors, int meas_per_sensor) {
    const Vec mu0 = rng.normal_vec(2) * 3.0;
    const Mat p0 = random_spd(rng, 2, 4.0);
    GaussianDensity prior(mu0, p0);

    Instance2d inst{{}, {}, prior};
    for (int s = 0; s < num_sensors; ++s) {
        Mat h = Mat::Identity(2, 2);
        h(0, 0) = 0.5 + rng.uniform();
        h(1, 1) = 0.5 + rng.uniform();
        Mat r = random_spd(rng, 2, 2.0) + 4.0 * Mat::Identity(2, 2);
        inst.sensors.emplace_back(0.8 + 0.15 * rng.uniform(), 1.0 + rng.uniform(), 1e4,
                                  LinearGaussian{h, r});
        MeasurementSet z_s;
        for (int j = 0; j < meas_per_sensor; ++j) {
            const Vec x_true = mu0 + rng.normal_vec(2) * 2.0;
            z_s.push_back(inst.sensors.back().observe(x_true) + rng.normal_vec(2) * 1.5);
        }
        inst.z.push_back(std::move(z_s));
    }
    return inst;
}

inline MeasurementTuple random_tuple(Rng& rng, const MultiSensorMeasurements& z) {
    std::vector<int> idx;
    for (const auto& zs : z) idx.push_back(rng.uniform_int(static_cast<int>(zs.size()) + 1));
    return MeasurementTuple(idx);
}

}  // namespace msab::test
