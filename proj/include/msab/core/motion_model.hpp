#pragma once

#include <stdexcept>

#include "msab/core/linalg.hpp"
#include "msab/core/types.hpp"

namespace msab {

/// Linear transition x_+ = F x + w, w ~ N(0, Q).
struct MotionModel {
    Mat F;
    Mat Q;
    double dt = 1.0;

    MotionModel(Mat f, Mat q, double dt_) : F(std::move(f)), Q(std::move(q)), dt(dt_) {
        if (F.rows() != F.cols() || Q.rows() != Q.cols() || F.rows() != Q.rows())
            throw std::invalid_argument("MotionModel: dimension mismatch");
        if (!is_positive_semidefinite(Q))
            throw std::invalid_argument("MotionModel: Q must be symmetric positive semi-definite");
    }

    int dim() const { return static_cast<int>(F.rows()); }

    GaussianDensity predict(const GaussianDensity& g) const {
        Mat cov = F * g.cov() * F.transpose() + Q;
        cov = 0.5 * (cov + cov.transpose());
        return GaussianDensity(F * g.mean(), std::move(cov));
    }
};

/// Constant-velocity model on [px, vx, py, vy] with per-axis acceleration
/// noise sigma_a, Q = sigma_a^2 G G^T, G = [dt^2/2, dt] per axis.
inline MotionModel constant_velocity_model(double dt, double sigma_a) {
    Mat f = Mat::Identity(4, 4);
    f(0, 1) = dt;
    f(2, 3) = dt;
    Eigen::Vector2d g(dt * dt / 2.0, dt);
    const Mat q_axis = sigma_a * sigma_a * g * g.transpose();
    Mat q = Mat::Zero(4, 4);
    q.block<2, 2>(0, 0) = q_axis;
    q.block<2, 2>(2, 2) = q_axis;
    return MotionModel(std::move(f), std::move(q), dt);
}

}  // namespace msab
