#pragma once

#include <Eigen/Dense>
#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace msab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kLog2Pi = 1.8378770664093454836;

/// Relative symmetry check: ||P - P^T||_inf < tol * ||P||_inf (zero matrix passes).
inline bool is_symmetric(const Mat& p, double tol = 1e-9) {
    const double scale = p.lpNorm<Eigen::Infinity>();
    if (scale == 0.0) return true;
    return (p - p.transpose()).lpNorm<Eigen::Infinity>() < tol * scale;
}

/// Positive definite with an eigenvalue floor of 1e-12 * trace.
inline bool is_positive_definite(const Mat& p) {
    if (p.rows() == 0) return true;
    if (!is_symmetric(p)) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(p, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().minCoeff() > 1e-12 * p.trace();
}

inline bool is_positive_semidefinite(const Mat& q) {
    if (!is_symmetric(q)) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(q, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().minCoeff() > -1e-9 * (std::abs(q.trace()) + 1.0);
}

inline Eigen::LLT<Mat> cholesky(const Mat& p, const char* what) {
    Eigen::LLT<Mat> llt(p);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(std::string("cholesky factorization failed: ") + what);
    return llt;
}

inline double log_det_from_llt(const Eigen::LLT<Mat>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline double log_det_spd(const Mat& p, const char* what = "matrix") {
    return log_det_from_llt(cholesky(p, what));
}

/// log N(x; mean, cov) for SPD cov.
inline double gaussian_log_pdf(const Vec& x, const Vec& mean, const Mat& cov) {
    const auto llt = cholesky(cov, "gaussian_log_pdf covariance");
    const Vec d = x - mean;
    const Vec half = llt.matrixL().solve(d);
    return -0.5 * (x.size() * kLog2Pi + log_det_from_llt(llt) + half.squaredNorm());
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

}  // namespace msab
