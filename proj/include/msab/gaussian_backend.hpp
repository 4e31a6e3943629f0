#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "msab/association.hpp"
#include "msab/core/motion_model.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab {

/// Information-form accumulator for one measurement tuple:
///   M = P0^-1 + sum_{j>0} H^T R^-1 H
///   b = P0^-1 mu0 + sum_{j>0} H^T R^-1 z
///   c = mu0^T P0^-1 mu0 + sum_{j>0} z^T R^-1 z
/// log_norm carries the log of the detection/clutter/determinant prefactors
/// (including -1/2 log det P0); the c term is kept separate and never folded
/// into normalization, since the exponential would underflow otherwise.
struct InfoAccumulator {
    Mat M;
    Vec b;
    double c = 0.0;
    double log_norm = 0.0;
};

/// Inverses and products that do not depend on the tuple, computed once per
/// (prior, sensor set, measurement set) binding.
class PrecomputeCache {
public:
    PrecomputeCache(const GaussianDensity& prior, const SensorList& sensors,
                    const MultiSensorMeasurements& z) {
        const int d = prior.dim();
        p0_inv_ = prior.llt().solve(Mat::Identity(d, d));
        p0_inv_mu_ = p0_inv_ * prior.mean();
        c0_ = prior.mean().dot(p0_inv_mu_);
        log_det_p0_ = log_det_from_llt(prior.llt());

        if (z.size() != sensors.size())
            throw std::invalid_argument("PrecomputeCache: sensor/measurement count mismatch");
        for (std::size_t s = 0; s < sensors.size(); ++s) {
            const SensorModel& sensor = sensors[s];
            if (!sensor.is_linear())
                throw std::invalid_argument(
                    "PrecomputeCache: closed-form backend requires linear-Gaussian sensors");
            const auto& lin = sensor.linear();
            if (lin.H.cols() != d)
                throw std::invalid_argument("PrecomputeCache: H column count != state dim");
            PerSensor ps;
            const auto r_llt = cholesky(lin.R, "sensor R");
            const Mat r_inv = r_llt.solve(Mat::Identity(lin.R.rows(), lin.R.cols()));
            ps.ht_rinv = lin.H.transpose() * r_inv;
            ps.ht_rinv_h = ps.ht_rinv * lin.H;
            ps.log_det_r = log_det_from_llt(r_llt);
            ps.nz = static_cast<int>(lin.R.rows());
            ps.log_pd = std::log(sensor.detection_prob());
            ps.log_one_minus_pd = std::log1p(-sensor.detection_prob());
            for (const Vec& zj : z[s]) {
                ps.ht_rinv_z.push_back(ps.ht_rinv * zj);
                ps.z_rinv_z.push_back(zj.dot(r_inv * zj));
                ps.log_kappa.push_back(sensor.log_clutter_intensity(zj));
            }
            per_sensor_.push_back(std::move(ps));
        }
    }

    struct PerSensor {
        Mat ht_rinv;
        Mat ht_rinv_h;
        double log_det_r = 0.0;
        int nz = 0;
        double log_pd = 0.0;
        double log_one_minus_pd = 0.0;
        std::vector<Vec> ht_rinv_z;
        std::vector<double> z_rinv_z;
        std::vector<double> log_kappa;
    };

    int state_dim() const { return static_cast<int>(p0_inv_.rows()); }
    int num_sensors() const { return static_cast<int>(per_sensor_.size()); }
    int num_measurements(int s) const {
        return static_cast<int>(per_sensor_.at(static_cast<std::size_t>(s)).ht_rinv_z.size());
    }
    const Mat& p0_inv() const { return p0_inv_; }
    const Vec& p0_inv_mu() const { return p0_inv_mu_; }
    double c0() const { return c0_; }
    double log_det_p0() const { return log_det_p0_; }
    const PerSensor& sensor(int s) const { return per_sensor_.at(static_cast<std::size_t>(s)); }

private:
    Mat p0_inv_;
    Vec p0_inv_mu_;
    double c0_ = 0.0;
    double log_det_p0_ = 0.0;
    std::vector<PerSensor> per_sensor_;
};

/// Closed-form conditional-distribution backend for linear-Gaussian models:
/// psi-bar, the per-sensor sampling distribution, and the birth spatial
/// distribution, all evaluated in log space.
class GaussianBackend {
public:
    GaussianBackend(MultiSensorMeasurements z, SensorList sensors, GaussianDensity prior)
        : z_(std::move(z)),
          sensors_(std::move(sensors)),
          prior_(std::move(prior)),
          cache_(prior_, sensors_, z_) {}

    const PrecomputeCache& cache() const { return cache_; }
    const MultiSensorMeasurements& measurements() const { return z_; }
    const SensorList& sensors() const { return sensors_; }
    int num_sensors() const { return cache_.num_sensors(); }
    int num_measurements(int s) const { return cache_.num_measurements(s); }

    /// Information-form sums over the detected indices of J.
    InfoAccumulator accumulate(const MeasurementTuple& j) const {
        check_tuple(j);
        InfoAccumulator acc;
        acc.M = cache_.p0_inv();
        acc.b = cache_.p0_inv_mu();
        acc.c = cache_.c0();
        acc.log_norm = -0.5 * cache_.log_det_p0();
        for (int s = 0; s < j.num_sensors(); ++s) add_sensor(acc, s, j[s]);
        return acc;
    }

    /// log psi-bar(J): the expected multi-sensor pseudolikelihood under the
    /// birth prior. Detection/clutter and determinant products run over
    /// detected sensors only; a missed sensor contributes log(1 - p_D).
    double log_psi_bar(const MeasurementTuple& j) const {
        return finish(accumulate(j));
    }

    /// Sampling distribution over candidate indices at sensor s given the
    /// rest of the tuple: weight(0) from (1-p_D) det(M_{J-s})^{-1/2} Phi_{J-s},
    /// weight(j>0) from [(2pi)^nz det(M_J) det(R)]^{-1/2} (1-r_A) (p_D/kappa) Phi_J.
    /// Entries not in `candidates` are zero. Exponentiated after max-subtraction.
    std::vector<double> conditional_weights(int s, const MeasurementTuple& j,
                                            const AssociationTable& table,
                                            std::span<const int> candidates) const {
        check_tuple(j);
        const int m = cache_.num_measurements(s);
        const auto& ps = cache_.sensor(s);

        InfoAccumulator base;
        base.M = cache_.p0_inv();
        base.b = cache_.p0_inv_mu();
        base.c = cache_.c0();
        for (int s2 = 0; s2 < j.num_sensors(); ++s2) {
            if (s2 == s || j[s2] == 0) continue;
            const auto& ps2 = cache_.sensor(s2);
            const std::size_t idx = static_cast<std::size_t>(j[s2] - 1);
            base.M += ps2.ht_rinv_h;
            base.b += ps2.ht_rinv_z[idx];
            base.c += ps2.z_rinv_z[idx];
        }

        std::vector<double> log_w(static_cast<std::size_t>(m) + 1,
                                  -std::numeric_limits<double>::infinity());
        bool any = false;
        Eigen::LLT<Mat> llt_det;  // factorization of M_J, shared by all j > 0
        bool have_det = false;
        for (int cand : candidates) {
            if (cand < 0 || cand > m)
                throw std::out_of_range("conditional_weights: candidate index out of range");
            if (cand == 0) {
                const auto llt = cholesky(base.M, "M_{J-s}");
                const double quad = base.b.dot(llt.solve(base.b));
                log_w[0] = ps.log_one_minus_pd - 0.5 * log_det_from_llt(llt) -
                           0.5 * (base.c - quad);
            } else {
                if (!have_det) {
                    llt_det = cholesky(base.M + ps.ht_rinv_h, "M_J");
                    have_det = true;
                }
                const std::size_t idx = static_cast<std::size_t>(cand - 1);
                const Vec b_j = base.b + ps.ht_rinv_z[idx];
                const double c_j = base.c + ps.z_rinv_z[idx];
                const double quad = b_j.dot(llt_det.solve(b_j));
                log_w[static_cast<std::size_t>(cand)] =
                    -0.5 * (ps.nz * kLog2Pi + log_det_from_llt(llt_det) + ps.log_det_r) +
                    std::log1p(-table.entry(s, cand)) + ps.log_pd - ps.log_kappa[idx] -
                    0.5 * (c_j - quad);
            }
            any = true;
        }
        if (!any) throw std::invalid_argument("conditional_weights: empty candidate set");

        double max_log = -std::numeric_limits<double>::infinity();
        for (double lw : log_w) max_log = std::max(max_log, lw);
        std::vector<double> w(log_w.size(), 0.0);
        if (std::isfinite(max_log))
            for (std::size_t i = 0; i < log_w.size(); ++i)
                if (std::isfinite(log_w[i])) w[i] = std::exp(log_w[i] - max_log);
        return w;
    }

    /// Theorem-5 spatial distribution: N(F M_J^-1 b_J, F M_J^-1 F^T + Q).
    /// For the all-missed tuple this is the predicted prior.
    GaussianDensity birth_spatial(const MeasurementTuple& j, const MotionModel& motion) const {
        const InfoAccumulator acc = accumulate(j);
        const auto llt = cholesky(acc.M, "M_J");
        const Mat m_inv = llt.solve(Mat::Identity(acc.M.rows(), acc.M.cols()));
        const Vec mu = m_inv * acc.b;
        Mat cov = motion.F * m_inv * motion.F.transpose() + motion.Q;
        cov = 0.5 * (cov + cov.transpose());
        return GaussianDensity(motion.F * mu, std::move(cov));
    }

private:
    void add_sensor(InfoAccumulator& acc, int s, int j) const {
        const auto& ps = cache_.sensor(s);
        if (j == 0) {
            acc.log_norm += ps.log_one_minus_pd;
            return;
        }
        const std::size_t idx = static_cast<std::size_t>(j - 1);
        acc.M += ps.ht_rinv_h;
        acc.b += ps.ht_rinv_z[idx];
        acc.c += ps.z_rinv_z[idx];
        acc.log_norm += ps.log_pd - ps.log_kappa[idx] - 0.5 * (ps.nz * kLog2Pi + ps.log_det_r);
    }

    double finish(const InfoAccumulator& acc) const {
        const auto llt = cholesky(acc.M, "M_J");
        const double quad = acc.b.dot(llt.solve(acc.b));
        return acc.log_norm - 0.5 * log_det_from_llt(llt) - 0.5 * (acc.c - quad);
    }

    void check_tuple(const MeasurementTuple& j) const {
        if (j.num_sensors() != cache_.num_sensors())
            throw std::invalid_argument("GaussianBackend: tuple sensor count mismatch");
        for (int s = 0; s < j.num_sensors(); ++s)
            if (j[s] < 0 || j[s] > cache_.num_measurements(s))
                throw std::out_of_range("GaussianBackend: tuple index out of range");
    }

    MultiSensorMeasurements z_;
    SensorList sensors_;
    GaussianDensity prior_;
    PrecomputeCache cache_;
};

}  // namespace msab
