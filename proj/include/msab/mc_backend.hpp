#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "msab/association.hpp"
#include "msab/core/motion_model.hpp"
#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab {

/// Axis-aligned box prior over the observable state dimensions.
struct UniformBox {
    Vec lo;
    Vec hi;
};

/// Birth prior factored into observable and unobservable state partitions,
/// p_B(x) = p_B^o(x_o) p_B^u(x_u).
struct BirthPrior {
    std::variant<UniformBox, GaussianDensity> observable;
    GaussianDensity unobservable;
    std::vector<int> observable_dims;
    std::vector<int> unobservable_dims;

    int state_dim() const {
        return static_cast<int>(observable_dims.size() + unobservable_dims.size());
    }

    void validate() const {
        std::vector<bool> seen(static_cast<std::size_t>(state_dim()), false);
        auto mark = [&](const std::vector<int>& dims) {
            for (int d : dims) {
                if (d < 0 || d >= state_dim() || seen[static_cast<std::size_t>(d)])
                    throw std::invalid_argument("BirthPrior: dims must partition the state");
                seen[static_cast<std::size_t>(d)] = true;
            }
        };
        mark(observable_dims);
        mark(unobservable_dims);
        const int dim_o = static_cast<int>(observable_dims.size());
        if (std::holds_alternative<UniformBox>(observable)) {
            const auto& box = std::get<UniformBox>(observable);
            if (box.lo.size() != dim_o || box.hi.size() != dim_o ||
                ((box.hi - box.lo).array() <= 0.0).any())
                throw std::invalid_argument("BirthPrior: degenerate box");
        } else if (std::get<GaussianDensity>(observable).dim() != dim_o) {
            throw std::invalid_argument("BirthPrior: observable Gaussian dim mismatch");
        }
        if (unobservable.dim() != static_cast<int>(unobservable_dims.size()))
            throw std::invalid_argument("BirthPrior: unobservable dim mismatch");
    }

    double log_pdf_observable(const Vec& x_o) const {
        if (std::holds_alternative<UniformBox>(observable)) {
            const auto& box = std::get<UniformBox>(observable);
            for (int i = 0; i < x_o.size(); ++i)
                if (x_o(i) < box.lo(i) || x_o(i) > box.hi(i))
                    return -std::numeric_limits<double>::infinity();
            return -std::log((box.hi - box.lo).prod());
        }
        return std::get<GaussianDensity>(observable).log_pdf(x_o);
    }
};

/// Importance-sampling draw anchored at one non-missed measurement of the
/// conditioning tuple. Weights are the raw (unnormalized) values of Eq.-(29)
/// form: psi^J(x_n) p_B^o(x_{n,o}) / q^o(x_{n,o}).
struct ProposalDraw {
    int anchor_sensor = -1;
    int anchor_index = 0;  // > 0 by construction
    Mat states;            // state_dim x N
    Vec weights;
    Vec log_prior_over_proposal;  // per-particle log(p_B^o / q^o)
};

/// Monte Carlo estimate of psi-bar: the mean of the raw importance weights.
/// Returns 0 when every weight vanished (geometrically inconsistent tuple).
inline double psi_bar_mc(const ProposalDraw& draw) {
    if (draw.weights.size() == 0) throw std::invalid_argument("psi_bar_mc: empty draw");
    return draw.weights.mean();
}

/// Importance-sampling backend for nonlinear (bearing-range) sensors and
/// partially uniform priors. Holds its own deterministic RNG stream; one
/// backend instance serves one Gibbs chain.
class McBackend {
public:
    McBackend(MultiSensorMeasurements z, SensorList sensors, BirthPrior prior, int n_particles,
              std::uint64_t seed)
        : z_(std::move(z)),
          sensors_(std::move(sensors)),
          prior_(std::move(prior)),
          n_particles_(n_particles),
          rng_(seed) {
        if (n_particles_ < 1) throw std::invalid_argument("McBackend: n_particles must be >= 1");
        if (z_.size() != sensors_.size())
            throw std::invalid_argument("McBackend: sensor/measurement count mismatch");
        prior_.validate();
        linear_inverse_.resize(sensors_.size());
        const int dim_o = static_cast<int>(prior_.observable_dims.size());
        for (std::size_t s = 0; s < sensors_.size(); ++s) {
            const auto& sensor = sensors_[s];
            if (sensor.measurement_dim() != dim_o)
                throw std::invalid_argument(
                    "McBackend: anchor inversion needs measurement_dim == observable dim");
            PerSensor ps;
            const auto r_llt = cholesky(sensor.noise_cov(), "sensor R");
            ps.r_inv = r_llt.solve(Mat::Identity(dim_o, dim_o));
            ps.log_det_r = log_det_from_llt(r_llt);
            ps.log_pd = std::log(sensor.detection_prob());
            ps.log_one_minus_pd = std::log1p(-sensor.detection_prob());
            if (sensor.is_linear()) prepare_linear_inverse(static_cast<int>(s));
            for (const Vec& zj : z_[s]) {
                Anchor a;
                a.mean_obs = observation_inverse(static_cast<int>(s), zj);
                Mat jac = inverse_jacobian(static_cast<int>(s), zj);
                Mat cov = jac * sensor.noise_cov() * jac.transpose();
                cov = 0.5 * (cov + cov.transpose());
                const auto llt = cholesky(cov, "proposal covariance");
                a.transform = llt.matrixL();
                a.log_det_cov = log_det_from_llt(llt);
                ps.anchors.push_back(std::move(a));
                ps.log_kappa.push_back(sensor.log_clutter_intensity(zj));
            }
            per_sensor_.push_back(std::move(ps));
        }
    }

    int num_sensors() const { return static_cast<int>(sensors_.size()); }
    int num_measurements(int s) const {
        return static_cast<int>(z_.at(static_cast<std::size_t>(s)).size());
    }
    int n_particles() const { return n_particles_; }
    const SensorList& sensors() const { return sensors_; }
    const MultiSensorMeasurements& measurements() const { return z_; }
    const BirthPrior& prior() const { return prior_; }
    int degeneracy_count() const { return degeneracy_count_; }

    /// h^{(s),-1}(z): the observable state consistent with measurement z.
    /// Bearing-range: sensor_pos - r (sin a, cos a) under the bearing
    /// convention atan2(sx - px, sy - py). Linear sensors invert the
    /// observable block of H.
    Vec observation_inverse(int s, const Vec& z) const {
        const SensorModel& sensor = sensors_.at(static_cast<std::size_t>(s));
        if (sensor.is_linear()) return linear_observable_inverse(s) * z;
        const auto& br = sensor.bearing_range();
        const double a = z(0);
        const double r = z(1);
        Vec x_o(2);
        x_o << br.sensor_pos.x() - r * std::sin(a), br.sensor_pos.y() - r * std::cos(a);
        return x_o;
    }

    /// Jacobian of h^{-1} at z.
    Mat inverse_jacobian(int s, const Vec& z) const {
        const SensorModel& sensor = sensors_.at(static_cast<std::size_t>(s));
        if (sensor.is_linear()) return linear_observable_inverse(s);
        const double a = z(0);
        const double r = z(1);
        Mat jac(2, 2);
        jac << -r * std::cos(a), -std::sin(a), r * std::sin(a), -std::cos(a);
        return jac;
    }

    /// Pseudolikelihood evaluation against the precomputed per-sensor noise
    /// inverses; this is the hot path of Algorithm 2.
    double log_pseudo(int s, int j, const Vec& x) const {
        const auto& ps = per_sensor_[static_cast<std::size_t>(s)];
        if (j == 0) return ps.log_one_minus_pd;
        const SensorModel& sensor = sensors_[static_cast<std::size_t>(s)];
        Vec resid = z_[static_cast<std::size_t>(s)][static_cast<std::size_t>(j - 1)] -
                    sensor.observe(x);
        if (!sensor.is_linear()) resid(0) = wrap_angle(resid(0));
        const double quad = resid.dot(ps.r_inv * resid);
        return ps.log_pd - ps.log_kappa[static_cast<std::size_t>(j - 1)] -
               0.5 * (resid.size() * kLog2Pi + ps.log_det_r + quad);
    }

    double log_pseudo_tuple(const MeasurementTuple& j, const Vec& x) const {
        double acc = 0.0;
        for (int s = 0; s < j.num_sensors(); ++s) acc += log_pseudo(s, j[s], x);
        return acc;
    }

    /// Algorithm-2/3 proposal: anchor uniformly among the non-missed indices
    /// of J, sample observable coordinates from N(h^-1(z), Jac R Jac^T) and
    /// unobservable ones from the prior, and weight per Eq. (29).
    ProposalDraw draw_proposal(const MeasurementTuple& j) const {
        check_tuple(j);
        std::vector<std::pair<int, int>> detections = non_missed(j);
        if (detections.empty())
            throw std::invalid_argument("draw_proposal: tuple has no non-missed index");
        Rng call_rng = rng_.spawn(++call_counter_);
        const auto [s_a, j_a] = detections[static_cast<std::size_t>(
            call_rng.uniform_int(static_cast<int>(detections.size())))];
        const Mat xi = standard_normals(call_rng, static_cast<int>(prior_.observable_dims.size()));
        const Mat xu = sample_unobservable(call_rng);
        ProposalDraw draw = make_anchored_draw(s_a, j_a, xi, xu);
        draw.weights = Vec(n_particles_);
        for (int n = 0; n < n_particles_; ++n) {
            const double lp = log_pseudo_tuple(j, draw.states.col(n));
            draw.weights(n) = std::exp(lp + draw.log_prior_over_proposal(n));
        }
        return draw;
    }

    /// MC estimate of log psi-bar(J). The all-missed tuple is exact:
    /// sum_s log(1 - p_D).
    double log_psi_bar(const MeasurementTuple& j) const {
        check_tuple(j);
        if (j.all_missed_indices()) {
            double acc = 0.0;
            for (const auto& ps : per_sensor_) acc += ps.log_one_minus_pd;
            return acc;
        }
        const double est = psi_bar_mc(draw_proposal(j));
        return est > 0.0 ? std::log(est) : -std::numeric_limits<double>::infinity();
    }

    /// Algorithm-2 conditional weights: weight(j) = (1 - r_A(j)) * psi-bar
    /// estimate for J with coordinate s set to j, each candidate estimated
    /// with the full V-sensor pseudolikelihood product per particle (this is
    /// the O(m T N_p V^2) structure the complexity analysis counts). One
    /// shared anchor and common random numbers across candidates. Entries
    /// not in `candidates` are zero; output is scaled by its maximum.
    std::vector<double> conditional_weights(int s, const MeasurementTuple& j,
                                            const AssociationTable& table,
                                            std::span<const int> candidates) const {
        check_tuple(j);
        const int m = num_measurements(s);
        std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
        Rng call_rng = rng_.spawn(++call_counter_);
        const Mat xi = standard_normals(call_rng, static_cast<int>(prior_.observable_dims.size()));
        const Mat xu = sample_unobservable(call_rng);

        std::vector<std::pair<int, int>> rest;
        for (const auto& det : non_missed(j))
            if (det.first != s) rest.push_back(det);

        if (!rest.empty()) {
            // Shared anchor from the conditioning coordinates J^{-s}.
            const auto [s_a, j_a] =
                rest[static_cast<std::size_t>(call_rng.uniform_int(static_cast<int>(rest.size())))];
            const ProposalDraw draw = make_anchored_draw(s_a, j_a, xi, xu);
            for (int cand : candidates) {
                check_candidate(cand, m);
                const MeasurementTuple tuple = j.with_index(s, cand);
                double acc = 0.0;
                for (int n = 0; n < n_particles_; ++n)
                    acc += std::exp(log_pseudo_tuple(tuple, draw.states.col(n)) +
                                    draw.log_prior_over_proposal(n));
                w[static_cast<std::size_t>(cand)] =
                    (1.0 - table.entry(s, cand)) * acc / n_particles_;
            }
        } else {
            // J^{-s} is all missed: candidate 0 is the all-missed tuple
            // (exact value); each detected candidate anchors its own proposal
            // with the same base normals.
            double log_missed = 0.0;
            for (const auto& ps : per_sensor_) log_missed += ps.log_one_minus_pd;
            for (int cand : candidates) {
                check_candidate(cand, m);
                if (cand == 0) {
                    w[0] = std::exp(log_missed);
                    continue;
                }
                const ProposalDraw draw = make_anchored_draw(s, cand, xi, xu);
                const MeasurementTuple tuple = j.with_index(s, cand);
                double acc = 0.0;
                for (int n = 0; n < n_particles_; ++n)
                    acc += std::exp(log_pseudo_tuple(tuple, draw.states.col(n)) +
                                    draw.log_prior_over_proposal(n));
                w[static_cast<std::size_t>(cand)] =
                    (1.0 - table.entry(s, cand)) * acc / n_particles_;
            }
        }

        double max_w = 0.0;
        for (double wi : w) max_w = std::max(max_w, wi);
        if (max_w > 0.0)
            for (double& wi : w) wi /= max_w;
        return w;
    }

    /// Algorithm-3 spatial distribution: importance-sample, normalize,
    /// systematic-resample to uniform weights, then push every particle
    /// through the transition density.
    ParticleSet birth_spatial(const MeasurementTuple& j, const MotionModel& motion) const {
        ProposalDraw draw = draw_proposal(j);
        const double total = draw.weights.sum();
        if (!(total > 0.0))
            throw InconsistentTupleError("birth_spatial: all importance weights vanished for " +
                                         j.to_string());
        Vec norm = draw.weights / total;
        const double ess = 1.0 / norm.squaredNorm();
        if (ess < 0.01 * n_particles_) ++degeneracy_count_;

        Rng call_rng = rng_.spawn(++call_counter_);
        const std::vector<int> picks = systematic_resample(norm, n_particles_, call_rng);
        const Mat noise_tf = motion_noise_transform(motion);
        Mat out(draw.states.rows(), n_particles_);
        for (int n = 0; n < n_particles_; ++n) {
            const Vec x = draw.states.col(picks[static_cast<std::size_t>(n)]);
            out.col(n) = motion.F * x + noise_tf * call_rng.normal_vec(static_cast<int>(noise_tf.cols()));
        }
        return ParticleSet(std::move(out), Vec::Constant(n_particles_, 1.0 / n_particles_));
    }

    /// Systematic resampling: one uniform offset, N evenly spaced positions.
    template <typename RngT>
    static std::vector<int> systematic_resample(const Vec& norm_weights, int n_out, RngT& rng) {
        const int n_in = static_cast<int>(norm_weights.size());
        std::vector<int> picks(static_cast<std::size_t>(n_out));
        const double u0 = rng.uniform() / n_out;
        double cum = norm_weights(0);
        int i = 0;
        for (int n = 0; n < n_out; ++n) {
            const double u = u0 + static_cast<double>(n) / n_out;
            while (u > cum && i + 1 < n_in) cum += norm_weights(++i);
            picks[static_cast<std::size_t>(n)] = i;
        }
        return picks;
    }

private:
    struct Anchor {
        Vec mean_obs;
        Mat transform;  // lower Cholesky factor of Jac R Jac^T
        double log_det_cov = 0.0;
    };
    struct PerSensor {
        Mat r_inv;
        double log_det_r = 0.0;
        double log_pd = 0.0;
        double log_one_minus_pd = 0.0;
        std::vector<Anchor> anchors;
        std::vector<double> log_kappa;
    };

    void prepare_linear_inverse(int s) {
        const auto& lin = sensors_.at(static_cast<std::size_t>(s)).linear();
        const int dim_o = static_cast<int>(prior_.observable_dims.size());
        Mat h_o(lin.H.rows(), dim_o);
        for (int c = 0; c < dim_o; ++c)
            h_o.col(c) = lin.H.col(prior_.observable_dims[static_cast<std::size_t>(c)]);
        for (int d : prior_.unobservable_dims)
            if (lin.H.col(d).lpNorm<Eigen::Infinity>() > 0.0)
                throw std::invalid_argument(
                    "McBackend: linear sensor observes an unobservable state dimension");
        Eigen::FullPivLU<Mat> lu(h_o);
        if (!lu.isInvertible())
            throw std::invalid_argument("McBackend: observable block of H is singular");
        linear_inverse_[static_cast<std::size_t>(s)] = lu.inverse();
    }

    const Mat& linear_observable_inverse(int s) const {
        return linear_inverse_.at(static_cast<std::size_t>(s));
    }

    std::vector<std::pair<int, int>> non_missed(const MeasurementTuple& j) const {
        std::vector<std::pair<int, int>> out;
        for (int s = 0; s < j.num_sensors(); ++s)
            if (j[s] > 0) out.emplace_back(s, j[s]);
        return out;
    }

    Mat standard_normals(Rng& rng, int dim) const {
        Mat xi(dim, n_particles_);
        for (int n = 0; n < n_particles_; ++n) xi.col(n) = rng.normal_vec(dim);
        return xi;
    }

    Mat sample_unobservable(Rng& rng) const {
        const int dim_u = static_cast<int>(prior_.unobservable_dims.size());
        Mat xu(dim_u, n_particles_);
        for (int n = 0; n < n_particles_; ++n) xu.col(n) = prior_.unobservable.sample(rng);
        return xu;
    }

    /// Assemble full-state particles from anchored observable draws and
    /// prior unobservable draws; record the per-particle log(p_B^o / q^o).
    ProposalDraw make_anchored_draw(int s_a, int j_a, const Mat& xi, const Mat& xu) const {
        const auto& anchor =
            per_sensor_.at(static_cast<std::size_t>(s_a)).anchors.at(static_cast<std::size_t>(j_a - 1));
        ProposalDraw draw;
        draw.anchor_sensor = s_a;
        draw.anchor_index = j_a;
        const int d = prior_.state_dim();
        const int dim_o = static_cast<int>(prior_.observable_dims.size());
        draw.states = Mat(d, n_particles_);
        draw.log_prior_over_proposal = Vec(n_particles_);
        for (int n = 0; n < n_particles_; ++n) {
            const Vec x_o = anchor.mean_obs + anchor.transform * xi.col(n);
            for (int i = 0; i < dim_o; ++i)
                draw.states(prior_.observable_dims[static_cast<std::size_t>(i)], n) = x_o(i);
            for (std::size_t i = 0; i < prior_.unobservable_dims.size(); ++i)
                draw.states(prior_.unobservable_dims[i], n) = xu(static_cast<int>(i), n);
            const double log_q =
                -0.5 * (dim_o * kLog2Pi + anchor.log_det_cov + xi.col(n).squaredNorm());
            draw.log_prior_over_proposal(n) = prior_.log_pdf_observable(x_o) - log_q;
        }
        return draw;
    }

    Mat motion_noise_transform(const MotionModel& motion) const {
        Eigen::SelfAdjointEigenSolver<Mat> es(motion.Q);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("birth_spatial: eigendecomposition of Q failed");
        const Vec clamped = es.eigenvalues().cwiseMax(0.0);
        return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
    }

    void check_tuple(const MeasurementTuple& j) const {
        if (j.num_sensors() != num_sensors())
            throw std::invalid_argument("McBackend: tuple sensor count mismatch");
        for (int s = 0; s < j.num_sensors(); ++s)
            if (j[s] < 0 || j[s] > num_measurements(s))
                throw std::out_of_range("McBackend: tuple index out of range");
    }
    static void check_candidate(int cand, int m) {
        if (cand < 0 || cand > m)
            throw std::out_of_range("conditional_weights: candidate index out of range");
    }

    MultiSensorMeasurements z_;
    SensorList sensors_;
    BirthPrior prior_;
    int n_particles_;
    mutable Rng rng_;
    mutable std::uint64_t call_counter_ = 0;
    mutable int degeneracy_count_ = 0;
    std::vector<PerSensor> per_sensor_;
    std::vector<Mat> linear_inverse_;
};

}  // namespace msab
