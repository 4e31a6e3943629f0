#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "msab/association.hpp"
#include "msab/core/motion_model.hpp"
#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab {

struct TrackerConfig {
    double p_survival = 0.99;
    double prune_threshold = 1e-3;
    int max_components = 100;
    double extraction_threshold = 0.5;

    void validate() const {
        if (p_survival < 0.0 || p_survival > 1.0)
            throw std::invalid_argument("TrackerConfig: p_survival outside [0,1]");
        if (prune_threshold <= 0.0 || prune_threshold >= 1.0)
            throw std::invalid_argument("TrackerConfig: prune_threshold outside (0,1)");
        if (extraction_threshold <= 0.0 || extraction_threshold >= 1.0)
            throw std::invalid_argument("TrackerConfig: extraction_threshold outside (0,1)");
        if (max_components < 1)
            throw std::invalid_argument("TrackerConfig: max_components must be >= 1");
    }
};

namespace tracker {

/// LMB prediction: survivors keep their labels with existence scaled by
/// p_survival and spatial distributions pushed through the motion model
/// (particle tracks are resampled first when degenerate); birth components
/// join unchanged, they are already predicted.
template <typename RngT>
LmbDensity predict(const LmbDensity& lmb, const MotionModel& motion, double p_survival,
                   const LmbDensity& birth, RngT& rng) {
    LmbDensity out;
    for (const auto& comp : lmb.components()) {
        SpatialDistribution spatial = comp.spatial;
        if (std::holds_alternative<GaussianDensity>(spatial)) {
            spatial = motion.predict(std::get<GaussianDensity>(spatial));
        } else {
            auto& p = std::get<ParticleSet>(spatial);
            Mat states = p.states();
            Vec weights = p.weights();
            if (p.effective_sample_size() < 0.5 * p.size()) {
                // systematic resample to uniform weights
                std::vector<int> picks(static_cast<std::size_t>(p.size()));
                const double u0 = rng.uniform() / p.size();
                double cum = weights(0);
                int i = 0;
                for (int n = 0; n < p.size(); ++n) {
                    const double u = u0 + static_cast<double>(n) / p.size();
                    while (u > cum && i + 1 < p.size()) cum += weights(++i);
                    picks[static_cast<std::size_t>(n)] = i;
                }
                Mat resampled(states.rows(), states.cols());
                for (int n = 0; n < p.size(); ++n)
                    resampled.col(n) = states.col(picks[static_cast<std::size_t>(n)]);
                states = std::move(resampled);
                weights = Vec::Constant(p.size(), 1.0 / p.size());
            }
            Eigen::SelfAdjointEigenSolver<Mat> es(motion.Q);
            const Mat noise_tf =
                es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
            for (int n = 0; n < states.cols(); ++n)
                states.col(n) = motion.F * states.col(n) +
                                noise_tf * rng.normal_vec(static_cast<int>(noise_tf.cols()));
            spatial = ParticleSet(std::move(states), std::move(weights));
        }
        out.add(BernoulliComponent(comp.label, comp.existence * p_survival, std::move(spatial)));
    }
    for (const auto& comp : birth.components()) out.add(comp);  // throws on label collision
    return out;
}

/// Single-sensor LMB measurement update with track-local marginal association
/// weights. Returns the posterior and the per-measurement association
/// probabilities r_A(j) = min(1, sum_t beta_tj) consumed by the birth
/// procedure.
inline std::pair<LmbDensity, Vec> update_sensor(const LmbDensity& lmb, const MeasurementSet& z,
                                                const SensorModel& sensor) {
    const int m = static_cast<int>(z.size());
    Vec r_a = Vec::Zero(m);
    LmbDensity out;
    const double pd = sensor.detection_prob();

    for (const auto& track : lmb.components()) {
        const double r = track.existence;
        if (std::holds_alternative<GaussianDensity>(track.spatial)) {
            if (!sensor.is_linear())
                throw std::invalid_argument("update_sensor: Gaussian track, nonlinear sensor");
            const auto& g = std::get<GaussianDensity>(track.spatial);
            const auto& lin = sensor.linear();
            const Mat s_innov = lin.H * g.cov() * lin.H.transpose() + lin.R;
            const auto s_llt = cholesky(s_innov, "innovation covariance");
            const Mat gain = g.cov() * lin.H.transpose() *
                             s_llt.solve(Mat::Identity(s_innov.rows(), s_innov.cols()));
            Mat p_post = g.cov() - gain * lin.H * g.cov();
            p_post = 0.5 * (p_post + p_post.transpose());

            // Branch weights: w0 covers non-existence and missed detection.
            std::vector<double> w(static_cast<std::size_t>(m) + 1);
            w[0] = 1.0 - r + r * (1.0 - pd);
            std::vector<Vec> mu_branch(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) {
                const Vec& zj = z[static_cast<std::size_t>(j)];
                const Vec innov_half = s_llt.matrixL().solve(zj - lin.H * g.mean());
                const double log_l = -0.5 * (s_innov.rows() * kLog2Pi +
                                             log_det_from_llt(s_llt) + innov_half.squaredNorm());
                w[static_cast<std::size_t>(j) + 1] =
                    r * pd * std::exp(log_l) / sensor.clutter_intensity(zj);
                mu_branch[static_cast<std::size_t>(j)] = g.mean() + gain * (zj - lin.H * g.mean());
            }
            double total = w[0];
            double exist_mass = r * (1.0 - pd);
            for (int j = 1; j <= m; ++j) {
                total += w[static_cast<std::size_t>(j)];
                exist_mass += w[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < m; ++j) r_a(j) += w[static_cast<std::size_t>(j) + 1] / total;

            if (!(exist_mass > 0.0)) {  // dead track: nothing to condition on
                out.add(BernoulliComponent(track.label, 0.0, track.spatial));
                continue;
            }
            const double r_post = std::clamp(exist_mass / total, 0.0, 1.0);
            // Moment-match the association mixture conditioned on existence.
            std::vector<double> gamma(static_cast<std::size_t>(m) + 1);
            gamma[0] = r * (1.0 - pd) / exist_mass;
            for (int j = 1; j <= m; ++j) gamma[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] / exist_mass;
            Vec mu = gamma[0] * g.mean();
            for (int j = 0; j < m; ++j)
                mu += gamma[static_cast<std::size_t>(j) + 1] * mu_branch[static_cast<std::size_t>(j)];
            Mat cov = gamma[0] * (g.cov() + (g.mean() - mu) * (g.mean() - mu).transpose());
            for (int j = 0; j < m; ++j) {
                const Vec d = mu_branch[static_cast<std::size_t>(j)] - mu;
                cov += gamma[static_cast<std::size_t>(j) + 1] * (p_post + d * d.transpose());
            }
            cov = 0.5 * (cov + cov.transpose());
            out.add(BernoulliComponent(track.label, r_post, GaussianDensity(mu, cov)));
        } else {
            const auto& p = std::get<ParticleSet>(track.spatial);
            // Per-measurement predictive likelihoods and per-particle factors.
            Vec factor = Vec::Constant(p.size(), 1.0 - pd);
            std::vector<double> l(static_cast<std::size_t>(m), 0.0);
            for (int j = 0; j < m; ++j) {
                const Vec& zj = z[static_cast<std::size_t>(j)];
                const double kappa = sensor.clutter_intensity(zj);
                double lj = 0.0;
                for (int n = 0; n < p.size(); ++n) {
                    const double g = sensor.likelihood(zj, p.states().col(n));
                    lj += p.weights()(n) * g;
                    factor(n) += pd * g / kappa;
                }
                l[static_cast<std::size_t>(j)] = lj;
            }
            std::vector<double> w(static_cast<std::size_t>(m) + 1);
            w[0] = 1.0 - r + r * (1.0 - pd);
            double total = w[0];
            double exist_mass = r * (1.0 - pd);
            for (int j = 0; j < m; ++j) {
                const double wj = r * pd * l[static_cast<std::size_t>(j)] /
                                  sensor.clutter_intensity(z[static_cast<std::size_t>(j)]);
                w[static_cast<std::size_t>(j) + 1] = wj;
                total += wj;
                exist_mass += wj;
            }
            for (int j = 0; j < m; ++j) r_a(j) += w[static_cast<std::size_t>(j) + 1] / total;

            if (!(exist_mass > 0.0)) {
                out.add(BernoulliComponent(track.label, 0.0, track.spatial));
                continue;
            }
            const double r_post = std::clamp(exist_mass / total, 0.0, 1.0);
            Vec new_weights = p.weights().cwiseProduct(factor);
            if (!(new_weights.sum() > 0.0)) new_weights = p.weights();  // keep prior support
            out.add(BernoulliComponent(track.label, r_post,
                                       ParticleSet(p.states(), std::move(new_weights))));
        }
    }
    for (int j = 0; j < m; ++j) r_a(j) = std::min(r_a(j), 1.0);
    return {std::move(out), std::move(r_a)};
}

/// Drop components below the prune threshold, keep the top max_components by
/// existence.
inline LmbDensity prune_and_cap(const LmbDensity& lmb, const TrackerConfig& cfg) {
    cfg.validate();
    std::vector<const BernoulliComponent*> kept;
    for (const auto& comp : lmb.components())
        if (comp.existence >= cfg.prune_threshold) kept.push_back(&comp);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto* a, const auto* b) { return a->existence > b->existence; });
    if (static_cast<int>(kept.size()) > cfg.max_components)
        kept.resize(static_cast<std::size_t>(cfg.max_components));
    LmbDensity out;
    for (const auto* comp : kept) out.add(*comp);
    return out;
}

struct LabeledEstimate {
    BirthLabel label;
    Vec state;
};

/// Existence-threshold state extraction: components above the threshold
/// report their spatial mean under their label.
inline std::vector<LabeledEstimate> extract(const LmbDensity& lmb, const TrackerConfig& cfg) {
    cfg.validate();
    std::vector<LabeledEstimate> out;
    for (const auto& comp : lmb.components())
        if (comp.existence > cfg.extraction_threshold)
            out.push_back({comp.label, spatial_mean(comp.spatial)});
    return out;
}

}  // namespace tracker
}  // namespace msab
