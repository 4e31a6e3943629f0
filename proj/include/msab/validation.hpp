#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "msab/birth.hpp"
#include "msab/gaussian_backend.hpp"
#include "msab/gibbs.hpp"
#include "msab/mc_backend.hpp"
#include "msab/oracle.hpp"

namespace msab::validation {

/// Shared instance for the Gibbs-vs-oracle and backend cross-validation
/// checks: 2D position state, full-state linear sensors, two well-separated
/// sources observed by every sensor.
struct LinearInstance {
    MultiSensorMeasurements z;
    SensorList sensors;
    GaussianDensity prior{Vec::Zero(2), Mat::Identity(2, 2)};
    AssociationTable table;
};

inline LinearInstance make_linear_instance(std::uint64_t seed, int num_sensors,
                                           int meas_per_sensor, double max_r_a = 0.3,
                                           double source_spread = 18.0,
                                           double clutter_rate = 8.0) {
    Rng rng(seed);
    const double sigma_prior = 50.0;
    const double sigma_meas = 8.0;
    LinearInstance inst;
    inst.prior = GaussianDensity(Vec::Zero(2), sigma_prior * sigma_prior * Mat::Identity(2, 2));

    // Sources near each other relative to the measurement noise: cross tuples
    // and missed-detection states keep enough mass that the chain mixes and
    // the empirical frequencies can be compared against the exact target.
    std::vector<Vec> sources;
    Vec center = rng.normal_vec(2) * sigma_prior * 0.4;
    sources.push_back(center);
    for (int t = 1; t < meas_per_sensor; ++t) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double dist = source_spread * (0.5 + rng.uniform());
        Vec offset(2);
        offset << dist * std::cos(angle), dist * std::sin(angle);
        sources.push_back(sources.back() + offset);
    }

    std::vector<Vec> r_a;
    for (int s = 0; s < num_sensors; ++s) {
        inst.sensors.emplace_back(
            0.9, clutter_rate, 200.0 * 200.0,
            LinearGaussian{Mat::Identity(2, 2), sigma_meas * sigma_meas * Mat::Identity(2, 2)});
        MeasurementSet z_s;
        for (const auto& src : sources)
            z_s.push_back(src + rng.normal_vec(2) * sigma_meas);
        inst.z.push_back(std::move(z_s));
        Vec v(meas_per_sensor);
        for (int j = 0; j < meas_per_sensor; ++j) v(j) = max_r_a * rng.uniform();
        r_a.push_back(v);
    }
    inst.table = AssociationTable(r_a);
    return inst;
}

// ---- Gibbs empirical frequencies vs exact enumeration ----

struct TvCheck {
    std::vector<double> tv_per_instance;
    double threshold = 0.05;
    bool pass = true;
    double max_tv = 0.0;
};

inline TvCheck gibbs_tv_check(std::uint64_t seed, int instances, int gibbs_iterations,
                              double threshold = 0.05) {
    TvCheck out;
    out.threshold = threshold;
    for (int i = 0; i < instances; ++i) {
        const auto inst = make_linear_instance(seed + static_cast<std::uint64_t>(i), 3, 2);
        GaussianBackend backend(inst.z, inst.sensors, inst.prior);
        const auto exact = oracle::enumerate_exact(inst.z, inst.sensors, inst.table, backend);

        GibbsConfig cfg;
        cfg.iterations = gibbs_iterations;
        cfg.rng_seed = seed * 1000003ULL + static_cast<std::uint64_t>(i);
        cfg.tau = 1.0;
        cfg.min_detections = 0;
        const auto result = sample_birth_tuples(inst.z, inst.sensors, inst.table, backend, cfg);
        const double tv = oracle::tv_distance(result.visit_counts, exact);
        out.tv_per_instance.push_back(tv);
        out.max_tv = std::max(out.max_tv, tv);
        if (tv >= threshold) out.pass = false;
    }
    return out;
}

// ---- Theorem-1 bound on randomized tiny delta-GLMB instances ----

struct BoundCheck {
    int instances = 0;
    int violations = 0;
    double max_distance = 0.0;
    double max_bound = 0.0;
    bool pass() const { return violations == 0; }
};

struct TinyInstance {
    MultiSensorMeasurements z;
    SensorList sensors;
    oracle::TinyGlmb prior;
    LmbDensity full_birth;
    std::map<MeasurementTuple, double> birth_probs;
    MotionModel motion{Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0};
    double p_survival = 0.95;
    int timestep = 1;
};

/// Random tiny instance within the exhaustive-enumeration guard:
/// |L u B+| <= 4, V <= 2, m <= 2. The birth LMB is built over the FULL
/// tuple space with exact Eq.-(22) probabilities.
inline TinyInstance make_tiny_instance(std::uint64_t seed) {
    Rng rng(seed);
    TinyInstance inst;
    const double sigma_prior = 20.0;
    const double sigma_meas = 2.0;

    // Configurations keeping |L| + prod(m+1) <= 4.
    struct Config {
        int tracks;
        std::vector<int> m;
    };
    const std::vector<Config> configs{{0, {1, 1}}, {1, {2}}, {2, {1}}, {1, {1, 0}}, {0, {2}}};
    const Config cfg = configs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(configs.size())))];

    const double p_d = 0.7 + 0.25 * rng.uniform();
    for (std::size_t s = 0; s < cfg.m.size(); ++s) {
        inst.sensors.emplace_back(p_d, 1.0 + rng.uniform(), 1e4,
                                  LinearGaussian{Mat::Identity(2, 2),
                                                 sigma_meas * sigma_meas * Mat::Identity(2, 2)});
        MeasurementSet z_s;
        for (int j = 0; j < cfg.m[s]; ++j)
            z_s.push_back(rng.normal_vec(2) * sigma_prior * 0.5);
        inst.z.push_back(std::move(z_s));
    }

    GaussianDensity prior_density(Vec::Zero(2),
                                  sigma_prior * sigma_prior * Mat::Identity(2, 2));
    GaussianBackend backend(inst.z, inst.sensors, prior_density);

    // Prior hypothesis with `tracks` persisting labels.
    oracle::TinyHypothesis hyp;
    hyp.weight = 1.0;
    for (int t = 0; t < cfg.tracks; ++t) {
        const BirthLabel label = tuple_to_label(
            MeasurementTuple(std::vector<int>(cfg.m.size(), t + 1)), 0);
        hyp.labels.push_back(label);
        hyp.densities.emplace(
            label, GaussianDensity(rng.normal_vec(2) * sigma_prior * 0.4,
                                   4.0 * Mat::Identity(2, 2)));
    }
    inst.prior.hypotheses.push_back(std::move(hyp));

    BirthConfig birth_cfg;
    birth_cfg.r_b_max = 0.4 + 0.5 * rng.uniform();
    birth_cfg.lambda_b = 0.3 + 0.7 * rng.uniform();
    birth_cfg.min_detections = 0;
    AssociationTable table = AssociationTable::zeros(inst.z);
    inst.birth_probs =
        oracle::exact_birth_probabilities(inst.z, inst.sensors, table, backend, birth_cfg);

    for (const auto& [tuple, r_b] : inst.birth_probs) {
        if (!(r_b > 0.0)) continue;
        inst.full_birth.add(BernoulliComponent(tuple_to_label(tuple, inst.timestep), r_b,
                                               backend.birth_spatial(tuple, inst.motion)));
    }
    inst.p_survival = 0.8 + 0.15 * rng.uniform();
    return inst;
}

inline BoundCheck theorem1_check(std::uint64_t seed, int instances) {
    BoundCheck out;
    out.instances = instances;
    for (int i = 0; i < instances; ++i) {
        Rng rng(seed + 7919ULL * static_cast<std::uint64_t>(i));
        const auto inst = make_tiny_instance(seed + static_cast<std::uint64_t>(i));

        double max_r = 0.0;
        for (const auto& [tuple, r] : inst.birth_probs) max_r = std::max(max_r, r);
        const double epsilon = rng.uniform() * max_r * 1.3;

        const auto kept_tuples = oracle::epsilon_truncation(inst.birth_probs, epsilon);
        std::set<BirthLabel> kept;
        for (const auto& tuple : kept_tuples) kept.insert(tuple_to_label(tuple, inst.timestep));

        const auto check =
            oracle::theorem1_bound_check(inst.prior, inst.full_birth, kept, epsilon, inst.z,
                                         inst.sensors, inst.p_survival, inst.motion);
        out.max_distance = std::max(out.max_distance, check.l1_distance);
        out.max_bound = std::max(out.max_bound, check.bound);
        if (!check.holds()) ++out.violations;
    }
    return out;
}

// ---- Gaussian vs Monte Carlo conditional weights ----

struct XCheck {
    double mean_tv = 0.0;
    double max_tv = 0.0;
    int comparisons = 0;
    double threshold = 0.02;
    bool pass = true;
};

/// 4D-state instance with XY-position sensors usable by both backends; the
/// prior is diagonal so the observable/unobservable factorization is exact.
struct XCheckInstance {
    MultiSensorMeasurements z;
    SensorList sensors;
    GaussianDensity prior{Vec::Zero(4), Mat::Identity(4, 4)};
    BirthPrior mc_prior{GaussianDensity(Vec::Zero(2), Mat::Identity(2, 2)),
                        GaussianDensity(Vec::Zero(2), Mat::Identity(2, 2)),
                        {0, 2},
                        {1, 3}};
    AssociationTable table;
};

inline XCheckInstance make_xcheck_instance(std::uint64_t seed, int num_sensors = 3,
                                           int meas_per_sensor = 2) {
    Rng rng(seed);
    const double sigma_pos = 60.0;
    const double sigma_vel = 10.0;
    const double sigma_meas = 6.0;

    XCheckInstance inst;
    Vec mu0 = Vec::Zero(4);
    Mat p0 = Mat::Zero(4, 4);
    p0.diagonal() << sigma_pos * sigma_pos, sigma_vel * sigma_vel, sigma_pos * sigma_pos,
        sigma_vel * sigma_vel;
    inst.prior = GaussianDensity(mu0, p0);
    Mat pos_cov = sigma_pos * sigma_pos * Mat::Identity(2, 2);
    inst.mc_prior = BirthPrior{GaussianDensity(Vec::Zero(2), pos_cov),
                               GaussianDensity(Vec::Zero(2), sigma_vel * sigma_vel * Mat::Identity(2, 2)),
                               {0, 2},
                               {1, 3}};

    std::vector<Vec> sources;
    sources.push_back(rng.normal_vec(2) * sigma_pos * 0.4);
    for (int t = 1; t < meas_per_sensor; ++t) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double dist = 2.5 * sigma_meas * (1.0 + rng.uniform());
        Vec offset(2);
        offset << dist * std::cos(angle), dist * std::sin(angle);
        sources.push_back(sources.back() + offset);
    }

    Mat h = Mat::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    std::vector<Vec> r_a;
    for (int s = 0; s < num_sensors; ++s) {
        inst.sensors.emplace_back(0.9, 2.0, 400.0 * 400.0,
                                  LinearGaussian{h, sigma_meas * sigma_meas * Mat::Identity(2, 2)});
        MeasurementSet z_s;
        for (const auto& src : sources) z_s.push_back(src + rng.normal_vec(2) * sigma_meas);
        inst.z.push_back(std::move(z_s));
        Vec v(meas_per_sensor);
        for (int j = 0; j < meas_per_sensor; ++j) v(j) = 0.3 * rng.uniform();
        r_a.push_back(v);
    }
    inst.table = AssociationTable(r_a);
    return inst;
}

inline XCheck backend_xcheck(std::uint64_t seed, int instances, int n_particles,
                             double threshold = 0.02) {
    XCheck out;
    out.threshold = threshold;
    double tv_sum = 0.0;
    for (int i = 0; i < instances; ++i) {
        const auto inst = make_xcheck_instance(seed + static_cast<std::uint64_t>(i));
        GaussianBackend gaussian(inst.z, inst.sensors, inst.prior);
        McBackend mc(inst.z, inst.sensors, inst.mc_prior, n_particles,
                     seed * 31ULL + static_cast<std::uint64_t>(i));

        // Condition on a tuple drawn from the exact distribution: the states
        // the sampler actually occupies, not arbitrary inconsistent ones.
        Rng rng(seed + 1234567ULL + static_cast<std::uint64_t>(i));
        const auto exact = oracle::enumerate_exact(inst.z, inst.sensors, inst.table, gaussian);
        std::vector<MeasurementTuple> tuples;
        std::vector<double> probs;
        for (const auto& [tuple, p] : exact.entries) {
            tuples.push_back(tuple);
            probs.push_back(p);
        }
        const MeasurementTuple j = tuples[static_cast<std::size_t>(rng.categorical(probs))];

        double instance_tv = 0.0;
        for (int s = 0; s < static_cast<int>(inst.sensors.size()); ++s) {
            const int m = static_cast<int>(inst.z[static_cast<std::size_t>(s)].size());
            std::vector<int> candidates(static_cast<std::size_t>(m) + 1);
            std::iota(candidates.begin(), candidates.end(), 0);
            auto wg = gaussian.conditional_weights(s, j, inst.table, candidates);
            auto wm = mc.conditional_weights(s, j, inst.table, candidates);
            double sg = 0.0, sm = 0.0;
            for (int k = 0; k <= m; ++k) {
                sg += wg[static_cast<std::size_t>(k)];
                sm += wm[static_cast<std::size_t>(k)];
            }
            double tv = 0.0;
            for (int k = 0; k <= m; ++k)
                tv += std::abs(wg[static_cast<std::size_t>(k)] / sg -
                               wm[static_cast<std::size_t>(k)] / sm);
            instance_tv += 0.5 * tv;
            ++out.comparisons;
        }
        instance_tv /= static_cast<double>(inst.sensors.size());
        tv_sum += instance_tv;
        out.max_tv = std::max(out.max_tv, instance_tv);
    }
    out.mean_tv = tv_sum / instances;
    out.pass = out.mean_tv < threshold;
    return out;
}

// ---- Runtime scaling of the Gibbs sampler in the sensor count ----

struct BenchPoint {
    int sensors = 0;
    double seconds = 0.0;
};

struct BenchResult {
    std::vector<BenchPoint> points;
    double slope = 0.0;  ///< log-log least-squares slope of time vs V
};

enum class BenchBackend { Mc, Gaussian };

/// Median-of-reps wall time of sample_birth_tuples as the sensor count grows,
/// fixed m and T. The MC backend evaluates the full V-sensor pseudolikelihood
/// product per candidate (Algorithm-2 structure, O(m T N_p V^2)); the
/// Gaussian backend follows the closed-form reuse scheme, whose per-sweep
/// cost is dominated by the O(V) re-accumulation.
inline BenchResult bench_scaling(BenchBackend kind, const std::vector<int>& sensor_counts,
                                 int meas_per_sensor, int gibbs_iterations, int n_particles,
                                 int reps, std::uint64_t seed) {
    BenchResult result;
    for (int v : sensor_counts) {
        std::vector<double> times;
        for (int rep = 0; rep <= reps; ++rep) {  // first rep is warmup
            const auto inst = make_xcheck_instance(seed + static_cast<std::uint64_t>(v),
                                                   v, meas_per_sensor);
            GibbsConfig cfg;
            cfg.iterations = gibbs_iterations;
            cfg.rng_seed = seed + static_cast<std::uint64_t>(rep) * 977ULL;
            cfg.tau = 1.0;
            const auto t0 = std::chrono::steady_clock::now();
            if (kind == BenchBackend::Mc) {
                McBackend backend(inst.z, inst.sensors, inst.mc_prior, n_particles,
                                  seed + static_cast<std::uint64_t>(rep));
                sample_birth_tuples(inst.z, inst.sensors, inst.table, backend, cfg);
            } else {
                GaussianBackend backend(inst.z, inst.sensors, inst.prior);
                sample_birth_tuples(inst.z, inst.sensors, inst.table, backend, cfg);
            }
            const auto t1 = std::chrono::steady_clock::now();
            if (rep > 0) times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        result.points.push_back({v, times[times.size() / 2]});
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(result.points.size());
    for (const auto& p : result.points) {
        const double x = std::log(static_cast<double>(p.sensors));
        const double y = std::log(p.seconds);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    result.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return result;
}

}  // namespace msab::validation
