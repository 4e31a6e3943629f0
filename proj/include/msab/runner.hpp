#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msab/birth.hpp"
#include "msab/config.hpp"
#include "msab/gaussian_backend.hpp"
#include "msab/gibbs.hpp"
#include "msab/mc_backend.hpp"
#include "msab/metrics.hpp"
#include "msab/sim.hpp"
#include "msab/tracker.hpp"

namespace msab {

enum class BirthMode { AdaptiveGaussian, AdaptiveMc, Uniform };

inline std::string to_string(BirthMode mode) {
    switch (mode) {
        case BirthMode::AdaptiveGaussian: return "adaptive-gaussian";
        case BirthMode::AdaptiveMc: return "adaptive-mc";
        case BirthMode::Uniform: return "uniform";
    }
    return "?";
}

inline BirthMode birth_mode_from_string(const std::string& s) {
    if (s == "adaptive-gaussian") return BirthMode::AdaptiveGaussian;
    if (s == "adaptive-mc") return BirthMode::AdaptiveMc;
    if (s == "uniform") return BirthMode::Uniform;
    throw ConfigError("unknown birth mode '" + s +
                      "' (expected adaptive-gaussian, adaptive-mc, or uniform)");
}

struct RunConfig {
    ScenarioConfig scenario;
    TrackerConfig tracker;
    BirthConfig birth;
    OspaConfig ospa;

    int gibbs_iterations = 600;
    int gibbs_restart_period = 100;
    double tau = 0.01;
    int mc_particles = 1000;

    // Birth prior for the Gaussian backend (linear scenarios).
    double prior_position_sigma = 1e5;
    double prior_velocity_sigma = 50.0;

    // Birth prior for the MC backend: positions uniform over the box,
    // velocities zero-mean Gaussian.
    double mc_velocity_sigma = 20.0;

    // Uniform-birth baseline: grid x grid Gaussian components.
    int uniform_grid = 10;
    double uniform_r = 0.1;
    double uniform_sigma_pos = 250.0;
    double uniform_sigma_vel = 50.0;
    int uniform_particles = 200;  // per component for particle scenarios
};

struct StepRecord {
    int step = 0;
    int card_true = 0;
    int card_true_lagged = 0;
    int card_est = 0;
    double ospa_step = 0.0;
    double ospa2 = 0.0;
    int birth_components = 0;
    double tuple_space = 0.0;
    std::vector<std::array<double, 2>> birth_positions;
};

struct TrialResult {
    std::vector<StepRecord> steps;
    int gibbs_fallbacks = 0;

    double mean_ospa2() const {
        double acc = 0.0;
        for (const auto& s : steps) acc += s.ospa2;
        return steps.empty() ? 0.0 : acc / steps.size();
    }
    double mean_abs_card_error_lagged() const {
        double acc = 0.0;
        for (const auto& s : steps) acc += std::abs(s.card_est - s.card_true_lagged);
        return steps.empty() ? 0.0 : acc / steps.size();
    }
    double mean_birth_components() const {
        double acc = 0.0;
        for (const auto& s : steps) acc += s.birth_components;
        return steps.empty() ? 0.0 : acc / steps.size();
    }
    double mean_tuple_space() const {
        double acc = 0.0;
        for (const auto& s : steps) acc += s.tuple_space;
        return steps.empty() ? 0.0 : acc / steps.size();
    }
};

namespace detail {

inline GaussianDensity gaussian_birth_prior(const RunConfig& cfg) {
    Vec mu = Vec::Zero(4);
    mu(0) = cfg.scenario.box.cx();
    mu(2) = cfg.scenario.box.cy();
    Mat p = Mat::Zero(4, 4);
    const double sp = cfg.prior_position_sigma, sv = cfg.prior_velocity_sigma;
    p.diagonal() << sp * sp, sv * sv, sp * sp, sv * sv;
    return GaussianDensity(mu, p);
}

inline BirthPrior mc_birth_prior(const RunConfig& cfg) {
    Vec lo(2), hi(2);
    lo << cfg.scenario.box.min_x, cfg.scenario.box.min_y;
    hi << cfg.scenario.box.max_x, cfg.scenario.box.max_y;
    const double sv = cfg.mc_velocity_sigma;
    return BirthPrior{UniformBox{lo, hi},
                      GaussianDensity(Vec::Zero(2), sv * sv * Mat::Identity(2, 2)),
                      {0, 2},
                      {1, 3}};
}

/// The Section-VII-style baseline: a fixed grid of Gaussian components with
/// constant existence probability; labels are synthetic (grid ordinal in the
/// first tuple coordinate).
template <typename RngT>
LmbDensity uniform_birth(const RunConfig& cfg, int timestep, bool particles, RngT& rng) {
    LmbDensity birth;
    const int g = cfg.uniform_grid;
    const auto& box = cfg.scenario.box;
    Mat cov = Mat::Zero(4, 4);
    cov.diagonal() << cfg.uniform_sigma_pos * cfg.uniform_sigma_pos,
        cfg.uniform_sigma_vel * cfg.uniform_sigma_vel,
        cfg.uniform_sigma_pos * cfg.uniform_sigma_pos,
        cfg.uniform_sigma_vel * cfg.uniform_sigma_vel;
    int ordinal = 0;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            Vec mu = Vec::Zero(4);
            mu(0) = box.min_x + (i + 0.5) * box.width() / g;
            mu(2) = box.min_y + (j + 0.5) * box.height() / g;
            std::vector<int> idx(static_cast<std::size_t>(cfg.scenario.n_sensors), 0);
            idx[0] = ++ordinal;
            const BirthLabel label{timestep, MeasurementTuple(idx)};
            GaussianDensity gauss(mu, cov);
            if (!particles) {
                birth.add(BernoulliComponent(label, cfg.uniform_r, std::move(gauss)));
            } else {
                Mat states(4, cfg.uniform_particles);
                for (int n = 0; n < cfg.uniform_particles; ++n)
                    states.col(n) = gauss.sample(rng);
                birth.add(BernoulliComponent(
                    label, cfg.uniform_r,
                    ParticleSet(std::move(states),
                                Vec::Constant(cfg.uniform_particles,
                                              1.0 / cfg.uniform_particles))));
            }
        }
    }
    return birth;
}

}  // namespace detail

/// One seeded tracker run: iterated-corrector LMB filter with the selected
/// birth procedure, metrics recorded per step.
inline TrialResult run_trial(const RunConfig& cfg, BirthMode mode, std::uint64_t trial_seed) {
    cfg.scenario.validate();
    cfg.tracker.validate();
    cfg.birth.validate();
    cfg.ospa.validate();
    if (mode == BirthMode::AdaptiveGaussian && cfg.scenario.kind != ScenarioKind::Linear)
        throw ConfigError("adaptive-gaussian birth requires a linear scenario");

    ScenarioConfig scenario = cfg.scenario;
    scenario.rng_seed = trial_seed;
    const TruthLog truth = generate_truth(scenario);
    const SensorList sensors = build_sensors(scenario);
    const MotionModel motion = constant_velocity_model(scenario.dt, scenario.accel_noise);
    const bool particle_tracks = scenario.kind == ScenarioKind::BearingRange;

    std::uint64_t seed_state = trial_seed ^ 0x9e3779b97f4a7c15ULL;
    Rng meas_rng(splitmix64(seed_state));
    Rng filter_rng(splitmix64(seed_state));
    std::uint64_t gibbs_seed_base = splitmix64(seed_state);

    LmbDensity lmb;
    LmbDensity pending_birth;
    TrialResult result;
    std::map<BirthLabel, TrackHistory> estimate_tracks;

    for (int k = 0; k < scenario.duration_steps; ++k) {
        const MultiSensorMeasurements z =
            generate_measurements(truth, k, sensors, scenario, meas_rng);

        lmb = tracker::predict(lmb, motion, cfg.tracker.p_survival, pending_birth, filter_rng);
        std::vector<Vec> r_a_per_sensor;
        for (std::size_t s = 0; s < sensors.size(); ++s) {
            auto [updated, r_a] = tracker::update_sensor(lmb, z[s], sensors[s]);
            lmb = std::move(updated);
            r_a_per_sensor.push_back(std::move(r_a));
        }
        lmb = tracker::prune_and_cap(lmb, cfg.tracker);
        const auto estimates = tracker::extract(lmb, cfg.tracker);
        for (const auto& est : estimates) {
            Vec pos(2);
            pos << est.state(0), est.state(2);
            estimate_tracks[est.label][k] = pos;
        }

        const AssociationTable table(r_a_per_sensor);
        StepRecord record;
        record.step = k;
        record.card_true = truth.cardinality(k);
        record.card_true_lagged = truth.cardinality_lagged(k);
        record.card_est = static_cast<int>(estimates.size());
        record.tuple_space = 1.0;
        for (const auto& z_s : z) record.tuple_space *= static_cast<double>(z_s.size()) + 1.0;

        // Birth for the next step from this step's measurements.
        if (mode == BirthMode::Uniform) {
            pending_birth = detail::uniform_birth(cfg, k + 1, particle_tracks, filter_rng);
        } else {
            GibbsConfig gibbs_cfg;
            gibbs_cfg.iterations = cfg.gibbs_iterations;
            if (cfg.gibbs_restart_period > 0) gibbs_cfg.restart_period = cfg.gibbs_restart_period;
            gibbs_cfg.rng_seed = gibbs_seed_base + static_cast<std::uint64_t>(k) * 1000003ULL;
            gibbs_cfg.tau = cfg.tau;
            gibbs_cfg.min_detections = cfg.birth.min_detections;

            if (mode == BirthMode::AdaptiveGaussian) {
                GaussianBackend backend(z, sensors, detail::gaussian_birth_prior(cfg));
                const auto sampled =
                    sample_birth_tuples(z, sensors, table, backend, gibbs_cfg);
                result.gibbs_fallbacks += sampled.forced_missed_fallbacks;
                pending_birth = build_birth_lmb(
                    sampled.tuples, table, backend,
                    [&](const MeasurementTuple& j) { return backend.birth_spatial(j, motion); },
                    cfg.birth, k + 1);
            } else {
                McBackend backend(z, sensors, detail::mc_birth_prior(cfg), cfg.mc_particles,
                                  gibbs_cfg.rng_seed ^ 0xabcdef1234567ULL);
                const auto sampled =
                    sample_birth_tuples(z, sensors, table, backend, gibbs_cfg);
                result.gibbs_fallbacks += sampled.forced_missed_fallbacks;
                pending_birth = build_birth_lmb(
                    sampled.tuples, table, backend,
                    [&](const MeasurementTuple& j) { return backend.birth_spatial(j, motion); },
                    cfg.birth, k + 1);
            }
        }
        // Birth components below the filter's prune threshold can never be
        // instantiated: without this, a negligible-existence duplicate of an
        // already-tracked target gets resurrected by the likelihood ratios
        // and persists as a ghost.
        {
            LmbDensity kept;
            for (const auto& comp : pending_birth.components())
                if (comp.existence >= cfg.tracker.prune_threshold) kept.add(comp);
            pending_birth = std::move(kept);
        }
        record.birth_components = static_cast<int>(pending_birth.size());
        for (const auto& comp : pending_birth.components()) {
            const Vec mean = spatial_mean(comp.spatial);
            record.birth_positions.push_back({mean(0), mean(2)});
        }

        std::vector<Vec> est_positions, true_positions;
        for (const auto& est : estimates) {
            Vec p(2);
            p << est.state(0), est.state(2);
            est_positions.push_back(p);
        }
        for (const auto& target : truth.targets)
            if (target.alive(k)) {
                Vec p(2);
                p << target.state(k)(0), target.state(k)(2);
                true_positions.push_back(p);
            }
        record.ospa_step = ospa(est_positions, true_positions, cfg.ospa);
        result.steps.push_back(std::move(record));
    }

    // Trajectory metric over the full run.
    TrackSet est_set;
    for (auto& [label, history] : estimate_tracks) est_set.push_back(history);
    const auto ospa2_seq = ospa2(est_set, truth.position_tracks(), scenario.duration_steps, cfg.ospa);
    for (int k = 0; k < scenario.duration_steps; ++k)
        result.steps[static_cast<std::size_t>(k)].ospa2 = ospa2_seq[static_cast<std::size_t>(k)];
    return result;
}

/// Fan trials out across worker threads (MSAB_THREADS caps the pool);
/// results are returned in trial order regardless of scheduling.
inline std::vector<TrialResult> run_trials(const RunConfig& cfg, BirthMode mode, int n_trials,
                                           std::uint64_t base_seed, int n_threads) {
    std::vector<TrialResult> results(static_cast<std::size_t>(n_trials));
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, n_trials);
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
            try {
                while (true) {
                    const int t = next.fetch_add(1);
                    if (t >= n_trials) break;
                    results[static_cast<std::size_t>(t)] =
                        run_trial(cfg, mode, base_seed + static_cast<std::uint64_t>(t));
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& worker : workers) worker.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return results;
}

/// Per-(trial, step) CSV rows.
inline std::string trials_to_csv(const std::vector<TrialResult>& trials) {
    std::string out =
        "trial,step,card_true,card_true_lagged,card_est,card_error,ospa,ospa2,"
        "birth_components,tuple_space\n";
    for (std::size_t t = 0; t < trials.size(); ++t)
        for (const auto& s : trials[t].steps) {
            out += std::to_string(t) + "," + std::to_string(s.step) + "," +
                   std::to_string(s.card_true) + "," + std::to_string(s.card_true_lagged) + "," +
                   std::to_string(s.card_est) + "," +
                   std::to_string(cardinality_error(s.card_est, s.card_true)) + "," +
                   format_double(s.ospa_step) + "," + format_double(s.ospa2) + "," +
                   std::to_string(s.birth_components) + "," + format_double(s.tuple_space) + "\n";
        }
    return out;
}

/// Across-trial step averages.
inline std::string summary_to_csv(const std::vector<TrialResult>& trials) {
    std::string out =
        "step,mean_card_error,mean_abs_card_error_lagged,mean_ospa,mean_ospa2,"
        "mean_birth_components,mean_tuple_space\n";
    if (trials.empty()) return out;
    const std::size_t steps = trials.front().steps.size();
    for (std::size_t k = 0; k < steps; ++k) {
        double ce = 0.0, ace = 0.0, o1 = 0.0, o2 = 0.0, bc = 0.0, ts = 0.0;
        for (const auto& trial : trials) {
            const auto& s = trial.steps[k];
            ce += cardinality_error(s.card_est, s.card_true);
            ace += std::abs(s.card_est - s.card_true_lagged);
            o1 += s.ospa_step;
            o2 += s.ospa2;
            bc += s.birth_components;
            ts += s.tuple_space;
        }
        const double n = static_cast<double>(trials.size());
        out += std::to_string(k) + "," + format_double(ce / n) + "," + format_double(ace / n) +
               "," + format_double(o1 / n) + "," + format_double(o2 / n) + "," +
               format_double(bc / n) + "," + format_double(ts / n) + "\n";
    }
    return out;
}

// ---- Config file binding ----

inline RunConfig run_config_from(const KeyValueConfig& kv) {
    const long version = kv.get_int("schema_version", -1);
    if (version != 1)
        throw ConfigError("config key 'schema_version' must be present and equal to 1");

    RunConfig cfg;
    const std::string kind = kv.get_string("scenario.kind", "linear");
    if (kind == "linear")
        cfg.scenario.kind = ScenarioKind::Linear;
    else if (kind == "bearing-range")
        cfg.scenario.kind = ScenarioKind::BearingRange;
    else
        throw ConfigError("config key 'scenario.kind': expected linear or bearing-range, got '" +
                          kind + "'");

    cfg.scenario.n_sensors = static_cast<int>(kv.get_int("scenario.n_sensors", 3));
    cfg.scenario.duration_steps = static_cast<int>(kv.get_int("scenario.duration_steps", 40));
    cfg.scenario.dt = kv.get_double("scenario.dt", 1.0);
    cfg.scenario.clutter_rate = kv.get_double("scenario.clutter_rate", 5.0);
    cfg.scenario.p_detect = kv.get_double("scenario.p_detect", 0.95);
    cfg.scenario.box.min_x = kv.get_double("scenario.box.min_x", 0.0);
    cfg.scenario.box.max_x = kv.get_double("scenario.box.max_x", 10000.0);
    cfg.scenario.box.min_y = kv.get_double("scenario.box.min_y", 0.0);
    cfg.scenario.box.max_y = kv.get_double("scenario.box.max_y", 10000.0);

    const std::string schedule = kv.get_string("scenario.birth_schedule", "fixed");
    if (schedule == "random")
        cfg.scenario.birth_schedule = BirthScheduleKind::Random;
    else if (schedule == "fixed")
        cfg.scenario.birth_schedule = BirthScheduleKind::Fixed;
    else
        throw ConfigError("config key 'scenario.birth_schedule': expected random or fixed");

    cfg.scenario.birth_interval_steps =
        static_cast<int>(kv.get_int("scenario.birth_interval_steps", 5));
    cfg.scenario.max_births_per_event =
        static_cast<int>(kv.get_int("scenario.max_births_per_event", 3));
    cfg.scenario.speed = kv.get_double("scenario.speed", 50.0);
    cfg.scenario.min_lifetime_steps =
        static_cast<int>(kv.get_int("scenario.min_lifetime_steps", 15));
    cfg.scenario.max_lifetime_steps =
        static_cast<int>(kv.get_int("scenario.max_lifetime_steps", 30));
    cfg.scenario.fixed_targets = static_cast<int>(kv.get_int("scenario.fixed_targets", 20));
    cfg.scenario.birth_window_steps =
        static_cast<int>(kv.get_int("scenario.birth_window_steps", 8));
    cfg.scenario.death_window_steps =
        static_cast<int>(kv.get_int("scenario.death_window_steps", 5));
    cfg.scenario.accel_noise = kv.get_double("scenario.accel_noise", 5.0);
    cfg.scenario.position_noise = kv.get_double("scenario.position_noise", 10.0);
    cfg.scenario.bearing_noise = kv.get_double("scenario.bearing_noise", 0.25);
    cfg.scenario.range_noise = kv.get_double("scenario.range_noise", 10.0);
    cfg.scenario.range_max = kv.get_double("scenario.range_max", 15000.0);

    cfg.tracker.p_survival = kv.get_double("tracker.p_survival", 0.99);
    cfg.tracker.prune_threshold = kv.get_double("tracker.prune_threshold", 1e-3);
    cfg.tracker.max_components = static_cast<int>(kv.get_int("tracker.max_components", 100));
    cfg.tracker.extraction_threshold = kv.get_double("tracker.extraction_threshold", 0.5);

    cfg.birth.r_b_max = kv.get_double("birth.r_max", 1.0);
    cfg.birth.lambda_b = kv.get_double("birth.lambda", 0.5);
    cfg.birth.min_detections = static_cast<int>(kv.get_int("birth.min_detections", 2));
    cfg.tau = kv.get_double("birth.tau", 0.01);

    cfg.gibbs_iterations = static_cast<int>(kv.get_int("gibbs.iterations", 600));
    cfg.gibbs_restart_period = static_cast<int>(kv.get_int("gibbs.restart_period", 100));
    cfg.mc_particles = static_cast<int>(kv.get_int("gibbs.mc_particles", 1000));

    cfg.prior_position_sigma = kv.get_double("birth.prior.position_sigma", 1e5);
    cfg.prior_velocity_sigma = kv.get_double("birth.prior.velocity_sigma", 50.0);
    cfg.mc_velocity_sigma = kv.get_double("birth.prior.mc_velocity_sigma", 20.0);

    cfg.uniform_grid = static_cast<int>(kv.get_int("uniform_birth.grid", 10));
    cfg.uniform_r = kv.get_double("uniform_birth.r", 0.1);
    cfg.uniform_sigma_pos = kv.get_double("uniform_birth.sigma_pos", 250.0);
    cfg.uniform_sigma_vel = kv.get_double("uniform_birth.sigma_vel", 50.0);
    cfg.uniform_particles = static_cast<int>(kv.get_int("uniform_birth.particles", 200));

    cfg.ospa.cutoff = kv.get_double("metrics.ospa_cutoff", 200.0);
    cfg.ospa.order = kv.get_double("metrics.ospa_order", 1.0);
    cfg.ospa.window = static_cast<int>(kv.get_int("metrics.ospa_window", 5));
    cfg.ospa.window_weight_power = kv.get_double("metrics.ospa_window_weight_power", 0.0);

    kv.reject_unknown_keys();
    return cfg;
}

/// Fully-resolved manifest of a run: every effective setting, canonical order.
inline KeyValueConfig resolved_config(const RunConfig& cfg) {
    KeyValueConfig kv;
    kv.set("schema_version", "1");
    kv.set("scenario.kind",
           cfg.scenario.kind == ScenarioKind::Linear ? "linear" : "bearing-range");
    kv.set("scenario.n_sensors", std::to_string(cfg.scenario.n_sensors));
    kv.set("scenario.duration_steps", std::to_string(cfg.scenario.duration_steps));
    kv.set("scenario.dt", format_double(cfg.scenario.dt));
    kv.set("scenario.clutter_rate", format_double(cfg.scenario.clutter_rate));
    kv.set("scenario.p_detect", format_double(cfg.scenario.p_detect));
    kv.set("scenario.box.min_x", format_double(cfg.scenario.box.min_x));
    kv.set("scenario.box.max_x", format_double(cfg.scenario.box.max_x));
    kv.set("scenario.box.min_y", format_double(cfg.scenario.box.min_y));
    kv.set("scenario.box.max_y", format_double(cfg.scenario.box.max_y));
    kv.set("scenario.birth_schedule",
           cfg.scenario.birth_schedule == BirthScheduleKind::Random ? "random" : "fixed");
    kv.set("scenario.birth_interval_steps", std::to_string(cfg.scenario.birth_interval_steps));
    kv.set("scenario.max_births_per_event", std::to_string(cfg.scenario.max_births_per_event));
    kv.set("scenario.speed", format_double(cfg.scenario.speed));
    kv.set("scenario.min_lifetime_steps", std::to_string(cfg.scenario.min_lifetime_steps));
    kv.set("scenario.max_lifetime_steps", std::to_string(cfg.scenario.max_lifetime_steps));
    kv.set("scenario.fixed_targets", std::to_string(cfg.scenario.fixed_targets));
    kv.set("scenario.birth_window_steps", std::to_string(cfg.scenario.birth_window_steps));
    kv.set("scenario.death_window_steps", std::to_string(cfg.scenario.death_window_steps));
    kv.set("scenario.accel_noise", format_double(cfg.scenario.accel_noise));
    kv.set("scenario.position_noise", format_double(cfg.scenario.position_noise));
    kv.set("scenario.bearing_noise", format_double(cfg.scenario.bearing_noise));
    kv.set("scenario.range_noise", format_double(cfg.scenario.range_noise));
    kv.set("scenario.range_max", format_double(cfg.scenario.range_max));
    kv.set("tracker.p_survival", format_double(cfg.tracker.p_survival));
    kv.set("tracker.prune_threshold", format_double(cfg.tracker.prune_threshold));
    kv.set("tracker.max_components", std::to_string(cfg.tracker.max_components));
    kv.set("tracker.extraction_threshold", format_double(cfg.tracker.extraction_threshold));
    kv.set("birth.r_max", format_double(cfg.birth.r_b_max));
    kv.set("birth.lambda", format_double(cfg.birth.lambda_b));
    kv.set("birth.min_detections", std::to_string(cfg.birth.min_detections));
    kv.set("birth.tau", format_double(cfg.tau));
    kv.set("birth.prior.position_sigma", format_double(cfg.prior_position_sigma));
    kv.set("birth.prior.velocity_sigma", format_double(cfg.prior_velocity_sigma));
    kv.set("birth.prior.mc_velocity_sigma", format_double(cfg.mc_velocity_sigma));
    kv.set("gibbs.iterations", std::to_string(cfg.gibbs_iterations));
    kv.set("gibbs.restart_period", std::to_string(cfg.gibbs_restart_period));
    kv.set("gibbs.mc_particles", std::to_string(cfg.mc_particles));
    kv.set("uniform_birth.grid", std::to_string(cfg.uniform_grid));
    kv.set("uniform_birth.r", format_double(cfg.uniform_r));
    kv.set("uniform_birth.sigma_pos", format_double(cfg.uniform_sigma_pos));
    kv.set("uniform_birth.sigma_vel", format_double(cfg.uniform_sigma_vel));
    kv.set("uniform_birth.particles", std::to_string(cfg.uniform_particles));
    kv.set("metrics.ospa_cutoff", format_double(cfg.ospa.cutoff));
    kv.set("metrics.ospa_order", format_double(cfg.ospa.order));
    kv.set("metrics.ospa_window", std::to_string(cfg.ospa.window));
    kv.set("metrics.ospa_window_weight_power", format_double(cfg.ospa.window_weight_power));
    return kv;
}

}  // namespace msab
