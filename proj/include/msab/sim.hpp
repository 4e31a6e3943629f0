#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "msab/core/motion_model.hpp"
#include "msab/core/random.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"
#include "msab/metrics.hpp"

namespace msab {

enum class ScenarioKind { Linear, BearingRange };
enum class BirthScheduleKind { Random, Fixed };

struct Box {
    double min_x = 0.0, max_x = 10000.0, min_y = 0.0, max_y = 10000.0;
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (min_x + max_x); }
    double cy() const { return 0.5 * (min_y + max_y); }
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Linear;
    int n_sensors = 3;
    int duration_steps = 40;
    double dt = 1.0;
    double clutter_rate = 5.0;  ///< lambda_c per sensor
    double p_detect = 0.95;
    Box box;
    BirthScheduleKind birth_schedule = BirthScheduleKind::Fixed;
    std::uint64_t rng_seed = 0;

    // Random schedule: 0..max_births_per_event targets every birth_interval_steps.
    int birth_interval_steps = 5;
    int max_births_per_event = 3;
    double speed = 50.0;
    int min_lifetime_steps = 15;
    int max_lifetime_steps = 30;

    // Fixed schedule: staggered births from distinct sparse locations.
    int fixed_targets = 20;
    int birth_window_steps = 8;
    int death_window_steps = 5;

    double accel_noise = 5.0;     ///< m/s^2 per axis
    double position_noise = 10.0; ///< linear sensor noise sigma, m
    double bearing_noise = 0.25;  ///< rad
    double range_noise = 10.0;    ///< m
    double range_max = 15000.0;   ///< bearing-range clutter window extent

    void validate() const {
        if (n_sensors < 1) throw std::invalid_argument("scenario: n_sensors must be >= 1");
        if (duration_steps < 1) throw std::invalid_argument("scenario: duration_steps must be >= 1");
        if (clutter_rate < 0.0) throw std::invalid_argument("scenario: clutter_rate negative");
        if (p_detect < 0.0 || p_detect > 1.0)
            throw std::invalid_argument("scenario: p_detect outside [0,1]");
        if (box.width() <= 0.0 || box.height() <= 0.0)
            throw std::invalid_argument("scenario: degenerate surveillance box");
        if (dt <= 0.0) throw std::invalid_argument("scenario: dt must be positive");
    }
};

/// Ground truth: one entry per target, states over its alive interval.
struct TruthLog {
    struct Target {
        int id = 0;
        int birth_step = 0;
        int death_step = 0;  // last alive step (inclusive)
        std::vector<Vec> states;  // one per alive step

        bool alive(int step) const { return step >= birth_step && step <= death_step; }
        const Vec& state(int step) const {
            return states.at(static_cast<std::size_t>(step - birth_step));
        }
    };
    std::vector<Target> targets;
    int duration = 0;

    int cardinality(int step) const {
        int n = 0;
        for (const auto& t : targets) n += t.alive(step) ? 1 : 0;
        return n;
    }
    /// Targets alive at `step` that were born strictly before it: the
    /// cardinality a one-step-lagged birth procedure can represent.
    int cardinality_lagged(int step) const {
        int n = 0;
        for (const auto& t : targets) n += (t.alive(step) && t.birth_step < step) ? 1 : 0;
        return n;
    }

    TrackSet position_tracks() const {
        TrackSet out;
        for (const auto& t : targets) {
            TrackHistory h;
            for (int k = t.birth_step; k <= t.death_step; ++k) {
                Vec p(2);
                p << t.state(k)(0), t.state(k)(2);
                h[k] = p;
            }
            out.push_back(std::move(h));
        }
        return out;
    }
};

namespace detail {

inline Vec initial_state(double px, double py, double speed, double heading) {
    Vec x(4);
    x << px, speed * std::sin(heading), py, speed * std::cos(heading);
    return x;
}

}  // namespace detail

/// Constant-velocity truth propagation with per-axis acceleration noise.
inline TruthLog generate_truth(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.rng_seed);
    const MotionModel motion = constant_velocity_model(cfg.dt, cfg.accel_noise);

    struct Seed {
        int birth, death;
        Vec x0;
    };
    std::vector<Seed> seeds;
    if (cfg.birth_schedule == BirthScheduleKind::Random) {
        for (int k = 0; k < cfg.duration_steps; k += cfg.birth_interval_steps) {
            const int births = rng.uniform_int(cfg.max_births_per_event + 1);
            for (int b = 0; b < births; ++b) {
                const double px = rng.uniform(cfg.box.min_x, cfg.box.max_x);
                const double py = rng.uniform(cfg.box.min_y, cfg.box.max_y);
                const double heading = rng.uniform(-M_PI, M_PI);
                const int life =
                    cfg.min_lifetime_steps +
                    rng.uniform_int(cfg.max_lifetime_steps - cfg.min_lifetime_steps + 1);
                seeds.push_back({k, std::min(cfg.duration_steps - 1, k + life),
                                 detail::initial_state(px, py, cfg.speed, heading)});
            }
        }
    } else {
        // Sparse fixed birth locations, no two alike; births staggered over
        // the opening window, deaths over the closing one.
        std::vector<Vec> locations;
        const double min_sep = 0.08 * std::min(cfg.box.width(), cfg.box.height());
        while (static_cast<int>(locations.size()) < cfg.fixed_targets) {
            Vec loc(2);
            loc << rng.uniform(cfg.box.min_x + 0.05 * cfg.box.width(),
                               cfg.box.max_x - 0.05 * cfg.box.width()),
                rng.uniform(cfg.box.min_y + 0.05 * cfg.box.height(),
                            cfg.box.max_y - 0.05 * cfg.box.height());
            bool ok = true;
            for (const auto& other : locations)
                if ((loc - other).norm() < min_sep) ok = false;
            if (ok) locations.push_back(loc);
        }
        for (int i = 0; i < cfg.fixed_targets; ++i) {
            const int birth = (i * cfg.birth_window_steps) / std::max(1, cfg.fixed_targets);
            const int death = cfg.duration_steps - 1 -
                              (i % std::max(1, cfg.death_window_steps));
            const double heading = rng.uniform(-M_PI, M_PI);
            seeds.push_back({birth, death,
                             detail::initial_state(locations[static_cast<std::size_t>(i)](0),
                                                   locations[static_cast<std::size_t>(i)](1),
                                                   cfg.speed, heading)});
        }
    }

    TruthLog log;
    log.duration = cfg.duration_steps;
    int id = 0;
    for (const auto& seed : seeds) {
        TruthLog::Target t;
        t.id = id++;
        t.birth_step = seed.birth;
        t.death_step = seed.death;
        Vec x = seed.x0;
        for (int k = seed.birth; k <= seed.death; ++k) {
            t.states.push_back(x);
            Vec accel = rng.normal_vec(2) * cfg.accel_noise;
            Vec kick(4);
            const double h = cfg.dt;
            kick << 0.5 * h * h * accel(0), h * accel(0), 0.5 * h * h * accel(1), h * accel(1);
            x = motion.F * x + kick;
        }
        log.targets.push_back(std::move(t));
    }
    return log;
}

/// Sensor suite for a scenario: identical XY-position sensors, or
/// bearing-range sensors spaced uniformly on a circle enclosing the box.
inline SensorList build_sensors(const ScenarioConfig& cfg) {
    cfg.validate();
    SensorList sensors;
    // The model's clutter intensity must stay positive even when the
    // generator produces none.
    const double model_rate = std::max(cfg.clutter_rate, 1e-12);
    if (cfg.kind == ScenarioKind::Linear) {
        Mat h = Mat::Zero(2, 4);
        h(0, 0) = 1.0;
        h(1, 2) = 1.0;
        const Mat r = cfg.position_noise * cfg.position_noise * Mat::Identity(2, 2);
        for (int s = 0; s < cfg.n_sensors; ++s)
            sensors.emplace_back(cfg.p_detect, model_rate, cfg.box.area(),
                                 LinearGaussian{h, r});
    } else {
        const double radius =
            1.15 * 0.5 * std::hypot(cfg.box.width(), cfg.box.height());
        Mat r = Mat::Zero(2, 2);
        r(0, 0) = cfg.bearing_noise * cfg.bearing_noise;
        r(1, 1) = cfg.range_noise * cfg.range_noise;
        for (int s = 0; s < cfg.n_sensors; ++s) {
            const double angle = 2.0 * M_PI * s / cfg.n_sensors;
            Eigen::Vector2d pos(cfg.box.cx() + radius * std::cos(angle),
                                cfg.box.cy() + radius * std::sin(angle));
            sensors.emplace_back(cfg.p_detect, model_rate,
                                 2.0 * M_PI * cfg.range_max, BearingRange{pos, r});
        }
    }
    return sensors;
}

/// One step of the observation model: independent detections plus Poisson
/// clutter uniform over the observation window, shuffled together.
inline MultiSensorMeasurements generate_measurements(const TruthLog& truth, int step,
                                                     const SensorList& sensors,
                                                     const ScenarioConfig& cfg, Rng& rng) {
    MultiSensorMeasurements z;
    for (const auto& sensor : sensors) {
        MeasurementSet z_s;
        for (const auto& target : truth.targets) {
            if (!target.alive(step)) continue;
            if (rng.uniform() < sensor.detection_prob())
                z_s.push_back(sensor.sample_measurement(target.state(step), rng));
        }
        const int clutter = rng.poisson(cfg.clutter_rate);
        for (int c = 0; c < clutter; ++c) {
            Vec zc(2);
            if (sensor.is_linear()) {
                zc << rng.uniform(cfg.box.min_x, cfg.box.max_x),
                    rng.uniform(cfg.box.min_y, cfg.box.max_y);
            } else {
                zc << rng.uniform(-M_PI, M_PI), rng.uniform(0.0, cfg.range_max);
            }
            z_s.push_back(zc);
        }
        rng.shuffle(z_s);
        z.push_back(std::move(z_s));
    }
    return z;
}

/// CSV export: one row per (target, step).
inline std::string truth_to_csv(const TruthLog& log) {
    std::string out = "target_id,step,px,vx,py,vy\n";
    char line[160];
    for (const auto& t : log.targets)
        for (int k = t.birth_step; k <= t.death_step; ++k) {
            const Vec& x = t.state(k);
            std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", t.id, k, x(0),
                          x(1), x(2), x(3));
            out += line;
        }
    return out;
}

/// CSV export: one row per measurement.
inline std::string measurements_to_csv(const MultiSensorMeasurements& z, int step) {
    std::string out;
    char line[120];
    for (std::size_t s = 0; s < z.size(); ++s)
        for (std::size_t j = 0; j < z[s].size(); ++j) {
            std::snprintf(line, sizeof(line), "%d,%d,%zu,%.17g,%.17g\n", step,
                          static_cast<int>(s), j + 1, z[s][j](0), z[s][j](1));
            out += line;
        }
    return out;
}

}  // namespace msab
