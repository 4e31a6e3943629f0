#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msab/sim.hpp"
#include "msab/tracker.hpp"
#include "support/helpers.hpp"

using namespace msab;
using Catch::Approx;

namespace {

BernoulliComponent gaussian_track(int id, double existence, const Vec& mu, const Mat& cov) {
    return BernoulliComponent(tuple_to_label(test::tuple_of({id}), 0), existence,
                              GaussianDensity(mu, cov));
}

Vec state4(double px, double vx, double py, double vy) {
    Vec x(4);
    x << px, vx, py, vy;
    return x;
}

}  // namespace

TEST_CASE("predict: empty prior passes birth through unchanged", "[tracker]") {
    Rng rng(1);
    const auto motion = constant_velocity_model(1.0, 5.0);
    LmbDensity birth;
    birth.add(gaussian_track(1, 0.3, state4(10, 1, 20, -1), Mat::Identity(4, 4)));
    const auto predicted = tracker::predict(LmbDensity{}, motion, 0.99, birth, rng);
    REQUIRE(predicted.size() == 1);
    CHECK(predicted.components()[0].existence == Approx(0.3));
    CHECK((spatial_mean(predicted.components()[0].spatial) - state4(10, 1, 20, -1))
              .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("predict: zero survival leaves only birth", "[tracker]") {
    Rng rng(2);
    const auto motion = constant_velocity_model(1.0, 5.0);
    LmbDensity prior;
    prior.add(gaussian_track(1, 0.9, state4(0, 0, 0, 0), Mat::Identity(4, 4)));
    LmbDensity birth;
    birth.add(gaussian_track(2, 0.4, state4(5, 0, 5, 0), Mat::Identity(4, 4)));
    const auto predicted = tracker::predict(prior, motion, 0.0, birth, rng);
    REQUIRE(predicted.size() == 2);
    for (const auto& comp : predicted.components()) {
        if (label_to_tuple(comp.label) == test::tuple_of({1}))
            CHECK(comp.existence == Approx(0.0));
        else
            CHECK(comp.existence == Approx(0.4));
    }
}

TEST_CASE("predict applies the Kalman identities to Gaussian tracks", "[tracker]") {
    Rng rng(3);
    const auto motion = constant_velocity_model(0.5, 3.0);
    const Vec mu = state4(100, 10, -50, 5);
    const Mat p = test::random_spd(rng, 4, 2.0);
    LmbDensity prior;
    prior.add(gaussian_track(1, 0.8, mu, p));
    const auto predicted = tracker::predict(prior, motion, 0.9, LmbDensity{}, rng);
    const auto& g = std::get<GaussianDensity>(predicted.components()[0].spatial);
    CHECK((g.mean() - motion.F * mu).lpNorm<Eigen::Infinity>() < 1e-12);
    const Mat expected = motion.F * p * motion.F.transpose() + motion.Q;
    CHECK((g.cov() - expected).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(predicted.components()[0].existence == Approx(0.8 * 0.9));
}

TEST_CASE("predict rejects label collisions", "[tracker]") {
    Rng rng(4);
    const auto motion = constant_velocity_model(1.0, 5.0);
    LmbDensity prior, birth;
    prior.add(gaussian_track(1, 0.5, state4(0, 0, 0, 0), Mat::Identity(4, 4)));
    birth.add(gaussian_track(1, 0.5, state4(1, 0, 1, 0), Mat::Identity(4, 4)));
    CHECK_THROWS_AS(tracker::predict(prior, motion, 0.9, birth, rng), std::invalid_argument);
}

TEST_CASE("update with no measurements applies the missed-detection factor", "[tracker]") {
    const auto sensor = test::position_sensor(10.0, 0.95);
    LmbDensity prior;
    const double r = 0.9;
    prior.add(gaussian_track(1, r, state4(0, 0, 0, 0), Mat::Identity(4, 4)));
    const auto [posterior, r_a] = tracker::update_sensor(prior, {}, sensor);
    REQUIRE(posterior.size() == 1);
    const double expected = r * 0.05 / (1.0 - r + r * 0.05);
    CHECK(posterior.components()[0].existence == Approx(expected).epsilon(1e-12));
    CHECK(r_a.size() == 0);
}

TEST_CASE("update with a measurement on a confident track drives existence to one",
          "[tracker]") {
    const auto sensor = test::position_sensor(10.0, 0.95, 1e-6, 1e8);  // negligible clutter
    Vec mu = state4(100, 0, 200, 0);
    LmbDensity prior;
    prior.add(gaussian_track(1, 0.5, mu, 25.0 * Mat::Identity(4, 4)));
    Vec z(2);
    z << 100.0, 200.0;
    const auto [posterior, r_a] = tracker::update_sensor(prior, {z}, sensor);
    CHECK(posterior.components()[0].existence > 1.0 - 1e-9);
    CHECK(r_a(0) > 1.0 - 1e-9);
    // Posterior mean pulled toward the measurement.
    const Vec post_mean = spatial_mean(posterior.components()[0].spatial);
    CHECK(post_mean(0) == Approx(100.0).margin(1.0));
    CHECK(post_mean(2) == Approx(200.0).margin(1.0));
}

TEST_CASE("update with an empty prior returns zeros", "[tracker]") {
    const auto sensor = test::position_sensor(10.0);
    Vec z(2);
    z << 1.0, 2.0;
    const auto [posterior, r_a] = tracker::update_sensor(LmbDensity{}, {z, z}, sensor);
    CHECK(posterior.empty());
    CHECK(r_a.size() == 2);
    CHECK(r_a(0) == 0.0);
    CHECK(r_a(1) == 0.0);
}

TEST_CASE("prune drops weak components, cap keeps the strongest hundred", "[tracker]") {
    TrackerConfig cfg;
    LmbDensity all_weak;
    for (int i = 0; i < 5; ++i)
        all_weak.add(gaussian_track(i + 1, 1e-4, state4(i, 0, 0, 0), Mat::Identity(4, 4)));
    CHECK(tracker::prune_and_cap(all_weak, cfg).empty());

    LmbDensity many;
    for (int i = 0; i < 150; ++i)
        many.add(gaussian_track(i + 1, 0.001 + i * 0.006, state4(i, 0, 0, 0),
                                Mat::Identity(4, 4)));
    const auto capped = tracker::prune_and_cap(many, cfg);
    CHECK(capped.size() == 100);
    double min_kept = 1.0;
    for (const auto& comp : capped.components()) min_kept = std::min(min_kept, comp.existence);
    CHECK(min_kept > 0.001 + 49 * 0.006 - 1e-12);  // the strongest 100 survive
}

TEST_CASE("extract reports means of components above the threshold", "[tracker]") {
    TrackerConfig cfg;
    LmbDensity lmb;
    lmb.add(gaussian_track(1, 0.6, state4(1, 2, 3, 4), Mat::Identity(4, 4)));
    lmb.add(gaussian_track(2, 0.4, state4(9, 9, 9, 9), Mat::Identity(4, 4)));
    const auto estimates = tracker::extract(lmb, cfg);
    REQUIRE(estimates.size() == 1);
    CHECK(label_to_tuple(estimates[0].label) == test::tuple_of({1}));
    CHECK((estimates[0].state - state4(1, 2, 3, 4)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("existence stays in [0,1] through random predict/update cycles", "[tracker]") {
    Rng rng(7);
    const auto motion = constant_velocity_model(1.0, 5.0);
    const auto sensor = test::position_sensor(10.0, 0.9, 2.0, 1e6);
    LmbDensity lmb;
    for (int i = 0; i < 5; ++i)
        lmb.add(gaussian_track(i + 1, rng.uniform(),
                               state4(rng.uniform(0, 800), rng.normal(), rng.uniform(0, 800),
                                      rng.normal()),
                               100.0 * Mat::Identity(4, 4)));
    for (int cycle = 0; cycle < 1000; ++cycle) {
        lmb = tracker::predict(lmb, motion, 0.99, LmbDensity{}, rng);
        MeasurementSet z;
        const int m = rng.uniform_int(4);
        for (int j = 0; j < m; ++j) {
            Vec zj(2);
            zj << rng.uniform(0, 800), rng.uniform(0, 800);
            z.push_back(zj);
        }
        auto [updated, r_a] = tracker::update_sensor(lmb, z, sensor);
        lmb = std::move(updated);
        for (const auto& comp : lmb.components()) {
            REQUIRE(comp.existence >= 0.0);
            REQUIRE(comp.existence <= 1.0);
        }
        for (int j = 0; j < r_a.size(); ++j) {
            REQUIRE(r_a(j) >= 0.0);
            REQUIRE(r_a(j) <= 1.0);
        }
    }
}

TEST_CASE("single-target estimate converges with perfect detection", "[tracker]") {
    // Zero clutter in the data, p_D = 1, one sensor: extraction RMSE shrinks
    // over 10 steps (averaged over seeds to wash out measurement noise).
    const auto motion = constant_velocity_model(1.0, 0.0);
    Mat h = Mat::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    SensorModel sensor(1.0, 1e-9, 1e8, LinearGaussian{h, 25.0 * Mat::Identity(2, 2)});
    TrackerConfig cfg;

    std::vector<double> sq_err(10, 0.0);
    const int seeds = 8;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng(9 + static_cast<std::uint64_t>(seed));
        Vec truth = state4(500, 20, 300, -10);
        LmbDensity lmb;
        lmb.add(gaussian_track(1, 0.6, state4(600, 0, 200, 0),
                               Mat::Identity(4, 4) * 10000.0));
        for (int k = 0; k < 10; ++k) {
            lmb = tracker::predict(lmb, motion, 0.99, LmbDensity{}, rng);
            truth = motion.F * truth;
            const Vec z = sensor.sample_measurement(truth, rng);
            auto [updated, r_a] = tracker::update_sensor(lmb, {z}, sensor);
            lmb = std::move(updated);
            const auto estimates = tracker::extract(lmb, cfg);
            REQUIRE(estimates.size() == 1);
            Vec err(2);
            err << estimates[0].state(0) - truth(0), estimates[0].state(2) - truth(2);
            sq_err[static_cast<std::size_t>(k)] += err.squaredNorm() / seeds;
        }
    }
    std::vector<double> rmse;
    for (double e : sq_err) rmse.push_back(std::sqrt(e));
    CHECK(rmse.back() < rmse.front());
    CHECK((rmse[7] + rmse[8] + rmse[9]) / 3.0 < (rmse[0] + rmse[1] + rmse[2]) / 3.0);
    CHECK(rmse.back() < 6.0);
}

TEST_CASE("particle track update reweights toward the measurement", "[tracker]") {
    Rng rng(11);
    BearingRange br{Eigen::Vector2d(0.0, 0.0), [] {
                        Mat r = Mat::Zero(2, 2);
                        r(0, 0) = 0.01 * 0.01;
                        r(1, 1) = 25.0;
                        return r;
                    }()};
    SensorModel sensor(0.95, 1.0, 2.0 * M_PI * 1e4, br);

    const Vec truth = state4(1000, 0, 1000, 0);
    const int n = 2000;
    Mat states(4, n);
    for (int i = 0; i < n; ++i)
        states.col(i) = truth + 200.0 * rng.normal_vec(4);
    LmbDensity lmb;
    lmb.add(BernoulliComponent(tuple_to_label(test::tuple_of({1}), 0), 0.5,
                               ParticleSet(states, Vec::Constant(n, 1.0 / n))));

    const Vec z = sensor.observe(truth);
    auto [posterior, r_a] = tracker::update_sensor(lmb, {z}, sensor);
    const auto& p = std::get<ParticleSet>(posterior.components()[0].spatial);
    const Vec post_mean = p.mean();
    CHECK(std::abs(post_mean(0) - 1000.0) < 60.0);
    CHECK(std::abs(post_mean(2) - 1000.0) < 60.0);
    CHECK(posterior.components()[0].existence > 0.5);
    CHECK(r_a(0) > 0.9);
}
