#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msab/gaussian_backend.hpp"
#include "msab/gibbs.hpp"
#include "msab/oracle.hpp"
#include "msab/validation.hpp"
#include "support/helpers.hpp"

using namespace msab;
using Catch::Approx;

namespace {

struct PsiStub {
    double value = 1.0;
    double log_psi_bar(const MeasurementTuple&) const { return std::log(value); }
};

}  // namespace

TEST_CASE("enumerate_exact covers the product space and normalizes", "[oracle]") {
    const auto inst = validation::make_linear_instance(1, 2, 1);
    GaussianBackend backend(inst.z, inst.sensors, inst.prior);
    const auto dist = oracle::enumerate_exact(inst.z, inst.sensors, inst.table, backend);
    CHECK(dist.entries.size() == 4);
    double total = 0.0;
    for (const auto& [tuple, p] : dist.entries) total += p;
    CHECK(total == Approx(1.0).margin(1e-9));
}

TEST_CASE("uniform psi-bar and zero r_A give the uniform distribution", "[oracle]") {
    PsiStub stub;
    MultiSensorMeasurements z{{Vec::Zero(2), Vec::Zero(2)}, {Vec::Zero(2)}};
    SensorList sensors{test::identity_sensor(2, 1.0), test::identity_sensor(2, 1.0)};
    const auto table = AssociationTable::zeros(z);
    const auto dist = oracle::enumerate_exact(z, sensors, table, stub);
    CHECK(dist.entries.size() == 6);
    for (const auto& [tuple, p] : dist.entries) CHECK(p == Approx(1.0 / 6.0).margin(1e-12));
}

TEST_CASE("enumeration guard refuses oversized spaces", "[oracle]") {
    CHECK_THROWS_AS(oracle::all_tuples({200, 200, 200}), std::invalid_argument);
}

TEST_CASE("exact marginal conditionals factor as Theorem 2 states", "[oracle]") {
    const auto inst = validation::make_linear_instance(5, 3, 2);
    GaussianBackend backend(inst.z, inst.sensors, inst.prior);
    const auto dist = oracle::enumerate_exact(inst.z, inst.sensors, inst.table, backend);

    // For a fixed J^{-s}, p(j | J^{-s}) from the joint must match the
    // normalized (1 - r_A) psi-bar over candidates.
    const auto j_rest = test::tuple_of({0, 1, 2});
    for (int s = 0; s < 3; ++s) {
        double joint_total = 0.0;
        std::vector<double> joint(3, 0.0);
        std::vector<double> direct(3, 0.0);
        for (int cand = 0; cand <= 2; ++cand) {
            const auto j = j_rest.with_index(s, cand);
            joint[static_cast<std::size_t>(cand)] = dist.prob(j);
            joint_total += dist.prob(j);
            direct[static_cast<std::size_t>(cand)] =
                (1.0 - inst.table.entry(s, cand)) * std::exp(backend.log_psi_bar(j));
        }
        double direct_total = 0.0;
        for (double d : direct) direct_total += d;
        for (int cand = 0; cand <= 2; ++cand)
            CHECK(joint[static_cast<std::size_t>(cand)] / joint_total ==
                  Approx(direct[static_cast<std::size_t>(cand)] / direct_total).margin(1e-9));
    }
}

TEST_CASE("epsilon truncation edges", "[oracle]") {
    std::map<MeasurementTuple, double> probs{{test::tuple_of({0}), 0.1},
                                             {test::tuple_of({1}), 0.5},
                                             {test::tuple_of({2}), 0.9}};
    CHECK(oracle::epsilon_truncation(probs, 0.0).size() == 3);
    CHECK(oracle::epsilon_truncation(probs, 0.95).empty());
    const auto mid = oracle::epsilon_truncation(probs, 0.5);
    CHECK(mid.size() == 2);
    CHECK(mid.count(test::tuple_of({1})) == 1);
}

TEST_CASE("epsilon set recovered by thresholding the Gibbs output", "[oracle]") {
    const auto inst = validation::make_linear_instance(9, 2, 2);
    GaussianBackend backend(inst.z, inst.sensors, inst.prior);
    BirthConfig cfg;
    cfg.lambda_b = 1.0;
    cfg.r_b_max = 1.0;
    const auto exact_r =
        oracle::exact_birth_probabilities(inst.z, inst.sensors, inst.table, backend, cfg);
    std::vector<double> values;
    for (const auto& [tuple, r] : exact_r) values.push_back(r);
    std::sort(values.begin(), values.end());
    const double epsilon = values[values.size() / 2];
    const auto expected = oracle::epsilon_truncation(exact_r, epsilon);

    // The Gibbs output visits a superset of the epsilon-criterion tuples;
    // thresholding its exact r values recovers the same set.
    GibbsConfig gibbs_cfg;
    gibbs_cfg.iterations = 4000;
    gibbs_cfg.rng_seed = 10;
    const auto result = sample_birth_tuples(inst.z, inst.sensors, inst.table, backend, gibbs_cfg);
    std::set<MeasurementTuple> recovered;
    for (const auto& tuple : result.tuples)
        if (exact_r.at(tuple) >= epsilon) recovered.insert(tuple);
    CHECK(recovered == expected);
}

TEST_CASE("tiny glmb: no measurements and no birth leaves prediction-only weights", "[oracle]") {
    SensorList sensors{test::identity_sensor(2, 2.0, 0.9, 1.0, 1e4)};
    MultiSensorMeasurements z{{}};
    oracle::TinyGlmb prior;
    oracle::TinyHypothesis hyp;
    hyp.weight = 1.0;
    const auto label = tuple_to_label(test::tuple_of({7}), 0);
    hyp.labels.push_back(label);
    hyp.densities.emplace(label, GaussianDensity(Vec::Zero(2), 4.0 * Mat::Identity(2, 2)));
    prior.hypotheses.push_back(hyp);

    const MotionModel motion(Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0);
    const double p_s = 0.9;
    const auto post = oracle::tiny_glmb_update(prior, LmbDensity{}, z, sensors, p_s, motion);

    // Hypotheses: {} with (1-p_s), {l} with p_s (1-p_D) (theta maps to 0).
    REQUIRE(post.hypotheses.size() == 2);
    double w_empty = 0.0, w_track = 0.0;
    for (const auto& h : post.hypotheses)
        (h.labels.empty() ? w_empty : w_track) = h.weight;
    const double expect_empty = 0.1;
    const double expect_track = 0.9 * 0.1;
    CHECK(w_empty == Approx(expect_empty / (expect_empty + expect_track)).epsilon(1e-12));
    CHECK(w_track == Approx(expect_track / (expect_empty + expect_track)).epsilon(1e-12));
}

TEST_CASE("tiny glmb: measurement on a confident track dominates", "[oracle]") {
    const double p_d = 0.9, p_s = 0.99, kappa_rate = 1.0, vol = 1e4;
    SensorList sensors{test::identity_sensor(2, 2.0, p_d, kappa_rate, vol)};
    Vec mu(2);
    mu << 5.0, -3.0;
    const Mat p0 = 4.0 * Mat::Identity(2, 2);
    MultiSensorMeasurements z{{mu}};  // measurement right on the track mean

    oracle::TinyGlmb prior;
    oracle::TinyHypothesis hyp;
    hyp.weight = 1.0;
    const auto label = tuple_to_label(test::tuple_of({1}), 0);
    hyp.labels.push_back(label);
    hyp.densities.emplace(label, GaussianDensity(mu, p0));
    prior.hypotheses.push_back(hyp);

    const MotionModel motion(Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0);
    const auto post = oracle::tiny_glmb_update(prior, LmbDensity{}, z, sensors, p_s, motion);

    // Hand-computed odds of association vs missed detection for the
    // surviving-track hypotheses.
    const Mat s_innov = p0 + 4.0 * Mat::Identity(2, 2);
    const double g = std::exp(gaussian_log_pdf(mu, mu, s_innov));
    const double kappa = kappa_rate / vol;
    const double odds = (p_d * g / kappa) / (1.0 - p_d);

    double w_assoc = 0.0, w_missed = 0.0;
    for (const auto& h : post.hypotheses) {
        if (h.labels.empty()) continue;
        if (h.assoc.at(label)[0] == 1)
            w_assoc = h.weight;
        else
            w_missed = h.weight;
    }
    CHECK(w_assoc / w_missed == Approx(odds).epsilon(1e-9));
    CHECK(w_assoc > 0.5);
}

TEST_CASE("tiny glmb: symmetric two-measurement ambiguity splits evenly", "[oracle]") {
    SensorList sensors{test::identity_sensor(2, 2.0, 0.9, 1.0, 1e4)};
    Vec z1(2), z2(2);
    z1 << 3.0, 0.0;
    z2 << -3.0, 0.0;
    MultiSensorMeasurements z{{z1, z2}};

    oracle::TinyGlmb prior;
    oracle::TinyHypothesis hyp;
    hyp.weight = 1.0;
    const auto label = tuple_to_label(test::tuple_of({1}), 0);
    hyp.labels.push_back(label);
    hyp.densities.emplace(label, GaussianDensity(Vec::Zero(2), 9.0 * Mat::Identity(2, 2)));
    prior.hypotheses.push_back(hyp);

    const MotionModel motion(Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0);
    const auto post =
        oracle::tiny_glmb_update(prior, LmbDensity{}, z, sensors, 0.99, motion);
    double w1 = 0.0, w2 = 0.0;
    for (const auto& h : post.hypotheses) {
        if (h.labels.empty()) continue;
        if (h.assoc.at(label)[0] == 1) w1 = h.weight;
        if (h.assoc.at(label)[0] == 2) w2 = h.weight;
    }
    CHECK(w1 == Approx(w2).epsilon(1e-12));
    CHECK(w1 > 0.0);
}

TEST_CASE("theorem 1: epsilon = 0 truncates nothing", "[oracle]") {
    const auto inst = validation::make_tiny_instance(3);
    std::set<BirthLabel> all_kept;
    for (const auto& comp : inst.full_birth.components()) all_kept.insert(comp.label);
    const auto check = oracle::theorem1_bound_check(inst.prior, inst.full_birth, all_kept, 0.0,
                                                    inst.z, inst.sensors, inst.p_survival,
                                                    inst.motion);
    CHECK(check.l1_distance == 0.0);
    CHECK(check.bound == 0.0);
    CHECK(check.dropped_hypotheses == 0);
}

TEST_CASE("theorem 1: epsilon above all r_B drops all birth hypotheses", "[oracle]") {
    const auto inst = validation::make_tiny_instance(4);
    const auto check =
        oracle::theorem1_bound_check(inst.prior, inst.full_birth, {}, 1.0, inst.z, inst.sensors,
                                     inst.p_survival, inst.motion);
    CHECK(check.l1_distance > 0.0);
    CHECK(check.l1_distance <= check.bound + 1e-12);

    // The distance equals the total mass of hypotheses containing birth labels.
    const auto raw = oracle::detail::enumerate_posterior_raw(
        inst.prior, inst.full_birth, inst.z, inst.sensors, inst.p_survival, inst.motion);
    std::set<BirthLabel> birth_labels;
    for (const auto& comp : inst.full_birth.components()) birth_labels.insert(comp.label);
    double expected = 0.0;
    for (const auto& h : raw)
        if (h.contains_any(birth_labels)) expected += h.raw_weight;
    CHECK(check.l1_distance == Approx(expected).epsilon(1e-12));
}

TEST_CASE("theorem 1: halving epsilon never raises distance or bound", "[oracle]") {
    // Distance monotonicity follows from superlevel truncation; the bound's
    // is checked numerically on these pinned instances (crossings that shrink
    // a surviving hypothesis' truncation exponent can raise it elsewhere).
    for (std::uint64_t seed : {1ULL, 3ULL, 6ULL}) {
        const auto inst = validation::make_tiny_instance(seed);
        double max_r = 0.0;
        for (const auto& [tuple, r] : inst.birth_probs) max_r = std::max(max_r, r);

        double prev_distance = std::numeric_limits<double>::infinity();
        double prev_bound = std::numeric_limits<double>::infinity();
        for (double eps = max_r * 1.01; eps > 1e-4 * max_r; eps /= 2.0) {
            const auto kept_tuples = oracle::epsilon_truncation(inst.birth_probs, eps);
            std::set<BirthLabel> kept;
            for (const auto& t : kept_tuples) kept.insert(tuple_to_label(t, inst.timestep));
            const auto check =
                oracle::theorem1_bound_check(inst.prior, inst.full_birth, kept, eps, inst.z,
                                             inst.sensors, inst.p_survival, inst.motion);
            CHECK(check.l1_distance <= prev_distance + 1e-12);
            CHECK(check.bound <= prev_bound + 1e-12);
            CHECK(check.l1_distance <= check.bound + 1e-12);
            prev_distance = check.l1_distance;
            prev_bound = check.bound;
        }
    }
}

TEST_CASE("theorem 1 bound holds across randomized tiny instances", "[oracle]") {
    const auto check = validation::theorem1_check(2024, 30);
    INFO("max distance " << check.max_distance << " max bound " << check.max_bound);
    CHECK(check.violations == 0);
}

TEST_CASE("tiny glmb guards reject oversized instances", "[oracle]") {
    SensorList sensors{test::identity_sensor(2, 1.0)};
    MultiSensorMeasurements z{{Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)}};  // m = 3
    oracle::TinyGlmb prior;
    oracle::TinyHypothesis hyp;
    hyp.weight = 1.0;
    prior.hypotheses.push_back(hyp);
    const MotionModel motion(Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0);
    CHECK_THROWS_AS(
        oracle::tiny_glmb_update(prior, LmbDensity{}, z, sensors, 0.9, motion),
        std::invalid_argument);
}
