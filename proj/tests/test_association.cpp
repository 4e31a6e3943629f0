#include <catch2/catch_amalgamated.hpp>

#include "msab/association.hpp"
#include "support/helpers.hpp"

using namespace msab;
using Catch::Approx;

namespace {

AssociationTable table_of(std::vector<std::vector<double>> entries) {
    std::vector<Vec> vs;
    for (auto& e : entries) {
        Vec v(static_cast<int>(e.size()));
        for (std::size_t i = 0; i < e.size(); ++i) v(static_cast<int>(i)) = e[i];
        vs.push_back(std::move(v));
    }
    return AssociationTable(std::move(vs));
}

}  // namespace

TEST_CASE("unassociation probability basics", "[association]") {
    const auto zero_table = table_of({{0.0, 0.0}, {0.0}});
    CHECK(unassociation_prob(test::tuple_of({2, 1}), zero_table) == Approx(1.0));
    CHECK(unassociation_prob(test::tuple_of({0, 0}), zero_table) == Approx(1.0));

    const auto t = table_of({{0.5}, {0.2}});
    CHECK(unassociation_prob(test::tuple_of({0, 0}), t) == Approx(1.0));
    CHECK(unassociation_prob(test::tuple_of({1, 1}), t) == Approx(0.4));
    CHECK_THROWS_AS(unassociation_prob(test::tuple_of({1}), t), std::invalid_argument);
}

TEST_CASE("r_A(0) is zero and entries are clamped below one", "[association]") {
    const auto t = table_of({{1.0, 0.3}});
    CHECK(t.entry(0, 0) == 0.0);
    CHECK(t.entry(0, 1) == Approx(AssociationTable::kMaxEntry));
    CHECK(t.entry(0, 2) == Approx(0.3));
    CHECK_THROWS_AS(table_of({{1.2}}), std::invalid_argument);
}

TEST_CASE("unassociation probability factorizes over sensors", "[association]") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> entries(3);
        for (auto& e : entries)
            for (int j = 0; j < 3; ++j) e.push_back(rng.uniform());
        const auto t = table_of(entries);
        std::vector<int> idx(3);
        for (auto& v : idx) v = rng.uniform_int(4);
        const MeasurementTuple j(idx);
        for (int s = 0; s < 3; ++s) {
            const MeasurementTuple reduced = j.with_index(s, 0);
            const double factored =
                unassociation_prob(reduced, t) * (1.0 - t.entry(s, j[s]));
            CHECK(unassociation_prob(j, t) == Approx(factored).epsilon(1e-12));
        }
    }
}

TEST_CASE("lmb association probs: empty prior gives zeros", "[association]") {
    const auto sensor = test::position_sensor(10.0);
    MeasurementSet z{Vec::Zero(2), Vec::Ones(2)};
    const Vec r_a = lmb_association_probs(LmbDensity{}, z, sensor);
    REQUIRE(r_a.size() == 2);
    CHECK(r_a(0) == 0.0);
    CHECK(r_a(1) == 0.0);
}

TEST_CASE("lmb association probs: confident track claims its measurement", "[association]") {
    // One track exactly on z_1, far from z_2, small clutter.
    const auto sensor = test::position_sensor(10.0, 0.95, 1.0, 1e8);
    Vec mu(4);
    mu << 100.0, 0.0, 200.0, 0.0;
    Mat p = Mat::Identity(4, 4) * 25.0;
    LmbDensity prior;
    prior.add(BernoulliComponent(tuple_to_label(test::tuple_of({1}), 0), 0.9,
                                 GaussianDensity(mu, p)));
    Vec z1(2), z2(2);
    z1 << 100.0, 200.0;
    z2 << 5000.0, 5000.0;
    const Vec r_a = lmb_association_probs(prior, {z1, z2}, sensor);

    // Hand-computed single-track Bayes weights with the same formula.
    const double r = 0.9, pd = 0.95, kappa = 1e-8;
    const Mat s_innov = sensor.linear().H * p * sensor.linear().H.transpose() + sensor.linear().R;
    const double l1 = std::exp(gaussian_log_pdf(z1, sensor.linear().H * mu, s_innov));
    const double w0 = 1.0 - r + r * (1.0 - pd);
    const double w1 = r * pd * l1 / kappa;
    CHECK(r_a(0) == Approx(w1 / (w0 + w1)).epsilon(1e-9));
    CHECK(r_a(0) > 0.999);
    CHECK(r_a(1) < 1e-12);
}

TEST_CASE("lmb association probs vanish as clutter dominates", "[association]") {
    Vec mu(4);
    mu << 100.0, 0.0, 200.0, 0.0;
    LmbDensity prior;
    prior.add(BernoulliComponent(tuple_to_label(test::tuple_of({1}), 0), 0.9,
                                 GaussianDensity(mu, Mat::Identity(4, 4) * 25.0)));
    Vec z1(2);
    z1 << 100.0, 200.0;

    double previous = 1.0;
    for (double rate : {1.0, 1e3, 1e6, 1e9}) {
        const auto sensor = test::position_sensor(10.0, 0.95, rate, 1e4);
        const Vec r_a = lmb_association_probs(prior, {z1}, sensor);
        CHECK(r_a(0) <= previous + 1e-15);  // monotone in kappa
        previous = r_a(0);
    }
    CHECK(previous < 1e-3);
}
