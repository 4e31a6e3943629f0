#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "msab/association.hpp"
#include "msab/birth.hpp"
#include "msab/core/motion_model.hpp"
#include "msab/core/sensor_model.hpp"
#include "msab/core/types.hpp"

namespace msab::oracle {

/// Exact categorical distribution p(J) proportional to r_U(J) psi-bar(J)
/// over the full product space of measurement tuples.
struct ExactTupleDistribution {
    std::map<MeasurementTuple, double> entries;
    double log_normalizer = 0.0;

    double prob(const MeasurementTuple& j) const {
        auto it = entries.find(j);
        return it == entries.end() ? 0.0 : it->second;
    }
};

inline std::vector<MeasurementTuple> all_tuples(const std::vector<int>& m_per_sensor) {
    double space = 1.0;
    for (int m : m_per_sensor) space *= m + 1;
    if (space > 1e6) throw std::invalid_argument("all_tuples: product space exceeds 1e6");
    std::vector<MeasurementTuple> out;
    std::vector<int> idx(m_per_sensor.size(), 0);
    while (true) {
        out.emplace_back(idx);
        int s = static_cast<int>(idx.size()) - 1;
        while (s >= 0) {
            if (++idx[static_cast<std::size_t>(s)] <= m_per_sensor[static_cast<std::size_t>(s)]) break;
            idx[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s < 0) break;
    }
    return out;
}

/// Brute-force enumeration of the tuple distribution; the ground truth the
/// Gibbs sampler is tested against. Guarded to product spaces of <= 1e6.
template <typename Backend>
ExactTupleDistribution enumerate_exact(const MultiSensorMeasurements& z, const SensorList& sensors,
                                       const AssociationTable& table, const Backend& backend) {
    if (z.size() != sensors.size())
        throw std::invalid_argument("enumerate_exact: sensor/measurement count mismatch");
    std::vector<int> m(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) m[s] = static_cast<int>(z[s].size());
    const auto tuples = all_tuples(m);

    std::vector<double> log_terms;
    log_terms.reserve(tuples.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& j : tuples) {
        const double lt = log_unassociation_prob(j, table) + backend.log_psi_bar(j);
        log_terms.push_back(lt);
        max_log = std::max(max_log, lt);
    }
    if (!std::isfinite(max_log))
        throw std::runtime_error("enumerate_exact: all tuples have zero mass");
    double total = 0.0;
    for (double lt : log_terms) total += std::exp(lt - max_log);

    ExactTupleDistribution dist;
    dist.log_normalizer = max_log + std::log(total);
    for (std::size_t i = 0; i < tuples.size(); ++i)
        dist.entries[tuples[i]] = std::exp(log_terms[i] - max_log) / total;
    return dist;
}

/// Exact birth probabilities r_B(l) = min(r_max, r-hat * lambda) with the
/// r-hat normalizer over the FULL tuple space (Eq.-(22) read literally).
template <typename Backend>
std::map<MeasurementTuple, double> exact_birth_probabilities(const MultiSensorMeasurements& z,
                                                             const SensorList& sensors,
                                                             const AssociationTable& table,
                                                             const Backend& backend,
                                                             const BirthConfig& cfg) {
    const auto dist = enumerate_exact(z, sensors, table, backend);
    std::map<MeasurementTuple, double> out;
    for (const auto& [tuple, p] : dist.entries)
        out[tuple] = std::min(cfg.r_b_max, p * cfg.lambda_b);
    return out;
}

/// Theorem-1 truncation: the epsilon-superlevel set of the birth probabilities.
inline std::set<MeasurementTuple> epsilon_truncation(
    const std::map<MeasurementTuple, double>& birth_probs, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon_truncation: negative epsilon");
    std::set<MeasurementTuple> kept;
    for (const auto& [tuple, r] : birth_probs)
        if (r >= epsilon) kept.insert(tuple);
    return kept;
}

/// Total variation distance between an empirical count map and an exact
/// distribution over the same tuple space.
inline double tv_distance(const std::map<MeasurementTuple, int>& counts,
                          const ExactTupleDistribution& exact) {
    long total = 0;
    for (const auto& [tuple, c] : counts) total += c;
    if (total <= 0) throw std::invalid_argument("tv_distance: empty counts");
    double tv = 0.0;
    std::set<MeasurementTuple> keys;
    for (const auto& [tuple, c] : counts) keys.insert(tuple);
    for (const auto& [tuple, p] : exact.entries) keys.insert(tuple);
    for (const auto& tuple : keys) {
        auto it = counts.find(tuple);
        const double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
        tv += std::abs(emp - exact.prob(tuple));
    }
    return 0.5 * tv;
}

// ---- Exhaustive single-step delta-GLMB update (tiny instances) ----

/// One delta-GLMB hypothesis: a label set, the multi-sensor association map
/// theta (one tuple per label), its weight, and per-label densities.
struct TinyHypothesis {
    std::vector<BirthLabel> labels;
    std::map<BirthLabel, MeasurementTuple> assoc;
    double weight = 0.0;
    std::map<BirthLabel, GaussianDensity> densities;
};

struct TinyGlmb {
    std::vector<TinyHypothesis> hypotheses;
};

namespace detail {

/// Evidence <p, prod_s psi^{s,j_s}> and the conditioned density, via
/// sequential covariance-form (Kalman) updates. This is an algebraic route
/// independent of the information-form backend.
inline std::pair<double, GaussianDensity> evidence_and_update(const GaussianDensity& density,
                                                              const MeasurementTuple& tuple,
                                                              const MultiSensorMeasurements& z,
                                                              const SensorList& sensors) {
    double log_ev = 0.0;
    Vec mu = density.mean();
    Mat p = density.cov();
    for (int s = 0; s < tuple.num_sensors(); ++s) {
        const SensorModel& sensor = sensors[static_cast<std::size_t>(s)];
        const int j = tuple[s];
        if (j == 0) {
            log_ev += std::log1p(-sensor.detection_prob());
            continue;
        }
        const auto& lin = sensor.linear();
        const Vec& zj = z[static_cast<std::size_t>(s)][static_cast<std::size_t>(j - 1)];
        const Mat s_innov = lin.H * p * lin.H.transpose() + lin.R;
        log_ev += std::log(sensor.detection_prob()) + gaussian_log_pdf(zj, lin.H * mu, s_innov) -
                  sensor.log_clutter_intensity(zj);
        const Mat gain = p * lin.H.transpose() * s_innov.inverse();
        mu = mu + gain * (zj - lin.H * mu);
        p = p - gain * lin.H * p;
        p = 0.5 * (p + p.transpose());
    }
    return {log_ev, GaussianDensity(mu, p)};
}

/// All per-sensor positive-1:1 association maps from `labels` into the
/// 0-augmented index spaces, as one tuple per label.
inline std::vector<std::vector<MeasurementTuple>> all_association_maps(
    int num_labels, const std::vector<int>& m_per_sensor) {
    const int num_sensors = static_cast<int>(m_per_sensor.size());
    // Per sensor, enumerate injective-on-positives assignments label -> {0..m}.
    std::vector<std::vector<std::vector<int>>> per_sensor_maps(static_cast<std::size_t>(num_sensors));
    for (int s = 0; s < num_sensors; ++s) {
        std::vector<int> current(static_cast<std::size_t>(num_labels), 0);
        std::vector<bool> used(static_cast<std::size_t>(m_per_sensor[static_cast<std::size_t>(s)]) + 1, false);
        auto& out = per_sensor_maps[static_cast<std::size_t>(s)];
        std::function<void(int)> rec = [&](int i) {
            if (i == num_labels) {
                out.push_back(current);
                return;
            }
            for (int j = 0; j <= m_per_sensor[static_cast<std::size_t>(s)]; ++j) {
                if (j > 0 && used[static_cast<std::size_t>(j)]) continue;
                current[static_cast<std::size_t>(i)] = j;
                if (j > 0) used[static_cast<std::size_t>(j)] = true;
                rec(i + 1);
                if (j > 0) used[static_cast<std::size_t>(j)] = false;
            }
        };
        rec(0);
    }
    // Cartesian product across sensors, re-expressed per label.
    std::vector<std::vector<MeasurementTuple>> maps;
    std::vector<std::size_t> pick(static_cast<std::size_t>(num_sensors), 0);
    while (true) {
        std::vector<MeasurementTuple> assoc;
        assoc.reserve(static_cast<std::size_t>(num_labels));
        for (int i = 0; i < num_labels; ++i) {
            std::vector<int> idx(static_cast<std::size_t>(num_sensors));
            for (int s = 0; s < num_sensors; ++s)
                idx[static_cast<std::size_t>(s)] =
                    per_sensor_maps[static_cast<std::size_t>(s)][pick[static_cast<std::size_t>(s)]]
                                   [static_cast<std::size_t>(i)];
            assoc.emplace_back(std::move(idx));
        }
        maps.push_back(std::move(assoc));
        int s = num_sensors - 1;
        while (s >= 0) {
            if (++pick[static_cast<std::size_t>(s)] < per_sensor_maps[static_cast<std::size_t>(s)].size())
                break;
            pick[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s < 0) break;
    }
    return maps;
}

struct RawHypothesis {
    std::vector<BirthLabel> labels;
    std::map<BirthLabel, MeasurementTuple> assoc;
    double raw_weight = 0.0;  // normalized prior weight times unnormalized update weight
    std::map<BirthLabel, GaussianDensity> densities;
    std::vector<double> psi_bars;  // one per label, in label order
    bool contains_any(const std::set<BirthLabel>& set) const {
        for (const auto& l : labels)
            if (set.count(l)) return true;
        return false;
    }
};

/// Exhaustive enumeration of Eqs. (13)-(14): every surviving subset, every
/// birth subset, every positive-1:1 multi-sensor association map.
inline std::vector<RawHypothesis> enumerate_posterior_raw(const TinyGlmb& prior,
                                                          const LmbDensity& birth,
                                                          const MultiSensorMeasurements& z,
                                                          const SensorList& sensors,
                                                          double p_survival,
                                                          const MotionModel& motion) {
    std::vector<int> m(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) {
        m[s] = static_cast<int>(z[s].size());
        if (m[s] > 2) throw std::invalid_argument("tiny_glmb: more than 2 measurements per sensor");
    }
    if (z.size() > 2) throw std::invalid_argument("tiny_glmb: more than 2 sensors");

    std::vector<RawHypothesis> out;
    for (const auto& hyp : prior.hypotheses) {
        // Candidate labels: persisting (predicted) then birth.
        std::vector<BirthLabel> candidates = hyp.labels;
        std::map<BirthLabel, GaussianDensity> predicted;
        for (const auto& l : hyp.labels)
            predicted.emplace(l, motion.predict(hyp.densities.at(l)));
        std::map<BirthLabel, double> birth_prob;
        for (const auto& comp : birth.components()) {
            candidates.push_back(comp.label);
            birth_prob[comp.label] = comp.existence;
            predicted.emplace(comp.label, std::get<GaussianDensity>(comp.spatial));
        }
        if (candidates.size() > 4)
            throw std::invalid_argument("tiny_glmb: more than 4 labels");

        const int n_cand = static_cast<int>(candidates.size());
        for (int mask = 0; mask < (1 << n_cand); ++mask) {
            std::vector<BirthLabel> labels_plus;
            double log_base = std::log(hyp.weight);
            for (int i = 0; i < n_cand; ++i) {
                const BirthLabel& l = candidates[static_cast<std::size_t>(i)];
                const bool in = mask & (1 << i);
                const bool is_birth = birth_prob.count(l) > 0;
                const double keep_p = is_birth ? birth_prob.at(l) : p_survival;
                if (in) {
                    if (keep_p <= 0.0) {
                        log_base = -std::numeric_limits<double>::infinity();
                        break;
                    }
                    labels_plus.push_back(l);
                    log_base += std::log(keep_p);
                } else {
                    if (keep_p >= 1.0) {
                        log_base = -std::numeric_limits<double>::infinity();
                        break;
                    }
                    log_base += std::log1p(-keep_p);
                }
            }
            if (!std::isfinite(log_base)) continue;

            const auto maps = all_association_maps(static_cast<int>(labels_plus.size()), m);
            for (const auto& assoc : maps) {
                RawHypothesis raw;
                raw.labels = labels_plus;
                double log_w = log_base;
                bool ok = true;
                for (std::size_t i = 0; i < labels_plus.size(); ++i) {
                    const BirthLabel& l = labels_plus[i];
                    const auto [log_ev, posterior] =
                        evidence_and_update(predicted.at(l), assoc[i], z, sensors);
                    if (!std::isfinite(log_ev)) {
                        ok = false;
                        break;
                    }
                    log_w += log_ev;
                    raw.assoc.emplace(l, assoc[i]);
                    raw.densities.emplace(l, posterior);
                    raw.psi_bars.push_back(std::exp(log_ev));
                }
                if (!ok) continue;
                raw.raw_weight = std::exp(log_w);
                out.push_back(std::move(raw));
            }
        }
    }
    return out;
}

}  // namespace detail

/// Single-step exhaustive delta-GLMB update under linear-Gaussian models;
/// returns the normalized posterior.
inline TinyGlmb tiny_glmb_update(const TinyGlmb& prior, const LmbDensity& birth,
                                 const MultiSensorMeasurements& z, const SensorList& sensors,
                                 double p_survival, const MotionModel& motion) {
    const auto raw = detail::enumerate_posterior_raw(prior, birth, z, sensors, p_survival, motion);
    double total = 0.0;
    for (const auto& h : raw) total += h.raw_weight;
    if (!(total > 0.0)) throw std::runtime_error("tiny_glmb_update: zero total posterior mass");
    TinyGlmb post;
    for (const auto& h : raw) {
        TinyHypothesis th;
        th.labels = h.labels;
        th.assoc = h.assoc;
        th.densities = h.densities;
        th.weight = h.raw_weight / total;
        post.hypotheses.push_back(std::move(th));
    }
    return post;
}

struct Theorem1Check {
    double l1_distance = 0.0;
    double bound = 0.0;
    std::size_t dropped_hypotheses = 0;
    bool holds() const { return l1_distance <= bound + 1e-12; }
};

/// Numerical check of the Theorem-1 truncation bound: the L1 distance between
/// the posteriors under the full and epsilon-truncated birth sets (sum of the
/// dropped hypotheses' weights, normalized prior times unnormalized update)
/// against sum K^{|I+|} eps^{N_T(I+)} with K the largest psi-bar observed over
/// the dropped hypotheses' labels.
inline Theorem1Check theorem1_bound_check(const TinyGlmb& prior, const LmbDensity& full_birth,
                                          const std::set<BirthLabel>& truncated_kept,
                                          double epsilon, const MultiSensorMeasurements& z,
                                          const SensorList& sensors, double p_survival,
                                          const MotionModel& motion) {
    std::set<BirthLabel> truncated_away;
    for (const auto& comp : full_birth.components())
        if (!truncated_kept.count(comp.label)) truncated_away.insert(comp.label);

    const auto raw =
        detail::enumerate_posterior_raw(prior, full_birth, z, sensors, p_survival, motion);

    Theorem1Check check;
    double k_bound = 0.0;
    std::vector<const detail::RawHypothesis*> dropped;
    for (const auto& h : raw) {
        if (!h.contains_any(truncated_away)) continue;
        dropped.push_back(&h);
        for (double psi : h.psi_bars) k_bound = std::max(k_bound, psi);
    }
    for (const auto* h : dropped) {
        check.l1_distance += h->raw_weight;
        int n_truncated = 0;
        for (const auto& l : h->labels)
            if (truncated_away.count(l)) ++n_truncated;
        check.bound += std::pow(k_bound, static_cast<double>(h->labels.size())) *
                       std::pow(epsilon, static_cast<double>(n_truncated));
    }
    check.dropped_hypotheses = dropped.size();
    return check;
}

}  // namespace msab::oracle
