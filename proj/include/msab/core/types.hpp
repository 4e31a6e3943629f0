#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msab/core/linalg.hpp"

namespace msab {

/// One 0-augmented measurement index per sensor; index 0 means missed detection.
class MeasurementTuple {
public:
    MeasurementTuple() = default;
    explicit MeasurementTuple(std::vector<int> indices) : indices_(std::move(indices)) {
        for (int j : indices_)
            if (j < 0) throw std::invalid_argument("MeasurementTuple: negative index");
    }
    static MeasurementTuple all_missed(int num_sensors) {
        return MeasurementTuple(std::vector<int>(static_cast<std::size_t>(num_sensors), 0));
    }

    int num_sensors() const { return static_cast<int>(indices_.size()); }
    int operator[](int s) const { return indices_.at(static_cast<std::size_t>(s)); }
    const std::vector<int>& indices() const { return indices_; }

    /// Copy with coordinate s replaced by j.
    MeasurementTuple with_index(int s, int j) const {
        MeasurementTuple out = *this;
        out.indices_.at(static_cast<std::size_t>(s)) = j;
        if (j < 0) throw std::invalid_argument("MeasurementTuple: negative index");
        return out;
    }

    int non_missed_count() const {
        return static_cast<int>(std::count_if(indices_.begin(), indices_.end(),
                                              [](int j) { return j > 0; }));
    }
    bool all_missed_indices() const { return non_missed_count() == 0; }

    friend bool operator==(const MeasurementTuple& a, const MeasurementTuple& b) {
        return a.indices_ == b.indices_;
    }
    friend bool operator<(const MeasurementTuple& a, const MeasurementTuple& b) {
        return a.indices_ < b.indices_;
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(indices_[i]);
        }
        return s + ")";
    }

private:
    std::vector<int> indices_;
};

/// Count of non-missed (positive) indices in a tuple.
inline int non_missed_count(const MeasurementTuple& j) { return j.non_missed_count(); }

/// A tuple whose measurements do not point at any common state (e.g. clutter
/// whose back-projection falls outside the birth prior's support).
struct InconsistentTupleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Birth label (k+1, J). Distinct tuples at a timestep yield distinct labels
/// and vice versa; the tuple is carried verbatim so the mapping is bijective
/// by construction.
struct BirthLabel {
    int timestep = 0;
    MeasurementTuple tuple;

    friend bool operator==(const BirthLabel& a, const BirthLabel& b) {
        return a.timestep == b.timestep && a.tuple == b.tuple;
    }
    friend bool operator<(const BirthLabel& a, const BirthLabel& b) {
        if (a.timestep != b.timestep) return a.timestep < b.timestep;
        return a.tuple < b.tuple;
    }
    std::string to_string() const { return std::to_string(timestep) + ":" + tuple.to_string(); }
};

inline BirthLabel tuple_to_label(const MeasurementTuple& j, int timestep) {
    if (timestep < 0) throw std::invalid_argument("tuple_to_label: negative timestep");
    return BirthLabel{timestep, j};
}

inline MeasurementTuple label_to_tuple(const BirthLabel& l) { return l.tuple; }

/// Gaussian spatial density with a validated SPD covariance.
class GaussianDensity {
public:
    GaussianDensity(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
            throw std::invalid_argument("GaussianDensity: dimension mismatch");
        if (!is_symmetric(cov_))
            throw std::invalid_argument("GaussianDensity: covariance not symmetric");
        if (!is_positive_definite(cov_))
            throw std::invalid_argument("GaussianDensity: covariance not positive definite");
        llt_ = Eigen::LLT<Mat>(cov_);
        if (llt_.info() != Eigen::Success)
            throw std::invalid_argument("GaussianDensity: Cholesky failed");
    }

    int dim() const { return static_cast<int>(mean_.size()); }
    const Vec& mean() const { return mean_; }
    const Mat& cov() const { return cov_; }
    const Eigen::LLT<Mat>& llt() const { return llt_; }

    double log_pdf(const Vec& x) const {
        const Vec half = llt_.matrixL().solve(x - mean_);
        return -0.5 * (dim() * kLog2Pi + log_det_from_llt(llt_) + half.squaredNorm());
    }

    template <typename RngT>
    Vec sample(RngT& rng) const {
        return mean_ + llt_.matrixL() * rng.normal_vec(dim());
    }

private:
    Vec mean_;
    Mat cov_;
    Eigen::LLT<Mat> llt_;
};

/// Weighted particle representation; states stored column-wise.
class ParticleSet {
public:
    ParticleSet(Mat states, Vec weights) : states_(std::move(states)), weights_(std::move(weights)) {
        if (states_.cols() != weights_.size())
            throw std::invalid_argument("ParticleSet: weight/state count mismatch");
        if (weights_.size() == 0) throw std::invalid_argument("ParticleSet: empty");
        if ((weights_.array() < 0.0).any())
            throw std::invalid_argument("ParticleSet: negative weight");
        normalize();
    }

    int size() const { return static_cast<int>(states_.cols()); }
    int dim() const { return static_cast<int>(states_.rows()); }
    const Mat& states() const { return states_; }
    const Vec& weights() const { return weights_; }

    /// Idempotent; throws if total weight is not positive.
    void normalize() {
        const double total = weights_.sum();
        if (!(total > 0.0)) throw std::runtime_error("ParticleSet: total weight not positive");
        weights_ /= total;
    }

    Vec mean() const { return states_ * weights_; }

    Mat covariance() const {
        const Vec m = mean();
        Mat c = Mat::Zero(dim(), dim());
        for (int n = 0; n < size(); ++n) {
            const Vec d = states_.col(n) - m;
            c += weights_(n) * d * d.transpose();
        }
        return c;
    }

    double effective_sample_size() const { return 1.0 / weights_.squaredNorm(); }

private:
    Mat states_;
    Vec weights_;
};

using SpatialDistribution = std::variant<GaussianDensity, ParticleSet>;

inline Vec spatial_mean(const SpatialDistribution& s) {
    return std::visit([](const auto& d) { return d.mean(); }, s);
}

/// One labeled Bernoulli component of an LMB density.
struct BernoulliComponent {
    BernoulliComponent(BirthLabel l, double r, SpatialDistribution s)
        : label(std::move(l)), existence(r), spatial(std::move(s)) {
        if (existence < 0.0 && existence > -1e-9) existence = 0.0;
        if (existence > 1.0 && existence < 1.0 + 1e-9) existence = 1.0;
        if (existence < 0.0 || existence > 1.0)
            throw std::invalid_argument("BernoulliComponent: existence outside [0,1]");
    }

    BirthLabel label;
    double existence;
    SpatialDistribution spatial;
};

/// LMB density: Bernoulli components with pairwise-distinct labels.
class LmbDensity {
public:
    LmbDensity() = default;

    void add(BernoulliComponent c) {
        for (const auto& existing : components_)
            if (existing.label == c.label)
                throw std::invalid_argument("LmbDensity: duplicate label " + c.label.to_string());
        components_.push_back(std::move(c));
    }

    const std::vector<BernoulliComponent>& components() const { return components_; }
    std::vector<BernoulliComponent>& components() { return components_; }
    std::size_t size() const { return components_.size(); }
    bool empty() const { return components_.empty(); }

private:
    std::vector<BernoulliComponent> components_;
};

}  // namespace msab
