#pragma once

#include <cmath>

#include "fusionlab/filter/types.hpp"

namespace fusionlab::filter {

/// Merwe scaled weights for a given parameter set.
struct UnscentedWeights {
    double lambda;
    double scale;    // n + lambda
    double mean0;
    double cov0;
    double other;    // shared by points 1..2n, both mean and covariance

    explicit UnscentedWeights(const FilterParams& p)
        : lambda(p.lambda()),
          scale(kStateDim + lambda),
          mean0(lambda / scale),
          cov0(lambda / scale + (1.0 - p.alpha * p.alpha + p.beta)),
          other(0.5 / scale) {}

    double mean(int i) const { return i == 0 ? mean0 : other; }
    double cov(int i) const { return i == 0 ? cov0 : other; }
};

using SigmaMatrix = Eigen::Matrix<double, kStateDim, kSigmaCount>;
using SigmaWeights = Eigen::Matrix<double, kSigmaCount, 1>;

struct SigmaSet {
    SigmaMatrix points;
    SigmaWeights w_mean;
    SigmaWeights w_cov;
};

/// Points from an already-factored covariance (cov = L L^T).
inline SigmaMatrix sigma_points_from_factor(const StateVector& mean, const StateMatrix& chol_lower,
                                            const UnscentedWeights& w) {
    const StateMatrix spread = std::sqrt(w.scale) * chol_lower;
    SigmaMatrix pts;
    pts.col(0) = mean;
    for (int i = 0; i < kStateDim; ++i) {
        pts.col(1 + i) = mean + spread.col(i);
        pts.col(1 + kStateDim + i) = mean - spread.col(i);
    }
    return pts;
}

/// chi_0 = mean, chi_i = mean +- column i of sqrt((n + lambda) cov).
/// Throws DivergenceError when cov cannot be conditioned to SPD.
inline SigmaSet merwe_sigma_points(const StateVector& mean, const StateMatrix& cov,
                                   const FilterParams& params) {
    params.validate();
    const UnscentedWeights w(params);
    StateMatrix conditioned = cov;
    const StateMatrix l = condition_spd(conditioned, 0.0);
    SigmaSet set;
    set.points = sigma_points_from_factor(mean, l, w);
    for (int i = 0; i < kSigmaCount; ++i) {
        set.w_mean(i) = w.mean(i);
        set.w_cov(i) = w.cov(i);
    }
    return set;
}

}  // namespace fusionlab::filter
