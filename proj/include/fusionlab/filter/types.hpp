#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace fusionlab::filter {

inline constexpr int kStateDim = 5;  // x, y, vx, vy, heading
inline constexpr int kMeasDim = 2;   // GPS x, y
inline constexpr int kSigmaCount = 2 * kStateDim + 1;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;

enum StateIndex : int { kX = 0, kY = 1, kVx = 2, kVy = 3, kHeading = 4 };

/// The filter lost numerical health (non-SPD covariance, singular
/// innovation covariance, non-finite state) at time t.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t)
        : std::runtime_error(what + " at t=" + std::to_string(t)), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

/// Tunable filter hyperparameters: sigma-point scaling and diagonal noise.
struct FilterParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
    StateVector q_diag = StateVector::Constant(0.1);
    MeasVector r_diag = MeasVector::Constant(1.0);

    static FilterParams isotropic(double alpha, double beta, double kappa, double q, double r) {
        return {alpha, beta, kappa, StateVector::Constant(q), MeasVector::Constant(r)};
    }

    /// Textbook defaults used as the manually tuned reference.
    static FilterParams manual_default() { return isotropic(1e-3, 2.0, 0.0, 0.1, 1.0); }

    double lambda() const { return alpha * alpha * (kStateDim + kappa) - kStateDim; }

    /// True when every entry lies inside the tuning search space.
    bool within_search_bounds() const {
        auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
        if (!in(alpha, 1e-3, 1.0) || !in(beta, 0.0, 3.0) || !in(kappa, 0.0, 5.0)) return false;
        for (int i = 0; i < kStateDim; ++i)
            if (!in(q_diag(i), 1e-5, 10.0)) return false;
        for (int i = 0; i < kMeasDim; ++i)
            if (!in(r_diag(i), 1e-5, 10.0)) return false;
        return true;
    }

    /// Rejects parameter sets the filter cannot run with at all. Values
    /// outside the search bounds are allowed.
    void validate() const {
        if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(kappa))
            throw std::invalid_argument("filter params must be finite");
        if (!(kStateDim + lambda() > 0.0))
            throw std::invalid_argument("filter params: n + lambda must be > 0");
        if (!q_diag.allFinite() || !r_diag.allFinite() || (q_diag.array() < 0.0).any() ||
            (r_diag.array() < 0.0).any())
            throw std::invalid_argument("filter params: noise variances must be finite and >= 0");
    }

    bool operator==(const FilterParams&) const = default;
};

struct StateEstimate {
    double t = 0.0;
    StateVector mean = StateVector::Zero();
    StateMatrix cov = StateMatrix::Identity();
};

inline constexpr double kJitterStart = 1e-9;
inline constexpr double kJitterMax = 1e-3;

/// Symmetrizes cov in place and returns its lower Cholesky factor. When the
/// factorization fails, diagonal jitter starting at 1e-9 is added and
/// escalated x10 up to 1e-3; cov keeps the jitter that succeeded.
inline StateMatrix condition_spd(StateMatrix& cov, double t) {
    cov = 0.5 * (cov + cov.transpose()).eval();
    if (!cov.allFinite()) throw DivergenceError("non-finite covariance", t);
    Eigen::LLT<StateMatrix> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
        StateMatrix trial = cov + jitter * StateMatrix::Identity();
        llt.compute(trial);
        if (llt.info() == Eigen::Success) {
            cov = trial;
            return llt.matrixL();
        }
    }
    throw DivergenceError("covariance not positive definite after maximum jitter", t);
}

}  // namespace fusionlab::filter
