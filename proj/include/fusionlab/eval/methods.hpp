#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fusionlab/filter/adaptive_ukf.hpp"
#include "fusionlab/filter/dead_reckoning.hpp"
#include "fusionlab/filter/ekf.hpp"
#include "fusionlab/filter/ukf.hpp"

namespace fusionlab::eval {

enum class Method { DeadReckoning, EKF, AdaptiveUKF, ManualUKF, PsoUKF };

inline constexpr std::array kAllMethods = {Method::DeadReckoning, Method::EKF, Method::AdaptiveUKF,
                                           Method::ManualUKF, Method::PsoUKF};

/// Identifier used on the command line and in file names.
inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::DeadReckoning: return "dead_reckoning";
    case Method::EKF: return "ekf";
    case Method::AdaptiveUKF: return "adaptive_ukf";
    case Method::ManualUKF: return "manual_ukf";
    case Method::PsoUKF: return "pso_ukf";
    }
    return "?";
}

/// Name used in report tables.
inline std::string_view display_name(Method m) {
    switch (m) {
    case Method::DeadReckoning: return "DeadReckoning";
    case Method::EKF: return "EKF";
    case Method::AdaptiveUKF: return "AdaptiveUKF";
    case Method::ManualUKF: return "ManualUKF";
    case Method::PsoUKF: return "PsoUKF";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : kAllMethods)
        if (s == to_string(m) || s == display_name(m)) return m;
    throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

/// Parameters shared by the baselines. EKF and the adaptive UKF start from
/// the manual noise levels.
struct MethodParams {
    filter::FilterParams manual = filter::FilterParams::manual_default();
    filter::FilterParams pso = filter::FilterParams::manual_default();
    filter::AdaptiveConfig adaptive;
};

inline filter::FilterRun run_method(Method m, const sim::SensorDataset& d, const MethodParams& p) {
    const auto init = filter::initial_estimate(d);
    switch (m) {
    case Method::DeadReckoning: return filter::run_dead_reckoning(d, init);
    case Method::EKF: return filter::run_ekf(d, p.manual.q_diag, p.manual.r_diag, init);
    case Method::AdaptiveUKF: return filter::run_adaptive_ukf(d, init, p.manual, p.adaptive).run;
    case Method::ManualUKF: return filter::run_filter(p.manual, d, init);
    case Method::PsoUKF: return filter::run_filter(p.pso, d, init);
    }
    throw std::invalid_argument("run_method: unknown method");
}

}  // namespace fusionlab::eval
