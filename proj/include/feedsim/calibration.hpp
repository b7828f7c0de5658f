#pragma once

#include <string>
#include <vector>

#include "feedsim/common.hpp"
#include "feedsim/gumbel.hpp"
#include "feedsim/simulator.hpp"

namespace feedsim {

// Six expectations: E[s^t], E[N], E[S] for below- and above-median
// baseline-exposure users, N and S in model view units.
struct MomentVector {
    double s_low = kMissing, n_low = kMissing, shares_low = kMissing;
    double s_high = kMissing, n_high = kMissing, shares_high = kMissing;
    double median = kMissing;  // group split point

    std::vector<double> as_array() const {
        return {s_low, n_low, shares_low, s_high, n_high, shares_high};
    }
};

// Exposure environment behind the model moments: the taste axis follows a
// Gumbel law truncated to (0, 1) while randomized feeds hold assigned
// exposure at q_bar.
struct ExposureModel {
    TruncatedGumbel taste;
    double q_bar = kMissing;

    static ExposureModel from_panel(const Panel& panel);
};

// Group means of s_t, views, shares at the intervention period for treated
// users, split at the median baseline exposure.  Counts are rescaled into
// model units by posts_per_view_unit.
MomentVector empirical_moments(const Panel& panel, double posts_per_view_unit = 1.0);

// Closed-form moments integrated against the taste density with a fixed
// 256-node Gauss-Legendre rule per group; exit-region values integrate as
// their truncated-at-zero counterparts.
MomentVector simulated_moments(const UtilityParams& candidate, double theta,
                               const ExposureModel& exposure);

// Sum of squared relative deviations; zero empirical moments are dropped
// with a warning.
double msm_objective(const MomentVector& simulated, const MomentVector& empirical,
                     Warnings* warnings = nullptr);

struct CalibratedParams {
    double alpha = kMissing, beta = kMissing, eta = kMissing, delta = kMissing;
    double objective_value = kMissing;
    int iterations = 0;
    bool converged = false;
    MomentVector fitted;
    MomentVector empirical;
};

struct CalibrationOptions {
    Vector x0;                         // starting (alpha, beta, eta, delta); defaults to ones
    double posts_per_view_unit = 1.0;  // scale of the panel counts
    double mu = 0.0;                   // carried into the fitted parameter set
};

// Method of simulated moments: minimizes msm_objective over log-parameters.
CalibratedParams calibrate(const Panel& panel, double theta, const CalibrationOptions& opts = {});

// calibration report CSV: parameter names, values, objective, iterations,
// per-moment fit
void write_calibration_csv(const std::string& path, const CalibratedParams& result);

}  // namespace feedsim
