#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feedsim/behavior.hpp"
#include "feedsim/common.hpp"
#include "feedsim/regression.hpp"
#include "feedsim/rng.hpp"

namespace feedsim {

// Taste distributions for the synthetic population.  Draws land strictly
// inside (0, 1); beta/gumbel/cluster draws are clamped to [lo, hi].
struct TasteDist {
    enum class Kind { Beta, Gumbel01, Uniform, Degenerate, Clusters };
    Kind kind = Kind::Beta;
    double a = 2.0, b = 25.0;      // beta shape
    double loc = 0.0, scale = 1.0; // gumbel
    double lo = 0.005, hi = 0.6;   // clamp bounds
    double value = 0.1;            // degenerate point
    // normal-mixture clusters (weights sum to 1), clamped to [lo, hi]
    std::vector<double> weights, means, sds;

    double draw(Rng& rng) const;
    void validate() const;

    static TasteDist beta_default();
    static TasteDist degenerate(double p);
    static TasteDist clusters(std::vector<double> w, std::vector<double> m,
                              std::vector<double> s, double lo = 0.005, double hi = 0.6);
};

struct SimConfig {
    long n_users = 10000;
    double treat_frac = 0.5;
    int days_per_period = 30;
    UtilityParams params{1.0, 2.0, 1.0, 10.0, 0.16, 0.2};
    TasteDist taste = TasteDist::beta_default();
    double posts_per_view_unit = 120.0;  // converts model view units into post counts
    std::uint64_t seed = 1;

    void validate() const;
};

struct UserState {
    long user_id = 0;
    bool treated = false;
    double taste = 0.0;  // p
    long category = 0;   // opaque group id c(p); behaviorally inert
};

// One user-period observation; the exchange format between the simulator
// and every estimator.
struct PanelRecord {
    long user_id = 0;
    bool treated = false;
    int period = 0;
    long views = 0;
    long shares = 0;
    long toxic_views = 0;
    long toxic_shares = 0;
    double v_t = kMissing;      // toxic_views / views
    double s_t = kMissing;      // toxic_shares / shares
    double v_half1 = kMissing;  // toxic proportion over the first half of view events
    double v_half2 = kMissing;  //   ... and the second half
    bool exited = false;
};

using Panel = std::vector<PanelRecord>;

// Period exposure assignment: maps a user to this period's aggregated toxic
// proportion, drawing any randomness from the user's own substream.
using ExposureFn = std::function<double(const UserState&, Rng&)>;

std::vector<UserState> draw_population(const SimConfig& config);

// Exposure rules.
ExposureFn control_exposure();
// Daily draws from the control-group assignment pool, averaged over the period.
ExposureFn random_feed_exposure(std::vector<double> control_pool, int days_per_period);

Panel run_period(const std::vector<UserState>& users, int period, const ExposureFn& exposure,
                 const SimConfig& config, unsigned workers = 1);

// Baseline equilibrium period plus an intervention period where treated users
// get daily random-feed draws.
Panel run_experiment(const SimConfig& config, unsigned workers = 1);

// Quintile labels 1..5 by baseline v_t, ties broken by user_id.
std::map<long, int> assign_quantiles(const Panel& panel);

using OutcomeFn = std::function<double(const PanelRecord&)>;

// Common outcome selectors.
OutcomeFn outcome_views();
OutcomeFn outcome_shares();
OutcomeFn outcome_toxic_views();
OutcomeFn outcome_toxic_shares();
OutcomeFn outcome_v_t();
OutcomeFn outcome_s_t();
OutcomeFn outcome_toxic_share_view_ratio();  // toxic_shares / toxic_views

struct AteResult {
    double effect = kMissing;
    double se = kMissing;
    double control_mean = kMissing;
    long n_treated = 0;
    long n_control = 0;
    Warnings warnings;
};

// Difference in means with HC1 robust standard error, period-1 records.
AteResult ate(const Panel& panel, const OutcomeFn& outcome, int period = 1);

std::vector<AteResult> hte_by_quantile(const Panel& panel, const OutcomeFn& outcome,
                                       const std::map<long, int>& quantiles, int period = 1);

// Arm-level aggregates of the intervention period and the exact
// exposure/engagement/behavior split of the change in toxic shares.
struct DecompositionArm {
    double views = 0, toxic_views = 0, shares = 0, toxic_shares = 0;
    double prop_toxic_views = kMissing;   // v
    double prop_toxic_shares = kMissing;  // s
    double cond_share_rate = kMissing;    // toxic shares / toxic views
};

struct EmpiricalDecomposition {
    DecompositionArm control, treated;
    double dlog_exposure = kMissing;      // log change in toxic view share
    double dlog_engagement = kMissing;    // log change in total shares
    double dlog_behavior = kMissing;      // log change in s / v
    double dlog_toxic_shares = kMissing;
    double responsiveness = kMissing;     // pct change in toxic shares over pct change in toxic views
    double identity_residual = kMissing;
    Warnings warnings;
};

EmpiricalDecomposition empirical_decomposition(const Panel& panel, int period = 1);
// Worked-example entry point from per-arm counts.
EmpiricalDecomposition decompose_counts(double views_c, double toxic_views_c, double shares_c,
                                        double toxic_shares_c, double views_t, double toxic_views_t,
                                        double shares_t, double toxic_shares_t);

struct Responsiveness {
    double ratio = kMissing;
    double se = kMissing;
    double p_value_vs_one = kMissing;
    bool unstable = false;
    Warnings warnings;
};

// Ratio of the arm-mean percent change in toxic shares to the percent change
// in toxic views, delta-method standard error, test of ratio = 1.
Responsiveness responsiveness(const Panel& panel, int period = 1);

// Cross-user slope of log s_t on log v_t; equals 1 in steady state where the
// share proportion tracks the view proportion one-for-one.
OlsFit sharing_elasticity(const Panel& panel, int period = 0);

struct AttritionRule {
    long min_views = 0;  // exit when intervention-period views fall below this
};

Panel simulate_attrition(const Panel& panel, const AttritionRule& rule);

struct AttritionRates {
    double treated = 0.0;
    double control = 0.0;
};

AttritionRates attrition_rates(const Panel& panel, int period = 1);

struct LeeBounds {
    double lower = kMissing;
    double upper = kMissing;
    double point = kMissing;  // difference in stayer means
    double trim = 0.0;        // trimming share applied to the less-attrited arm
    Warnings warnings;
};

LeeBounds lee_bounds(const Panel& censored, const OutcomeFn& outcome, int period = 1);

// Joint F-test of treatment assignment on covariate columns.
FTest balance_check(const Matrix& covariates, const std::vector<bool>& treated);
// Covariates built from baseline behavior (views, shares, v_t) plus taste.
FTest balance_check(const std::vector<UserState>& population, const Panel& panel);

// Panel CSV, fixed column order:
// user_id,arm,period,views,shares,toxic_views,toxic_shares,v_t,s_t,v_half1,v_half2,exited
void write_panel_csv(const std::string& path, const Panel& panel);
Panel read_panel_csv(const std::string& path);

}  // namespace feedsim
