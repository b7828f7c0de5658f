#pragma once

#include <functional>
#include <string>
#include <vector>

#include "feedsim/common.hpp"
#include "feedsim/simulator.hpp"

namespace feedsim {

// A feed-diversification counterfactual: every targeted user's intervention
// exposure becomes a * q_bar + (1 - a) * q_user.
struct PolicySpec {
    enum class Target { All, AboveQbar, Quantiles };

    double mix_a = 1.0;
    Target target = Target::All;
    std::vector<int> quantile_set;  // baseline-exposure quintiles, used with Target::Quantiles
    std::string description;

    void validate() const;
};

struct RegimeSpec {
    enum class Kind { Mechanical, Estimated, Malleable };

    Kind kind = Kind::Estimated;
    double theta_value = 0.16;

    double theta() const {
        if (kind == Kind::Mechanical) return 0.0;
        if (kind == Kind::Malleable) return 1.0;
        return theta_value;
    }
};

double mixed_assignment(double a, double q_bar, double q_user);

// Two-period panel where targeted users face the mixed assignment at the
// intervention period; arm flags mark targeting.  q_bar is the population
// mean equilibrium assignment, recomputed per run.
Panel simulate_policy(const std::vector<UserState>& population, const PolicySpec& policy,
                      const RegimeSpec& regime, const SimConfig& config, unsigned workers = 1);

// Exact log-additive split of the change in group toxic shares into view,
// share-rate, and share-composition components, on matched users.
struct DecompositionResult {
    double pct_change_views = kMissing;        // N
    double pct_change_share_rate = kMissing;   // S / N
    double pct_change_s_t = kMissing;          // s^t
    double pct_change_toxic_shares = kMissing;
    double dlog_views = kMissing;
    double dlog_share_rate = kMissing;
    double dlog_s_t = kMissing;
    double dlog_toxic_shares = kMissing;
    double engagement_share = kMissing;  // (dlog N + dlog S/N) / dlog toxic shares
    double identity_residual = kMissing;
    Warnings warnings;
};

DecompositionResult model_decomposition(const Panel& policy_panel, const Panel& baseline_panel,
                                        const std::function<bool(long)>& in_group,
                                        int period = 1);

struct FrontierRow {
    double a = 0.0;
    double total_views = 0.0;
    double total_shares = 0.0;
    double toxic_shares = 0.0;
    double pct_views = kMissing;
    double pct_share_rate = kMissing;
    double pct_s_t = kMissing;
};

// Policy sweep over mixing weights for the p > q_bar target group; percent
// columns decompose the change against the a = 0 baseline.  Grid points share
// user substreams, so rows are coupled by common random numbers.
std::vector<FrontierRow> policy_frontier(const std::vector<UserState>& population,
                                         const std::vector<double>& a_grid,
                                         const RegimeSpec& regime, const SimConfig& config,
                                         unsigned workers = 1);

// frontier CSV: a, total_views, total_shares, toxic_shares, pct_N, pct_share_rate, pct_s_t
void write_frontier_csv(const std::string& path, const std::vector<FrontierRow>& rows);

}  // namespace feedsim
