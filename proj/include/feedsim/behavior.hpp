#pragma once

#include <optional>

namespace feedsim {

// Behavioral constants of the user objective.  All closed forms below are
// driven by these six numbers.
struct UtilityParams {
    double alpha;  // disutility weight on unshareable views
    double beta;   // consumption weight on views
    double eta;    // convex sharing cost
    double delta;  // conformity weight
    double theta;  // influence weight in [0, 1]
    double mu;     // preference-shock scale, >= 0

    UtilityParams(double alpha, double beta, double eta, double delta,
                  double theta, double mu = 0.0);
};

struct UserTaste {
    double p;  // taste for toxic content, strictly inside (0, 1)
    std::optional<long> category;

    explicit UserTaste(double p, std::optional<long> category = std::nullopt);
};

struct Exposure {
    double q;  // assigned toxic proportion, strictly inside (0, 1)

    explicit Exposure(double q);
};

// Continuous solution of the user problem.  Non-positive view or share
// solutions are truncated at zero and flagged: `exited` when the user leaves
// entirely (views hit zero), `corner_shares` when only sharing shuts down.
struct BehaviorOutcome {
    double n_views = 0.0;          // N
    double n_shares = 0.0;         // S
    double share_frac_toxic = 0.0; // s^t
    double toxic_shares = 0.0;     // S^t = s^t * S
    double toxic_views = 0.0;      // N^t = q * N
    bool exited = false;
    bool corner_shares = false;
};

// s* = q^theta * p^(1-theta); lies between min(p,q) and max(p,q).
double optimal_share_fraction(Exposure q, UserTaste p, double theta);

// N* = [beta(alpha+eta) - delta*alpha*theta(1-theta)*log^2(q/p)] / (2*alpha*eta).
// A non-positive value is returned as-is; it marks the exit region and the
// caller decides truncation.
double optimal_views(const UtilityParams& params, Exposure q, UserTaste p);

// S* = [2*N*alpha - delta*theta(1-theta)*log^2(q/p)] / (2*(eta+alpha)),
// given the view count N.  Non-positive values returned as-is.
double optimal_shares(const UtilityParams& params, double n_views, Exposure q, UserTaste p);

// Engagement-maximizing platform response: q = p.
Exposure equilibrium_assignment(UserTaste p);

// Full objective
//   beta*N - alpha*(N-S)^2 - eta*S^2
//     - delta*S*[(1-theta)*log^2(s/p) + theta*log^2(s/q)].
// Exists as the oracle every closed form is checked against.
double utility(const UtilityParams& params, double share_frac, double shares,
               double views, Exposure q, UserTaste p);

// Quadratic-conformity variant of the objective, penalties (s-p)^2, (s-q)^2.
double utility_quadratic(const UtilityParams& params, double share_frac, double shares,
                         double views, Exposure q, UserTaste p);

BehaviorOutcome solve_user(const UtilityParams& params, Exposure q, UserTaste p);

// Variant under the quadratic conformity penalty; optimal s = theta*q + (1-theta)*p.
BehaviorOutcome solve_user_quadratic(const UtilityParams& params, Exposure q, UserTaste p);

namespace detail {
// conformity penalty at the optimal share fraction, per unit share:
// theta*(1-theta)*log^2(q/p)
double mismatch_penalty(double theta, double q, double p);
double mismatch_penalty_quadratic(double theta, double q, double p);
}  // namespace detail

}  // namespace feedsim
