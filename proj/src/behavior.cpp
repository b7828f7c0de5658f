#include "feedsim/behavior.hpp"

#include <cmath>
#include <stdexcept>

namespace feedsim {

namespace {

void check_unit_open(double x, const char* what) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error(std::string(what) + " must lie strictly inside (0, 1)");
}

}  // namespace

UtilityParams::UtilityParams(double alpha_, double beta_, double eta_, double delta_,
                             double theta_, double mu_)
    : alpha(alpha_), beta(beta_), eta(eta_), delta(delta_), theta(theta_), mu(mu_) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(eta > 0.0) || !(delta > 0.0))
        throw std::domain_error("UtilityParams: alpha, beta, eta, delta must be positive");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::domain_error("UtilityParams: theta must lie in [0, 1]");
    if (!(mu >= 0.0)) throw std::domain_error("UtilityParams: mu must be non-negative");
    // Interior solution at the platform's own equilibrium point q = p:
    // the mismatch term vanishes, so N and S reduce to their level terms.
    const double n_eq = beta * (alpha + eta) / (2.0 * alpha * eta);
    const double s_eq = n_eq * alpha / (alpha + eta);
    if (!(n_eq > 0.0) || !(s_eq >= 0.0) || !(s_eq <= n_eq))
        throw std::domain_error("UtilityParams: no interior solution at q = p");
}

UserTaste::UserTaste(double p_, std::optional<long> category_)
    : p(p_), category(category_) {
    check_unit_open(p, "taste p");
}

Exposure::Exposure(double q_) : q(q_) { check_unit_open(q, "exposure q"); }

namespace detail {

double mismatch_penalty(double theta, double q, double p) {
    const double l = std::log(q / p);
    return theta * (1.0 - theta) * l * l;
}

double mismatch_penalty_quadratic(double theta, double q, double p) {
    const double d = q - p;
    return theta * (1.0 - theta) * d * d;
}

}  // namespace detail

double optimal_share_fraction(Exposure q, UserTaste p, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::domain_error("optimal_share_fraction: theta must lie in [0, 1]");
    return std::pow(q.q, theta) * std::pow(p.p, 1.0 - theta);
}

double optimal_views(const UtilityParams& params, Exposure q, UserTaste p) {
    const double pen = detail::mismatch_penalty(params.theta, q.q, p.p);
    return (params.beta * (params.alpha + params.eta) - params.delta * params.alpha * pen) /
           (2.0 * params.alpha * params.eta);
}

double optimal_shares(const UtilityParams& params, double n_views, Exposure q, UserTaste p) {
    if (!(n_views > 0.0)) throw std::domain_error("optimal_shares: n_views must be positive");
    const double pen = detail::mismatch_penalty(params.theta, q.q, p.p);
    return (2.0 * n_views * params.alpha - params.delta * pen) /
           (2.0 * (params.eta + params.alpha));
}

Exposure equilibrium_assignment(UserTaste p) { return Exposure(p.p); }

double utility(const UtilityParams& params, double share_frac, double shares,
               double views, Exposure q, UserTaste p) {
    if (!(share_frac > 0.0 && share_frac < 1.0))
        throw std::domain_error("utility: share fraction must lie strictly inside (0, 1)");
    if (shares > views) throw std::domain_error("utility: shares cannot exceed views");
    const double dp = std::log(share_frac / p.p);
    const double dq = std::log(share_frac / q.q);
    return params.beta * views - params.alpha * (views - shares) * (views - shares) -
           params.eta * shares * shares -
           params.delta * shares *
               ((1.0 - params.theta) * dp * dp + params.theta * dq * dq);
}

double utility_quadratic(const UtilityParams& params, double share_frac, double shares,
                         double views, Exposure q, UserTaste p) {
    if (shares > views) throw std::domain_error("utility: shares cannot exceed views");
    const double dp = share_frac - p.p;
    const double dq = share_frac - q.q;
    return params.beta * views - params.alpha * (views - shares) * (views - shares) -
           params.eta * shares * shares -
           params.delta * shares *
               ((1.0 - params.theta) * dp * dp + params.theta * dq * dq);
}

namespace {

BehaviorOutcome compose_outcome(const UtilityParams& params, double share_frac,
                                double q, double pen) {
    BehaviorOutcome out;
    out.share_frac_toxic = share_frac;
    const double n = (params.beta * (params.alpha + params.eta) - params.delta * params.alpha * pen) /
                     (2.0 * params.alpha * params.eta);
    if (n <= 0.0) {
        out.exited = true;
        out.corner_shares = true;
        return out;  // leaver: all counts zero
    }
    out.n_views = n;
    out.toxic_views = q * n;
    const double s = (2.0 * n * params.alpha - params.delta * pen) /
                     (2.0 * (params.eta + params.alpha));
    if (s <= 0.0) {
        out.corner_shares = true;  // keeps viewing, stops sharing
        return out;
    }
    out.n_shares = s;
    out.toxic_shares = share_frac * s;
    return out;
}

}  // namespace

BehaviorOutcome solve_user(const UtilityParams& params, Exposure q, UserTaste p) {
    const double s_frac = optimal_share_fraction(q, p, params.theta);
    const double pen = detail::mismatch_penalty(params.theta, q.q, p.p);
    return compose_outcome(params, s_frac, q.q, pen);
}

BehaviorOutcome solve_user_quadratic(const UtilityParams& params, Exposure q, UserTaste p) {
    const double s_frac = params.theta * q.q + (1.0 - params.theta) * p.p;
    const double pen = detail::mismatch_penalty_quadratic(params.theta, q.q, p.p);
    return compose_outcome(params, s_frac, q.q, pen);
}

}  // namespace feedsim
