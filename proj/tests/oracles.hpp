#pragma once

// Independent numeric oracles for the closed forms: golden-section and grid
// maximizers over the raw objective, never touching the solver under test.

#include <cmath>
#include <functional>
#include <vector>

#include "feedsim/behavior.hpp"

namespace oracles {

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-12) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct UserOptimum {
    double share_frac;
    double shares;
    double views;
};

// 3-d maximizer of the utility objective: 1-d golden section on the share
// fraction (it enters only through the conformity penalty), then alternating
// golden-section sweeps on (views, shares) from a coarse grid start.
inline UserOptimum maximize_utility(const feedsim::UtilityParams& params, feedsim::Exposure q,
                                    feedsim::UserTaste p, double n_max = 50.0) {
    using feedsim::utility;
    UserOptimum opt{};
    opt.share_frac = golden_max(
        [&](double s) {
            const double dp = std::log(s / p.p);
            const double dq = std::log(s / q.q);
            return -((1.0 - params.theta) * dp * dp + params.theta * dq * dq);
        },
        1e-9, 1.0 - 1e-9);

    const double s_frac = opt.share_frac;
    const auto value = [&](double views, double shares) {
        if (shares > views) return -1e300;
        return utility(params, s_frac, shares, views, q, p);
    };

    // coarse grid start
    double best_n = 0.0, best_s = 0.0, best_v = -1e300;
    const int steps = 160;
    for (int i = 1; i <= steps; ++i) {
        const double n = n_max * i / steps;
        for (int j = 0; j <= steps; ++j) {
            const double s = n * j / steps;
            const double v = value(n, s);
            if (v > best_v) {
                best_v = v;
                best_n = n;
                best_s = s;
            }
        }
    }
    // alternating refinement
    for (int round = 0; round < 40; ++round) {
        const double s_cur = best_s;
        best_n = golden_max([&](double n) { return value(n, s_cur); }, 1e-9, n_max);
        const double n_cur = best_n;
        best_s = golden_max([&](double s) { return value(n_cur, s); }, 0.0, n_cur);
    }
    opt.views = best_n;
    opt.shares = best_s;
    return opt;
}

// central finite difference
inline double fd(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// cross second derivative d2 f / dx dy
inline double fd_cross(const std::function<double(double, double)>& f, double x, double y,
                       double hx, double hy) {
    return (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) /
           (4.0 * hx * hy);
}

}  // namespace oracles
