#pragma once

namespace feedsim {

// Type-1 extreme value (Gumbel) distribution.
struct Gumbel {
    double loc = 0.0;
    double scale = 1.0;

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    double mean() const;
    double variance() const;

    // location/scale matching a sample mean and variance
    static Gumbel fit_moments(double mean, double variance);
};

// Gumbel restricted to (lo, hi) and renormalized.
struct TruncatedGumbel {
    Gumbel base;
    double lo = 0.0;
    double hi = 1.0;

    double mass() const;           // base cdf(hi) - cdf(lo)
    double pdf(double x) const;    // renormalized; 0 outside (lo, hi)
    double median() const;
};

}  // namespace feedsim
