#include "feedsim/gumbel.hpp"

#include <cmath>
#include <stdexcept>

namespace feedsim {

namespace {
constexpr double kEulerMascheroni = 0.5772156649015328606;
}

double Gumbel::pdf(double x) const {
    const double z = (x - loc) / scale;
    return std::exp(-(z + std::exp(-z))) / scale;
}

double Gumbel::cdf(double x) const {
    const double z = (x - loc) / scale;
    return std::exp(-std::exp(-z));
}

double Gumbel::quantile(double p) const {
    if (p <= 0.0 || p >= 1.0) throw std::domain_error("Gumbel::quantile: p in (0,1) required");
    return loc - scale * std::log(-std::log(p));
}

double Gumbel::mean() const { return loc + scale * kEulerMascheroni; }

double Gumbel::variance() const { return M_PI * M_PI * scale * scale / 6.0; }

Gumbel Gumbel::fit_moments(double mean, double variance) {
    if (variance <= 0.0) throw std::domain_error("Gumbel::fit_moments: variance must be positive");
    Gumbel g;
    g.scale = std::sqrt(6.0 * variance) / M_PI;
    g.loc = mean - g.scale * kEulerMascheroni;
    return g;
}

double TruncatedGumbel::mass() const { return base.cdf(hi) - base.cdf(lo); }

double TruncatedGumbel::pdf(double x) const {
    if (x <= lo || x >= hi) return 0.0;
    return base.pdf(x) / mass();
}

double TruncatedGumbel::median() const {
    return base.quantile(base.cdf(lo) + 0.5 * mass());
}

}  // namespace feedsim
