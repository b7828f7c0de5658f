#pragma once

#include <functional>
#include <vector>

namespace feedsim {

// Gauss-Legendre rule on [-1, 1]; nodes ascending, weights positive.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n);

    // integral of f over [a, b]
    double integrate(double a, double b, const std::function<double(double)>& f) const;
};

}  // namespace feedsim
