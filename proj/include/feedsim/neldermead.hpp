#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "feedsim/common.hpp"

namespace feedsim {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;  // outside contraction
    double shrink = 0.5;
    double tolerance = 1e-8;   // applies to both simplex spread and objective spread
    int max_iterations = 5000;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Downhill simplex minimizer.  The best vertex value never increases across
// iterations; non-convergence returns the best point with converged = false.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                                    const Vector& x0, const NelderMeadOptions& opts = {}) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");
    if (!x0.allFinite()) throw std::invalid_argument("nelder_mead: non-finite start point");

    std::vector<Vector> vertex(n + 1, x0);
    for (int i = 0; i < n; ++i) vertex[i + 1](i) += opts.initial_step;
    std::vector<double> value(n + 1);
    for (int i = 0; i <= n; ++i) value[i] = objective(vertex[i]);

    NelderMeadResult result;
    auto order = [&] {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
        std::vector<Vector> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (int i = 0; i <= n; ++i) {
            v2[i] = vertex[idx[i]];
            f2[i] = value[idx[i]];
        }
        vertex.swap(v2);
        value.swap(f2);
    };

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        order();
        double spread = 0.0;
        for (int i = 1; i <= n; ++i) spread = std::max(spread, (vertex[i] - vertex[0]).norm());
        const double fspread = std::fabs(value[n] - value[0]);
        if (spread < opts.tolerance && fspread < opts.tolerance) {
            result.converged = true;
            break;
        }

        Vector centroid = Vector::Zero(n);
        for (int i = 0; i < n; ++i) centroid += vertex[i];
        centroid /= n;

        const Vector reflected = centroid + opts.reflection * (centroid - vertex[n]);
        const double f_reflected = objective(reflected);

        if (f_reflected < value[0]) {
            const Vector expanded = centroid + opts.expansion * (reflected - centroid);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                vertex[n] = expanded;
                value[n] = f_expanded;
            } else {
                vertex[n] = reflected;
                value[n] = f_reflected;
            }
            continue;
        }
        if (f_reflected < value[n - 1]) {
            vertex[n] = reflected;
            value[n] = f_reflected;
            continue;
        }
        const Vector contracted = f_reflected < value[n]
                                      ? centroid + opts.contraction * (reflected - centroid)
                                      : centroid + opts.contraction * (vertex[n] - centroid);
        const double f_contracted = objective(contracted);
        if (f_contracted < std::min(f_reflected, value[n])) {
            vertex[n] = contracted;
            value[n] = f_contracted;
            continue;
        }
        for (int i = 1; i <= n; ++i) {
            vertex[i] = vertex[0] + opts.shrink * (vertex[i] - vertex[0]);
            value[i] = objective(vertex[i]);
        }
    }
    order();
    result.x = vertex[0];
    result.value = value[0];
    result.iterations = it;
    return result;
}

}  // namespace feedsim
