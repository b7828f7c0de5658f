#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace feedsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Missing observations (undefined proportions, empty cells) are carried as NaN
// and serialized as empty CSV fields.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) { return std::isnan(x); }

struct Warnings {
    std::vector<std::string> messages;
    void add(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
};

}  // namespace feedsim
