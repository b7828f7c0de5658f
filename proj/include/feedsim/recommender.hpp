#pragma once

#include <string>
#include <vector>

#include "feedsim/common.hpp"
#include "feedsim/rng.hpp"

namespace feedsim {

// users x posts real engagement matrix
struct EngagementMatrix {
    Matrix entries;
};

// R = U * diag(sigma) * V^T with orthonormal U, V columns and non-increasing
// singular values.  Sign convention: the first nonzero entry of each column
// of U is non-negative.
struct Factorization {
    Matrix user_factors;            // users x k
    Vector singular_values;         // k
    Matrix post_factors;            // posts x k
};

struct EpsilonBall {
    Vector centroid;  // mean control embedding
    double radius;    // 2 * sum of per-dimension variances
};

Factorization factorize(const EngagementMatrix& m, int k);

Matrix reconstruct(const Factorization& f);

// Cross-product scores user_emb * diag(sigma) * V^T, shifted by the minimum
// and normalized to a probability vector over posts.  All-equal scores map
// to the uniform vector.
Vector assignment_probabilities(const Vector& user_emb, const Factorization& f);

EpsilonBall control_ball(const std::vector<Vector>& control_embs);

// Uniform draw from the ball around the control mean; a zero-variance
// control set returns the centroid exactly.
Vector sample_treatment_embedding(const std::vector<Vector>& control_embs, Rng& rng);

// Synthetic engagement counts: latent user tastes and post attributes in k
// dimensions, Poisson counts at a logistic rate over n_days sessions.
EngagementMatrix simulate_engagement_matrix(int n_users, int n_posts, int n_days,
                                            int k, Rng& rng);

// CSV with header post_0..post_{n-1}, one row per user.
void write_matrix_csv(const std::string& path, const EngagementMatrix& m);
EngagementMatrix read_matrix_csv(const std::string& path);

}  // namespace feedsim
