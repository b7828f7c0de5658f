#include "feedsim/recommender.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "feedsim/csv.hpp"

namespace feedsim {

Factorization factorize(const EngagementMatrix& m, int k) {
    const auto rows = m.entries.rows();
    const auto cols = m.entries.cols();
    if (rows < 1 || cols < 1) throw std::invalid_argument("factorize: empty matrix");
    if (k < 1 || k > std::min(rows, cols))
        throw std::invalid_argument("factorize: rank k out of range");
    if (!m.entries.allFinite()) throw std::invalid_argument("factorize: non-finite entries");

    Eigen::JacobiSVD<Matrix> svd(m.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Factorization f;
    f.user_factors = svd.matrixU().leftCols(k);
    f.post_factors = svd.matrixV().leftCols(k);
    f.singular_values = svd.singularValues().head(k);

    // first nonzero entry of each left singular vector made non-negative
    for (int j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double u = f.user_factors(i, j);
            if (u != 0.0) {
                if (u < 0.0) {
                    f.user_factors.col(j) = -f.user_factors.col(j);
                    f.post_factors.col(j) = -f.post_factors.col(j);
                }
                break;
            }
        }
    }
    return f;
}

Matrix reconstruct(const Factorization& f) {
    return f.user_factors * f.singular_values.asDiagonal() * f.post_factors.transpose();
}

Vector assignment_probabilities(const Vector& user_emb, const Factorization& f) {
    if (user_emb.size() != f.singular_values.size())
        throw std::invalid_argument("assignment_probabilities: embedding dimension mismatch");
    Vector scores = f.post_factors * (f.singular_values.asDiagonal() * user_emb);
    const double lo = scores.minCoeff();
    scores.array() -= lo;
    const double total = scores.sum();
    if (total <= 0.0)
        return Vector::Constant(scores.size(), 1.0 / static_cast<double>(scores.size()));
    return scores / total;
}

EpsilonBall control_ball(const std::vector<Vector>& control_embs) {
    if (control_embs.size() < 2)
        throw std::invalid_argument("control_ball: need at least 2 control embeddings");
    const auto k = control_embs.front().size();
    Vector mean = Vector::Zero(k);
    for (const auto& e : control_embs) {
        if (e.size() != k) throw std::invalid_argument("control_ball: ragged embeddings");
        mean += e;
    }
    mean /= static_cast<double>(control_embs.size());
    double var_sum = 0.0;
    for (const auto& e : control_embs) var_sum += (e - mean).squaredNorm();
    var_sum /= static_cast<double>(control_embs.size());
    return EpsilonBall{mean, 2.0 * var_sum};
}

Vector sample_treatment_embedding(const std::vector<Vector>& control_embs, Rng& rng) {
    const EpsilonBall ball = control_ball(control_embs);
    const auto k = ball.centroid.size();
    if (ball.radius <= 0.0) return ball.centroid;
    // isotropic direction, radius scaled by u^(1/k) for uniformity in the ball
    Vector dir(k);
    double norm2 = 0.0;
    do {
        for (Eigen::Index d = 0; d < k; ++d) dir(d) = rng.normal();
        norm2 = dir.squaredNorm();
    } while (norm2 == 0.0);
    dir /= std::sqrt(norm2);
    const double r = ball.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(k));
    return ball.centroid + r * dir;
}

namespace {

long poisson_count(double lambda, Rng& rng) {
    const double l = std::exp(-lambda);
    long k = 0;
    double prod = 1.0;
    do {
        ++k;
        prod *= rng.uniform();
    } while (prod > l);
    return k - 1;
}

}  // namespace

EngagementMatrix simulate_engagement_matrix(int n_users, int n_posts, int n_days,
                                            int k, Rng& rng) {
    if (n_users < 1 || n_posts < 1 || n_days < 1 || k < 1)
        throw std::invalid_argument("simulate_engagement_matrix: dimensions must be positive");
    // mild latent tastes keep engagement rates away from the sigmoid tails
    const double latent_scale = 0.6;
    Matrix user_latent(n_users, k);
    Matrix post_latent(n_posts, k);
    for (int i = 0; i < n_users; ++i)
        for (int d = 0; d < k; ++d) user_latent(i, d) = latent_scale * rng.normal();
    for (int j = 0; j < n_posts; ++j)
        for (int d = 0; d < k; ++d) post_latent(j, d) = latent_scale * rng.normal();

    const double base_rate = 2.0;  // expected engagements per day at a neutral match
    EngagementMatrix m;
    m.entries.resize(n_users, n_posts);
    for (int i = 0; i < n_users; ++i) {
        for (int j = 0; j < n_posts; ++j) {
            const double affinity = user_latent.row(i).dot(post_latent.row(j));
            const double rate = n_days * base_rate / (1.0 + std::exp(-affinity));
            m.entries(i, j) = static_cast<double>(poisson_count(rate, rng));
        }
    }
    return m;
}

void write_matrix_csv(const std::string& path, const EngagementMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
        out << (j ? "," : "") << "post_" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
            out << (j ? "," : "") << format_number(m.entries(i, j));
        out << "\n";
    }
}

EngagementMatrix read_matrix_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    const auto cols = table.header.size();
    if (cols == 0) throw std::runtime_error("read_matrix_csv: no columns in " + path);
    for (std::size_t j = 0; j < cols; ++j) {
        if (table.header[j] != "post_" + std::to_string(j))
            throw std::runtime_error("read_matrix_csv: unexpected header in " + path);
    }
    EngagementMatrix m;
    m.entries.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != cols)
            throw std::runtime_error("read_matrix_csv: ragged row in " + path);
        for (std::size_t j = 0; j < cols; ++j)
            m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_number(table.rows[i][j]);
    }
    return m;
}

}  // namespace feedsim
