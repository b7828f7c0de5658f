#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "feedsim/recommender.hpp"
#include "feedsim/regression.hpp"

using namespace feedsim;

namespace {

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k);
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n - 1.0) / 2.0;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - mean) * (rb[i] - mean);
        da += (ra[i] - mean) * (ra[i] - mean);
        db += (rb[i] - mean) * (rb[i] - mean);
    }
    return num / std::sqrt(da * db);
}

// Desk-scale algorithm environment: engagement matrix, factorization, per-user
// control assignment, plus treated counterparts built two ways.  Embedding
// values come from daily epsilon-ball draws; assignment probabilities come
// from per-post draws out of the control assignment pool, since every slot of
// a randomized feed is an independent corpus pick.
struct SimulatedAlgo {
    Factorization factor;
    std::vector<Vector> control_embs;
    std::vector<double> control_q, treated_q;    // toxic assignment mass
    std::vector<double> control_e1, treated_e1;  // first embedding dimension
    std::vector<double> control_pop, treated_pop;
    std::vector<double> treated_q_ball;          // induced by the ball embeddings
    std::vector<bool> toxic_post;
};

SimulatedAlgo build_algo(int n_users, int n_posts, int n_days, std::uint64_t seed) {
    Rng rng(seed);
    const EngagementMatrix m = simulate_engagement_matrix(n_users, n_posts, n_days, 2, rng);
    SimulatedAlgo algo;
    algo.factor = factorize(m, 2);

    // posts loading high on the first latent dimension play the toxic genre
    std::vector<double> load(n_posts);
    for (int j = 0; j < n_posts; ++j) load[j] = algo.factor.post_factors(j, 0);
    std::vector<double> sorted = load;
    std::nth_element(sorted.begin(), sorted.begin() + n_posts / 2, sorted.end());
    const double cut = sorted[n_posts / 2];
    algo.toxic_post.resize(n_posts);
    for (int j = 0; j < n_posts; ++j) algo.toxic_post[j] = load[j] > cut;

    std::vector<double> popularity(n_posts, 0.0);
    for (int j = 0; j < n_posts; ++j) popularity[j] = m.entries.col(j).sum();

    const auto q_of = [&](const Vector& emb, double* pop_out) {
        const Vector probs = assignment_probabilities(emb, algo.factor);
        double q = 0.0, pop = 0.0;
        for (int j = 0; j < n_posts; ++j) {
            if (algo.toxic_post[j]) q += probs(j);
            pop += probs(j) * popularity[j];
        }
        if (pop_out) *pop_out = pop;
        return q;
    };

    for (int i = 0; i < n_users; ++i)
        algo.control_embs.push_back(algo.factor.user_factors.row(i).transpose());
    for (int i = 0; i < n_users; ++i) {
        double pop = 0.0;
        algo.control_q.push_back(q_of(algo.control_embs[i], &pop));
        algo.control_pop.push_back(pop);
        algo.control_e1.push_back(algo.control_embs[i](0));
    }

    const int slots_per_day = 8;
    for (int i = 0; i < n_users; ++i) {
        // daily ball draw for the embedding view of the treatment
        Vector avg_emb = Vector::Zero(2);
        double q_ball = 0.0;
        for (int d = 0; d < n_days; ++d) {
            const Vector emb = sample_treatment_embedding(algo.control_embs, rng);
            avg_emb += emb;
            q_ball += q_of(emb, nullptr);
        }
        algo.treated_e1.push_back(avg_emb(0) / n_days);
        algo.treated_q_ball.push_back(q_ball / n_days);

        // per-post corpus picks for the assignment-probability view
        double q_sum = 0.0, pop_sum = 0.0;
        for (int d = 0; d < n_days * slots_per_day; ++d) {
            const std::size_t pick = rng.pick(algo.control_q.size());
            q_sum += algo.control_q[pick];
            pop_sum += algo.control_pop[pick];
        }
        algo.treated_q.push_back(q_sum / (n_days * slots_per_day));
        algo.treated_pop.push_back(pop_sum / (n_days * slots_per_day));
    }
    return algo;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (const double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("three-user two-movie factorization is exact") {
    EngagementMatrix m;
    m.entries.resize(3, 2);
    m.entries << 1, 0, 0, 2, 3, 0;
    const Factorization f = factorize(m, 2);

    const double inv_sqrt10 = 1.0 / std::sqrt(10.0);
    CHECK(f.singular_values(0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
    CHECK(f.singular_values(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::fabs(f.user_factors(0, 0) - inv_sqrt10) < 1e-10);
    CHECK(std::fabs(f.user_factors(1, 0) - 0.0) < 1e-10);
    CHECK(std::fabs(f.user_factors(2, 0) - 3.0 * inv_sqrt10) < 1e-10);
    CHECK(std::fabs(f.user_factors(0, 1) - 0.0) < 1e-10);
    CHECK(std::fabs(f.user_factors(1, 1) - 1.0) < 1e-10);
    CHECK(std::fabs(f.user_factors(2, 1) - 0.0) < 1e-10);
    // V^T is the identity
    CHECK(std::fabs(f.post_factors(0, 0) - 1.0) < 1e-10);
    CHECK(std::fabs(f.post_factors(1, 0) - 0.0) < 1e-10);
    CHECK(std::fabs(f.post_factors(0, 1) - 0.0) < 1e-10);
    CHECK(std::fabs(f.post_factors(1, 1) - 1.0) < 1e-10);
}

TEST_CASE("identity factorizes to unit singular values") {
    EngagementMatrix m;
    m.entries = Matrix::Identity(4, 4);
    const Factorization f = factorize(m, 4);
    for (int i = 0; i < 4; ++i) CHECK(f.singular_values(i) == doctest::Approx(1.0));
    CHECK((reconstruct(f) - m.entries).norm() < 1e-12);
}

TEST_CASE("full-rank reconstruction") {
    Rng rng(31);
    EngagementMatrix m;
    m.entries.resize(6, 4);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) m.entries(i, j) = rng.normal();
    const Factorization f = factorize(m, 4);
    CHECK((reconstruct(f) - m.entries).norm() < 1e-8);
    for (int j = 0; j < 4; ++j) {
        CHECK(f.user_factors.col(j).norm() == doctest::Approx(1.0).epsilon(1e-8));
        if (j > 0) CHECK(f.singular_values(j) <= f.singular_values(j - 1));
    }
    CHECK((f.user_factors.transpose() * f.user_factors - Matrix::Identity(4, 4)).norm() < 1e-8);
    CHECK((f.post_factors.transpose() * f.post_factors - Matrix::Identity(4, 4)).norm() < 1e-8);

    CHECK_THROWS(factorize(m, 7));
}

TEST_CASE("assignment probabilities") {
    EngagementMatrix m;
    m.entries.resize(3, 2);
    m.entries << 1, 0, 0, 2, 3, 0;
    const Factorization f = factorize(m, 2);

    SUBCASE("first user prefers the first post") {
        const Vector probs = assignment_probabilities(f.user_factors.row(0).transpose(), f);
        CHECK(probs(0) > probs(1));
        CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(probs.minCoeff() >= 0.0);
    }

    SUBCASE("all-equal scores give the uniform vector") {
        Factorization sym;
        sym.user_factors = Matrix::Identity(2, 2);
        sym.singular_values = Vector::Ones(2);
        sym.post_factors = Matrix::Ones(3, 2) / std::sqrt(2.0);
        const Vector probs = assignment_probabilities(Vector::Ones(2), sym);
        for (int j = 0; j < 3; ++j) CHECK(probs(j) == doctest::Approx(1.0 / 3.0));
    }

    SUBCASE("hand-enumerated three-user instance preserves the taste ranking") {
        Factorization unit;
        unit.user_factors = Matrix::Identity(3, 3);
        unit.singular_values = Vector::Ones(3);
        unit.post_factors = Matrix::Identity(3, 3);  // post j loads on dimension j only
        Vector a(3), b(3), c(3);
        a << 3, 2, 1;
        b << 2, 2, 2;
        c << 1, 2, 3;
        // post 0 is the toxic one; min-shift then normalize by hand:
        // a: (3,2,1) -> (2,1,0)/3, b: uniform, c: (1,2,3) -> (0,1,2)/3
        const double qa = assignment_probabilities(a, unit)(0);
        const double qb = assignment_probabilities(b, unit)(0);
        const double qc = assignment_probabilities(c, unit)(0);
        CHECK(qa == doctest::Approx(2.0 / 3.0));
        CHECK(qb == doctest::Approx(1.0 / 3.0));
        CHECK(qc == doctest::Approx(0.0));
        CHECK(qa > qb);
        CHECK(qb > qc);
    }

    CHECK_THROWS(assignment_probabilities(Vector::Ones(3), f));
}

TEST_CASE("epsilon ball sampling") {
    SUBCASE("zero-variance control set returns the centroid") {
        Rng rng(5);
        Vector v(2);
        v << 0.4, -0.2;
        const std::vector<Vector> embs(4, v);
        const Vector draw = sample_treatment_embedding(embs, rng);
        CHECK((draw - v).norm() == 0.0);
    }

    SUBCASE("ball geometry: radius is twice the summed variances") {
        Vector e1(2), e2(2);
        e1 << 1.0, 0.0;
        e2 << -1.0, 0.0;
        const EpsilonBall ball = control_ball({e1, e2});
        CHECK(ball.centroid(0) == doctest::Approx(0.0));
        CHECK(ball.radius == doctest::Approx(2.0));  // var dim1 = 1, dim2 = 0
    }

    SUBCASE("sample mean near centroid and radial law uniform") {
        Rng rng(17);
        std::vector<Vector> embs;
        Rng gen(99);
        for (int i = 0; i < 200; ++i) {
            Vector e(2);
            e << 0.3 + 0.35 * gen.normal(), -0.1 + 0.35 * gen.normal();
            embs.push_back(e);
        }
        const EpsilonBall ball = control_ball(embs);
        const int n = 10000;
        std::vector<double> radii;
        Vector mean = Vector::Zero(2);
        double var0 = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vector d = sample_treatment_embedding(embs, rng);
            mean += d;
            radii.push_back((d - ball.centroid).norm());
            var0 += (d(0) - ball.centroid(0)) * (d(0) - ball.centroid(0));
        }
        mean /= n;
        var0 /= n;
        for (int dim = 0; dim < 2; ++dim) {
            const double mc_se = ball.radius / std::sqrt(static_cast<double>(n));
            CHECK(std::fabs(mean(dim) - ball.centroid(dim)) < 3.0 * mc_se);
        }
        double control_var0 = 0.0;
        for (const auto& e : embs)
            control_var0 += (e(0) - ball.centroid(0)) * (e(0) - ball.centroid(0));
        control_var0 /= embs.size();
        CHECK(var0 < control_var0);
        // radial CDF of a uniform ball in 2d: F(r) = (r/R)^2
        std::sort(radii.begin(), radii.end());
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double empirical = (i + 1.0) / n;
            const double model = std::pow(radii[i] / ball.radius, 2.0);
            worst = std::max(worst, std::fabs(empirical - model));
        }
        CHECK(worst < 0.02);
        CHECK(radii.back() <= ball.radius + 1e-12);
    }
}

TEST_CASE("synthetic engagement matrix") {
    SUBCASE("seeded determinism") {
        Rng r1(123), r2(123);
        const EngagementMatrix a = simulate_engagement_matrix(40, 12, 10, 2, r1);
        const EngagementMatrix b = simulate_engagement_matrix(40, 12, 10, 2, r2);
        CHECK(a.entries == b.entries);
    }

    SUBCASE("all-ones matrix round-trips") {
        EngagementMatrix m;
        m.entries = Matrix::Ones(2, 2);
        const Factorization f = factorize(m, 2);
        CHECK((reconstruct(f) - m.entries).norm() < 1e-12);
    }

    SUBCASE("csv round trip") {
        Rng rng(7);
        const EngagementMatrix m = simulate_engagement_matrix(15, 6, 5, 2, rng);
        write_matrix_csv("engagement_roundtrip.csv", m);
        const EngagementMatrix back = read_matrix_csv("engagement_roundtrip.csv");
        CHECK(back.entries == m.entries);
        std::remove("engagement_roundtrip.csv");
    }
}

TEST_CASE("treated assignment distribution properties") {
    const SimulatedAlgo algo = build_algo(1000, 50, 30, 2026);

    SUBCASE("embedding distribution centered on the control mean, tighter spread") {
        const double mc_se = std::sqrt(var_of(algo.treated_e1) / algo.treated_e1.size() +
                                       var_of(algo.control_e1) / algo.control_e1.size());
        CHECK(std::fabs(mean_of(algo.treated_e1) - mean_of(algo.control_e1)) < 3.0 * mc_se);
        CHECK(var_of(algo.treated_e1) < var_of(algo.control_e1));
    }

    SUBCASE("toxic assignment mass centered on the control mean, tighter spread") {
        const double mc_se = std::sqrt(var_of(algo.treated_q) / algo.treated_q.size() +
                                       var_of(algo.control_q) / algo.control_q.size());
        CHECK(std::fabs(mean_of(algo.treated_q) - mean_of(algo.control_q)) < 3.0 * mc_se);
        CHECK(var_of(algo.treated_q) < var_of(algo.control_q));
    }

    SUBCASE("treatment shift grows with baseline extremity") {
        const double q_mean = mean_of(algo.control_q);
        std::vector<double> shift, extremity;
        for (std::size_t i = 0; i < algo.control_q.size(); ++i) {
            shift.push_back(std::fabs(algo.treated_q[i] - algo.control_q[i]));
            extremity.push_back(std::fabs(algo.control_q[i] - q_mean));
        }
        CHECK(spearman(shift, extremity) > 0.9);
    }

    SUBCASE("treated exposure is not tilted toward popular posts") {
        // randomized delivery resamples the control pool, so popularity-weighted
        // exposure can only fall or stay flat within noise
        const double se = std::sqrt(var_of(algo.treated_pop) / algo.treated_pop.size() +
                                    var_of(algo.control_pop) / algo.control_pop.size());
        CHECK(mean_of(algo.treated_pop) <= mean_of(algo.control_pop) + 3.0 * se);
    }

    SUBCASE("embedding marginals look Gaussian") {
        for (const auto* dim : {&algo.control_e1}) {
            const double mu = mean_of(*dim);
            double m2 = 0, m3 = 0, m4 = 0;
            for (const double x : *dim) {
                const double d = x - mu;
                m2 += d * d;
                m3 += d * d * d;
                m4 += d * d * d * d;
            }
            m2 /= dim->size();
            m3 /= dim->size();
            m4 /= dim->size();
            CHECK(std::fabs(m3 / std::pow(m2, 1.5)) < 0.5);          // near-zero skew
            CHECK(std::fabs(m4 / (m2 * m2) - 3.0) < 1.5);            // near-normal tails
        }
    }

    SUBCASE("control assignment tracks taste, treated assignment is flat") {
        Vector e1 = Eigen::Map<const Vector>(algo.control_e1.data(), 1000);
        Vector qc = Eigen::Map<const Vector>(algo.control_q.data(), 1000);
        Vector qt = Eigen::Map<const Vector>(algo.treated_q_ball.data(), 1000);
        const OlsFit control_fit = simple_ols(qc, e1);
        const OlsFit treated_fit = simple_ols(qt, e1);
        CHECK(std::fabs(control_fit.coef(1)) > 10.0 * std::fabs(treated_fit.coef(1)));
    }
}
