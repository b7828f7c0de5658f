#include "doctest.h"

#include <cmath>
#include <vector>

#include "feedsim/estimation.hpp"
#include "feedsim/rng.hpp"

using namespace feedsim;

namespace {

// The linear-in-proportions specification is a local approximation, so the
// estimation panels keep the taste dispersion at the scale seen across real
// baseline-exposure quintiles (sd about 0.015 around the 0.074 mean).
SimConfig panel_config(std::uint64_t seed, double theta, double mu = 0.2,
                       double posts_per_view_unit = 120.0, long n_users = 20000) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_users = n_users;
    cfg.posts_per_view_unit = posts_per_view_unit;
    cfg.params = UtilityParams(1.0, 2.0, 1.0, 8.4, theta, mu);
    cfg.taste.a = 22.0;
    cfg.taste.b = 275.0;
    return cfg;
}

}  // namespace

TEST_CASE("regression identities") {
    Rng rng(4);
    const int n = 400;
    Vector x(n), z(n), y(n);
    for (int i = 0; i < n; ++i) {
        const double latent = rng.normal();
        x(i) = latent + 0.5 * rng.normal();
        z(i) = latent + 0.5 * rng.normal();
        y(i) = 2.0 - 1.4 * latent + rng.normal();
    }

    SUBCASE("ols slope equals the two-pass covariance ratio") {
        const OlsFit fit = simple_ols(y, x);
        double sxy = 0, sxx = 0;
        const double mx = x.mean(), my = y.mean();
        for (int i = 0; i < n; ++i) {
            sxy += (x(i) - mx) * (y(i) - my);
            sxx += (x(i) - mx) * (x(i) - mx);
        }
        CHECK(std::fabs(fit.coef(1) - sxy / sxx) < 1e-10);
        CHECK(std::fabs(fit.coef(0) - (my - sxy / sxx * mx)) < 1e-10);
    }

    SUBCASE("just-identified 2sls equals the covariance ratio") {
        const TslsFit fit = tsls(y, x, z);
        double syz = 0, sxz = 0;
        const double mx = x.mean(), my = y.mean(), mz = z.mean();
        for (int i = 0; i < n; ++i) {
            syz += (z(i) - mz) * (y(i) - my);
            sxz += (z(i) - mz) * (x(i) - mx);
        }
        CHECK(std::fabs(fit.slope - syz / sxz) < 1e-10);
        CHECK(fit.first_stage_f > 10.0);
    }
}

TEST_CASE("theta recovery without measurement error") {
    // large posts-per-unit wipes out the binomial sampling error
    const SimConfig cfg = panel_config(507, 0.16, 0.2, 4000.0, 6000);
    const Panel panel = run_experiment(cfg, 2);

    const ThetaEstimate ols = estimate_theta_ols(panel);
    CHECK(std::fabs(ols.theta_hat - 0.16) < 2.0 * ols.se);
    CHECK(ols.n_obs > 2000);

    SUBCASE("iv and ols agree when there is nothing to correct") {
        const IvThetaEstimate iv = estimate_theta_iv(panel);
        CHECK(std::fabs(iv.est.theta_hat - ols.theta_hat) <
              2.0 * std::hypot(iv.est.se, ols.se));
        CHECK_FALSE(iv.diag.weak_instrument);
    }

    SUBCASE("reliability near one reproduces the ols estimate") {
        const ThetaEstimate rel = estimate_theta_reliability(panel);
        const IvThetaEstimate iv = estimate_theta_iv(panel);
        CHECK(iv.diag.reliability_ratio > 0.9);
        CHECK(std::fabs(rel.theta_hat - ols.theta_hat) < 0.03);
    }
}

TEST_CASE("zero influence estimates to zero") {
    const SimConfig cfg = panel_config(511, 0.0, 0.2, 1000.0, 6000);
    const Panel panel = run_experiment(cfg, 2);
    const ThetaEstimate ols = estimate_theta_ols(panel);
    CHECK(std::fabs(ols.theta_hat) < 3.0 * ols.se);
    CHECK(std::fabs(ols.theta_hat) < 0.02);
}

TEST_CASE("measurement error attenuates ols and iv corrects it") {
    const SimConfig cfg = panel_config(523, 0.16, 0.2, 60.0, 30000);
    const Panel panel = run_experiment(cfg, 2);

    const ThetaEstimate ols = estimate_theta_ols(panel);
    const IvThetaEstimate iv = estimate_theta_iv(panel);

    CHECK(ols.theta_hat < 0.16);                       // attenuation direction
    CHECK(0.16 - ols.theta_hat > 2.0 * ols.se);        // and clearly so
    CHECK(std::fabs(iv.est.theta_hat - 0.16) < 2.5 * iv.est.se);
    CHECK(iv.est.theta_hat > ols.theta_hat);
    CHECK(iv.diag.first_stage_coef > 0.0);
    CHECK(iv.diag.first_stage_f > 10.0);

    SUBCASE("reliability correction moves the slope past ols") {
        const ThetaEstimate rel = estimate_theta_reliability(panel);
        CHECK(std::fabs(rel.theta_hat) > std::fabs(ols.theta_hat));
        CHECK(std::fabs(rel.theta_hat - 0.16) < 3.0 * rel.se);
    }
}

TEST_CASE("split-half sampling errors are uncorrelated by construction") {
    SimConfig cfg = panel_config(531, 0.16, 0.2, 120.0, 8000);
    cfg.taste = TasteDist::degenerate(0.1);  // taste known, so half errors are observable
    const Panel panel = run_experiment(cfg, 2);
    std::vector<double> e1, e2;
    for (const auto& rec : panel) {
        if (rec.period != 0 || is_missing(rec.v_half1) || is_missing(rec.v_half2)) continue;
        e1.push_back(rec.v_half1 - 0.1);
        e2.push_back(rec.v_half2 - 0.1);
    }
    REQUIRE(e1.size() > 1000);
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        m1 += e1[i];
        m2 += e2[i];
    }
    m1 /= e1.size();
    m2 /= e2.size();
    double c12 = 0, v1 = 0, v2 = 0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        c12 += (e1[i] - m1) * (e2[i] - m2);
        v1 += (e1[i] - m1) * (e1[i] - m1);
        v2 += (e2[i] - m2) * (e2[i] - m2);
    }
    const double corr = c12 / std::sqrt(v1 * v2);
    CHECK(std::fabs(corr) < 3.0 / std::sqrt(static_cast<double>(e1.size())));
}

TEST_CASE("attenuation grows monotonically with sampling noise") {
    double last_magnitude = 1.0;
    for (const double ppu : {600.0, 120.0, 40.0}) {
        const SimConfig cfg = panel_config(541, 0.16, 0.2, ppu, 20000);
        const Panel panel = run_experiment(cfg, 2);
        const ThetaEstimate ols = estimate_theta_ols(panel);
        CHECK(std::fabs(ols.theta_hat) < last_magnitude + 0.01);
        last_magnitude = std::fabs(ols.theta_hat);
    }
    CHECK(last_magnitude < 0.12);  // heavy noise clearly attenuates
}

TEST_CASE("steady-state check on control users") {
    SUBCASE("noise-free control sharing is stable across periods") {
        SimConfig cfg = panel_config(547, 0.16, 0.0, 5000.0, 4000);
        cfg.taste = TasteDist::beta_default();  // wide spread, no approximation at stake
        const Panel panel = run_experiment(cfg, 2);
        const SteadyStateCheck ss = steady_state_check(panel);
        CHECK(ss.delta1_ols == doctest::Approx(1.0).epsilon(0.02));
        CHECK(ss.delta1 == doctest::Approx(1.0).epsilon(0.02));
    }

    SUBCASE("sampling error attenuates the raw slope, the corrected one recovers") {
        SimConfig cfg = panel_config(557, 0.16, 0.2, 60.0, 20000);
        cfg.taste = TasteDist::beta_default();
        const Panel panel = run_experiment(cfg, 2);
        const SteadyStateCheck ss = steady_state_check(panel);
        CHECK(ss.delta1_ols < 1.0);
        CHECK(1.0 - ss.delta1_ols > 3.0 * ss.se_ols);
        CHECK(std::fabs(ss.delta1 - 1.0) < 3.0 * ss.se);
        CHECK(ss.p_value_vs_one > 0.01);
    }
}

TEST_CASE("estimator input guards") {
    const SimConfig cfg = panel_config(561, 0.16, 0.2, 120.0, 200);
    Panel panel = run_experiment(cfg);
    Panel tiny;
    int kept = 0;
    for (const auto& rec : panel) {
        if (rec.treated && kept / 2 >= 10) continue;
        if (rec.treated) ++kept;
        tiny.push_back(rec);
    }
    CHECK_THROWS_AS((void)estimate_theta_ols(tiny), std::runtime_error);
    CHECK_THROWS_AS((void)estimate_theta_iv(tiny), std::runtime_error);
}

TEST_CASE("per-group estimates and homogeneity") {
    SUBCASE("identical location-shifted groups give identical estimates") {
        // treated users in two groups whose (v0, halves, change) patterns differ
        // only by a constant shift; slopes are translation invariant
        Panel panel;
        Rng rng(9);
        long uid = 0;
        std::vector<double> noise, half_gap, shock;
        for (int i = 0; i < 300; ++i) {
            noise.push_back(0.01 * rng.normal());
            half_gap.push_back(0.008 * rng.normal());
            shock.push_back(0.005 * rng.normal());
        }
        for (const double offset : {0.0, 0.3}) {
            for (int i = 0; i < 300; ++i) {
                const double v0 = offset + 0.05 + 0.04 * (i % 50) / 50.0 + noise[i];
                PanelRecord b;
                b.user_id = uid;
                b.treated = true;
                b.period = 0;
                b.views = 100;
                b.shares = 50;
                b.v_t = v0;
                b.v_half1 = v0 + half_gap[i];
                b.v_half2 = v0 - half_gap[i];
                b.s_t = 0.1;
                PanelRecord t = b;
                t.period = 1;
                t.s_t = 0.1 - 0.16 * v0 + shock[i];
                panel.push_back(b);
                panel.push_back(t);
                ++uid;
            }
        }
        // a control block to anchor the adjustment
        for (int i = 0; i < 100; ++i) {
            PanelRecord b;
            b.user_id = uid;
            b.period = 0;
            b.views = 100;
            b.shares = 50;
            b.v_t = 0.2;
            b.v_half1 = 0.2;
            b.v_half2 = 0.2;
            b.s_t = 0.1;
            PanelRecord t = b;
            t.period = 1;
            panel.push_back(b);
            panel.push_back(t);
            ++uid;
        }
        EstimatorOptions opts;
        opts.min_obs = 30;
        const GroupThetaResult result = estimate_theta_by_group(panel, 2, opts);
        REQUIRE(result.by_group.size() == 2);
        CHECK(result.by_group[0].est.theta_hat ==
              doctest::Approx(result.by_group[1].est.theta_hat).epsilon(1e-9));
        CHECK(result.wald_stat < 1e-12);
        CHECK(result.p_value > 0.99);
    }

    SUBCASE("homogeneous influence is not rejected, heterogeneous influence is") {
        const SimConfig cfg = panel_config(571, 0.16, 0.2, 240.0, 20000);
        const Panel panel = run_experiment(cfg, 2);
        const GroupThetaResult homo = estimate_theta_by_group(panel, 2);
        CHECK(homo.p_value > 0.05);

        // splice a low-taste population updating slowly with a high-taste one
        // updating fast, so the exposure split separates the two rates
        SimConfig lo = panel_config(577, 0.02, 0.2, 240.0, 12000);
        lo.taste.kind = TasteDist::Kind::Uniform;
        lo.taste.lo = 0.02;
        lo.taste.hi = 0.07;
        SimConfig hi = panel_config(587, 0.45, 0.2, 240.0, 12000);
        hi.taste.kind = TasteDist::Kind::Uniform;
        hi.taste.lo = 0.09;
        hi.taste.hi = 0.25;
        Panel mixed = run_experiment(lo, 2);
        Panel hi_panel = run_experiment(hi, 2);
        for (auto& rec : hi_panel) {
            rec.user_id += 1000000;
            mixed.push_back(rec);
        }
        const GroupThetaResult split = estimate_theta_by_group(mixed, 2);
        CHECK(split.p_value < 0.05);
    }
}
