#include "feedsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "feedsim/csv.hpp"
#include "feedsim/prob.hpp"

namespace feedsim {

namespace {

struct UserPair {
    const PanelRecord* baseline = nullptr;
    const PanelRecord* intervention = nullptr;
};

std::map<long, UserPair> pair_periods(const Panel& panel) {
    std::map<long, UserPair> users;
    for (const auto& rec : panel) {
        auto& slot = users[rec.user_id];
        if (rec.period == 0) slot.baseline = &rec;
        if (rec.period == 1) slot.intervention = &rec;
    }
    return users;
}

// Treated-user estimation sample: control-adjusted change in the toxic share
// proportion plus the baseline exposure regressors.
struct ThetaSample {
    Vector y;        // delta s_t, control mean change removed
    Vector v0;       // baseline v_t
    Vector half1;
    Vector half2;
};

ThetaSample build_theta_sample(const Panel& panel, const EstimatorOptions& opts) {
    const auto users = pair_periods(panel);

    double control_change = 0.0;
    long n_control = 0;
    std::vector<double> dy, v0, h1, h2;
    for (const auto& [uid, pair] : users) {
        if (!pair.baseline || !pair.intervention) continue;
        const PanelRecord& b = *pair.baseline;
        const PanelRecord& t = *pair.intervention;
        if (is_missing(b.s_t) || is_missing(t.s_t)) continue;
        double change;
        if (opts.log_spec) {
            if (b.s_t <= 0.0 || t.s_t <= 0.0) continue;
            change = std::log(t.s_t) - std::log(b.s_t);
        } else {
            change = t.s_t - b.s_t;
        }
        if (!b.treated) {
            control_change += change;
            ++n_control;
            continue;
        }
        if (is_missing(b.v_t) || is_missing(b.v_half1) || is_missing(b.v_half2)) continue;
        if (opts.log_spec && (b.v_t <= 0.0 || b.v_half1 <= 0.0 || b.v_half2 <= 0.0)) continue;
        dy.push_back(change);
        if (opts.log_spec) {
            v0.push_back(std::log(b.v_t));
            h1.push_back(std::log(b.v_half1));
            h2.push_back(std::log(b.v_half2));
        } else {
            v0.push_back(b.v_t);
            h1.push_back(b.v_half1);
            h2.push_back(b.v_half2);
        }
    }
    if (n_control > 0) control_change /= n_control;

    ThetaSample sample;
    const auto n = static_cast<Eigen::Index>(dy.size());
    sample.y.resize(n);
    sample.v0.resize(n);
    sample.half1.resize(n);
    sample.half2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sample.y(i) = dy[i] - control_change;
        sample.v0(i) = v0[i];
        sample.half1(i) = h1[i];
        sample.half2(i) = h2[i];
    }
    return sample;
}

void require_sample(const ThetaSample& sample, const EstimatorOptions& opts, const char* who) {
    if (sample.y.size() < opts.min_obs)
        throw std::runtime_error(std::string(who) + ": only " + std::to_string(sample.y.size()) +
                                 " usable treated observations, need at least " +
                                 std::to_string(opts.min_obs));
}

double correlation(const Vector& x, const Vector& y) {
    const double mx = x.mean(), my = y.mean();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double sxx = (x.array() - mx).square().sum();
    const double syy = (y.array() - my).square().sum();
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

ThetaEstimate estimate_theta_ols(const Panel& panel, const EstimatorOptions& opts) {
    const ThetaSample sample = build_theta_sample(panel, opts);
    require_sample(sample, opts, "estimate_theta_ols");
    const OlsFit fit = simple_ols(sample.y, sample.v0);
    ThetaEstimate est;
    est.method = "ols";
    est.theta_hat = -fit.coef(1);
    est.se = fit.se(1);
    est.intercept = fit.coef(0);
    est.n_obs = fit.n;
    return est;
}

IvThetaEstimate estimate_theta_iv(const Panel& panel, const EstimatorOptions& opts) {
    const ThetaSample sample = build_theta_sample(panel, opts);
    require_sample(sample, opts, "estimate_theta_iv");
    const TslsFit fit = tsls(sample.y, sample.half1, sample.half2);
    IvThetaEstimate out;
    out.est.method = "iv2sls";
    out.est.theta_hat = -fit.slope;
    out.est.se = fit.se;
    out.est.intercept = fit.intercept;
    out.est.n_obs = fit.n;
    out.diag.first_stage_coef = fit.first_stage_coef;
    out.diag.first_stage_f = fit.first_stage_f;
    out.diag.reliability_ratio = correlation(sample.half1, sample.half2);
    if (fit.first_stage_f < 10.0) {
        out.diag.weak_instrument = true;
        out.est.warnings.add("estimate_theta_iv: first-stage F below 10, weak instrument");
    }
    return out;
}

ThetaEstimate estimate_theta_reliability(const Panel& panel, const EstimatorOptions& opts) {
    const ThetaSample sample = build_theta_sample(panel, opts);
    require_sample(sample, opts, "estimate_theta_reliability");
    const double reliability = correlation(sample.half1, sample.half2);
    if (reliability <= 0.0)
        throw std::runtime_error("estimate_theta_reliability: non-positive reliability ratio");
    const OlsFit fit = simple_ols(sample.y, sample.half1);
    ThetaEstimate est;
    est.method = "reliability";
    est.theta_hat = -fit.coef(1) / reliability;
    est.se = fit.se(1) / reliability;
    est.intercept = fit.coef(0);
    est.n_obs = fit.n;
    return est;
}

SteadyStateCheck steady_state_check(const Panel& panel, const EstimatorOptions& opts) {
    const auto users = pair_periods(panel);
    std::vector<double> s0, s1, v0;
    for (const auto& [uid, pair] : users) {
        if (!pair.baseline || !pair.intervention) continue;
        const PanelRecord& b = *pair.baseline;
        const PanelRecord& t = *pair.intervention;
        if (b.treated) continue;
        // control users who shared at baseline
        if (b.shares <= 0 || is_missing(b.s_t) || is_missing(t.s_t) || is_missing(b.v_t)) continue;
        s0.push_back(b.s_t);
        s1.push_back(t.s_t);
        v0.push_back(b.v_t);
    }
    SteadyStateCheck out;
    if (static_cast<long>(s0.size()) < opts.min_obs)
        throw std::runtime_error("steady_state_check: only " + std::to_string(s0.size()) +
                                 " usable control observations");
    Vector ys1 = Eigen::Map<Vector>(s1.data(), static_cast<Eigen::Index>(s1.size()));
    Vector xs0 = Eigen::Map<Vector>(s0.data(), static_cast<Eigen::Index>(s0.size()));
    Vector zv0 = Eigen::Map<Vector>(v0.data(), static_cast<Eigen::Index>(v0.size()));

    const OlsFit raw = simple_ols(ys1, xs0);
    out.delta1_ols = raw.coef(1);
    out.se_ols = raw.se(1);

    // baseline view proportion as an independent noisy measure of the same
    // taste; purges the attenuation from share sampling error
    const TslsFit corrected = tsls(ys1, xs0, zv0);
    out.delta1 = corrected.slope;
    out.se = corrected.se;
    out.n_obs = corrected.n;
    if (corrected.first_stage_f < 10.0)
        out.warnings.add("steady_state_check: weak first stage for the view-proportion instrument");
    out.p_value_vs_one = out.se > 0.0 ? z_test_pvalue((out.delta1 - 1.0) / out.se) : kMissing;
    return out;
}

GroupThetaResult estimate_theta_by_group(const Panel& panel, int n_groups,
                                         const EstimatorOptions& opts) {
    if (n_groups < 2) throw std::invalid_argument("estimate_theta_by_group: need >= 2 groups");
    const auto users = pair_periods(panel);
    std::vector<std::pair<double, long>> treated_v0;
    for (const auto& [uid, pair] : users) {
        if (!pair.baseline || !pair.intervention || !pair.baseline->treated) continue;
        if (is_missing(pair.baseline->v_t)) continue;
        treated_v0.emplace_back(pair.baseline->v_t, uid);
    }
    std::sort(treated_v0.begin(), treated_v0.end());
    std::map<long, int> group_of;
    for (std::size_t i = 0; i < treated_v0.size(); ++i)
        group_of[treated_v0[i].second] = static_cast<int>(i * n_groups / treated_v0.size());

    GroupThetaResult out;
    double num = 0.0, den = 0.0;
    for (int g = 0; g < n_groups; ++g) {
        Panel slice;
        for (const auto& rec : panel) {
            if (!rec.treated) {
                slice.push_back(rec);  // controls enter every group's adjustment
                continue;
            }
            const auto it = group_of.find(rec.user_id);
            if (it != group_of.end() && it->second == g) slice.push_back(rec);
        }
        IvThetaEstimate est = estimate_theta_iv(slice, opts);
        if (est.est.n_obs < 200)
            out.warnings.add("estimate_theta_by_group: small group " + std::to_string(g));
        num += est.est.theta_hat / (est.est.se * est.est.se);
        den += 1.0 / (est.est.se * est.est.se);
        out.by_group.push_back(std::move(est));
    }
    const double pooled = num / den;
    out.wald_stat = 0.0;
    for (const auto& est : out.by_group) {
        const double d = est.est.theta_hat - pooled;
        out.wald_stat += d * d / (est.est.se * est.est.se);
    }
    out.p_value = 1.0 - chi2_cdf(out.wald_stat, n_groups - 1);
    return out;
}

void write_results_csv(const std::string& path, const std::vector<IvThetaEstimate>& rows) {
    CsvTable table;
    table.header = {"method", "theta_hat", "se", "intercept", "first_stage_F", "n_obs"};
    for (const auto& row : rows) {
        table.rows.push_back({row.est.method, format_number(row.est.theta_hat),
                              format_number(row.est.se), format_number(row.est.intercept),
                              format_number(row.diag.first_stage_f),
                              std::to_string(row.est.n_obs)});
    }
    write_csv(path, table);
}

}  // namespace feedsim
