#include "feedsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "feedsim/csv.hpp"
#include "feedsim/parallel.hpp"
#include "feedsim/prob.hpp"

namespace feedsim {

namespace {

// substream tags
constexpr std::uint64_t kTasteStream = 1;
constexpr std::uint64_t kAssignStream = 2;
constexpr std::uint64_t kExposureStream = 3;
constexpr std::uint64_t kBehaviorStream = 4;

// log-domain guard, applied only at these simulator call sites
double clamp_unit(double x) { return std::min(std::max(x, 1e-9), 1.0 - 1e-9); }

}  // namespace

double TasteDist::draw(Rng& rng) const {
    double x = 0.0;
    switch (kind) {
        case Kind::Beta:
            x = rng.beta(a, b);
            break;
        case Kind::Gumbel01: {
            double u = rng.uniform();
            while (u <= 0.0 || u >= 1.0) u = rng.uniform();
            x = loc - scale * std::log(-std::log(u));
            break;
        }
        case Kind::Uniform:
            return rng.uniform(lo, hi);
        case Kind::Degenerate:
            return value;
        case Kind::Clusters: {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = weights.size() - 1;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                acc += weights[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            x = means[pick] + sds[pick] * rng.normal();
            break;
        }
    }
    return std::min(std::max(x, lo), hi);
}

void TasteDist::validate() const {
    if (!(lo > 0.0 && hi < 1.0 && lo < hi))
        throw std::invalid_argument("TasteDist: clamp bounds must satisfy 0 < lo < hi < 1");
    if (kind == Kind::Beta && (!(a > 0.0) || !(b > 0.0)))
        throw std::invalid_argument("TasteDist: beta shape parameters must be positive");
    if (kind == Kind::Degenerate && !(value > 0.0 && value < 1.0))
        throw std::invalid_argument("TasteDist: degenerate point must lie in (0, 1)");
    if (kind == Kind::Clusters) {
        if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
            throw std::invalid_argument("TasteDist: cluster spec lengths differ");
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::fabs(total - 1.0) > 1e-9)
            throw std::invalid_argument("TasteDist: cluster weights must sum to 1");
    }
    if (kind == Kind::Gumbel01 && !(scale > 0.0))
        throw std::invalid_argument("TasteDist: gumbel scale must be positive");
}

TasteDist TasteDist::beta_default() { return TasteDist{}; }

TasteDist TasteDist::degenerate(double p) {
    TasteDist d;
    d.kind = Kind::Degenerate;
    d.value = p;
    return d;
}

TasteDist TasteDist::clusters(std::vector<double> w, std::vector<double> m,
                              std::vector<double> s, double lo, double hi) {
    TasteDist d;
    d.kind = Kind::Clusters;
    d.weights = std::move(w);
    d.means = std::move(m);
    d.sds = std::move(s);
    d.lo = lo;
    d.hi = hi;
    return d;
}

void SimConfig::validate() const {
    if (n_users < 100) throw std::invalid_argument("SimConfig: n_users must be at least 100");
    if (!(treat_frac > 0.0 && treat_frac < 1.0))
        throw std::invalid_argument("SimConfig: treat_frac must lie in (0, 1)");
    if (days_per_period < 1) throw std::invalid_argument("SimConfig: days_per_period must be >= 1");
    if (!(posts_per_view_unit > 0.0))
        throw std::invalid_argument("SimConfig: posts_per_view_unit must be positive");
    taste.validate();
}

std::vector<UserState> draw_population(const SimConfig& config) {
    config.validate();
    std::vector<UserState> users(config.n_users);
    for (long i = 0; i < config.n_users; ++i) {
        UserState& u = users[i];
        u.user_id = i;
        Rng taste_rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i), 0, kTasteStream);
        u.taste = config.taste.draw(taste_rng);
        Rng assign_rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i), 0, kAssignStream);
        u.treated = assign_rng.uniform() < config.treat_frac;
        u.category = static_cast<long>(u.taste * 10.0);  // c(p), inert decile bucket
    }
    return users;
}

ExposureFn control_exposure() {
    return [](const UserState& u, Rng&) { return u.taste; };
}

ExposureFn random_feed_exposure(std::vector<double> control_pool, int days_per_period) {
    if (control_pool.empty())
        throw std::invalid_argument("random_feed_exposure: empty control pool");
    return [pool = std::move(control_pool), days_per_period](const UserState& u, Rng& rng) {
        if (!u.treated) return u.taste;
        double sum = 0.0;
        for (int d = 0; d < days_per_period; ++d) sum += pool[rng.pick(pool.size())];
        return sum / days_per_period;
    };
}

namespace {

PanelRecord make_record(const UserState& user, int period, double q_period,
                        const SimConfig& config, Rng& rng_behavior) {
    PanelRecord rec;
    rec.user_id = user.user_id;
    rec.treated = user.treated;
    rec.period = period;

    const double q = clamp_unit(q_period);
    const double p = clamp_unit(user.taste);
    const BehaviorOutcome sol =
        solve_user(config.params, Exposure(q), UserTaste(p));

    const double shock = rng_behavior.normal();
    rec.exited = sol.exited;
    if (sol.exited) return rec;  // leavers contribute zeros

    rec.views = std::lround(sol.n_views * config.posts_per_view_unit);
    rec.shares = std::lround(sol.n_shares * config.posts_per_view_unit);

    // toxic views as Bernoulli trials; the iid stream is already a random
    // ordering, so the first and second halves give the split proportions
    if (rec.views > 0) {
        const long n1 = rec.views / 2;
        long tox1 = 0, tox2 = 0;
        for (long t = 0; t < rec.views; ++t) {
            const bool toxic = rng_behavior.bernoulli(q);
            if (t < n1)
                tox1 += toxic;
            else
                tox2 += toxic;
        }
        rec.toxic_views = tox1 + tox2;
        rec.v_t = static_cast<double>(rec.toxic_views) / rec.views;
        if (n1 > 0) {
            rec.v_half1 = static_cast<double>(tox1) / n1;
            rec.v_half2 = static_cast<double>(tox2) / (rec.views - n1);
        }
    }

    if (rec.shares > 0) {
        const double s_shocked =
            clamp_unit(sol.share_frac_toxic * std::exp(config.params.mu * shock));
        rec.toxic_shares = rng_behavior.binomial(rec.shares, s_shocked);
        rec.s_t = static_cast<double>(rec.toxic_shares) / rec.shares;
    }
    return rec;
}

}  // namespace

Panel run_period(const std::vector<UserState>& users, int period, const ExposureFn& exposure,
                 const SimConfig& config, unsigned workers) {
    Panel panel(users.size());
    parallel_for(users.size(), workers, [&](std::size_t i) {
        const UserState& user = users[i];
        Rng rng_q = Rng::substream(config.seed, static_cast<std::uint64_t>(user.user_id),
                                   static_cast<std::uint64_t>(period), kExposureStream);
        Rng rng_b = Rng::substream(config.seed, static_cast<std::uint64_t>(user.user_id),
                                   static_cast<std::uint64_t>(period), kBehaviorStream);
        panel[i] = make_record(user, period, exposure(user, rng_q), config, rng_b);
    });
    return panel;
}

Panel run_experiment(const SimConfig& config, unsigned workers) {
    const std::vector<UserState> users = draw_population(config);
    std::vector<double> control_pool;
    for (const auto& u : users)
        if (!u.treated) control_pool.push_back(u.taste);
    if (control_pool.empty()) throw std::runtime_error("run_experiment: no control users drawn");

    const Panel baseline = run_period(users, 0, control_exposure(), config, workers);
    const Panel intervention = run_period(
        users, 1, random_feed_exposure(control_pool, config.days_per_period), config, workers);

    Panel panel;
    panel.reserve(users.size() * 2);
    for (std::size_t i = 0; i < users.size(); ++i) {
        panel.push_back(baseline[i]);
        panel.push_back(intervention[i]);
    }
    return panel;
}

std::map<long, int> assign_quantiles(const Panel& panel) {
    std::vector<std::pair<double, long>> baseline;
    for (const auto& rec : panel)
        if (rec.period == 0 && !is_missing(rec.v_t)) baseline.emplace_back(rec.v_t, rec.user_id);
    if (baseline.size() < 5)
        throw std::invalid_argument("assign_quantiles: need at least 5 users with baseline exposure");
    std::sort(baseline.begin(), baseline.end());
    std::map<long, int> out;
    const std::size_t n = baseline.size();
    for (std::size_t i = 0; i < n; ++i)
        out[baseline[i].second] = static_cast<int>(i * 5 / n) + 1;
    return out;
}

OutcomeFn outcome_views() {
    return [](const PanelRecord& r) { return static_cast<double>(r.views); };
}
OutcomeFn outcome_shares() {
    return [](const PanelRecord& r) { return static_cast<double>(r.shares); };
}
OutcomeFn outcome_toxic_views() {
    return [](const PanelRecord& r) { return static_cast<double>(r.toxic_views); };
}
OutcomeFn outcome_toxic_shares() {
    return [](const PanelRecord& r) { return static_cast<double>(r.toxic_shares); };
}
OutcomeFn outcome_v_t() {
    return [](const PanelRecord& r) { return r.v_t; };
}
OutcomeFn outcome_s_t() {
    return [](const PanelRecord& r) { return r.s_t; };
}
OutcomeFn outcome_toxic_share_view_ratio() {
    return [](const PanelRecord& r) {
        if (r.toxic_views <= 0) return kMissing;
        return static_cast<double>(r.toxic_shares) / static_cast<double>(r.toxic_views);
    };
}

AteResult ate(const Panel& panel, const OutcomeFn& outcome, int period) {
    std::vector<double> y;
    std::vector<double> d;
    AteResult out;
    for (const auto& rec : panel) {
        if (rec.period != period) continue;
        const double v = outcome(rec);
        if (is_missing(v)) continue;
        y.push_back(v);
        d.push_back(rec.treated ? 1.0 : 0.0);
        (rec.treated ? out.n_treated : out.n_control)++;
    }
    if (out.n_treated == 0 || out.n_control == 0) {
        out.warnings.add("ate: one arm has no usable observations");
        return out;
    }
    Vector yv = Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
    Vector dv = Eigen::Map<Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
    const OlsFit fit = simple_ols(yv, dv);
    out.effect = fit.coef(1);
    out.se = fit.se(1);
    out.control_mean = fit.coef(0);
    if (out.se == 0.0) out.warnings.add("ate: zero-variance outcome, SE is 0");
    return out;
}

std::vector<AteResult> hte_by_quantile(const Panel& panel, const OutcomeFn& outcome,
                                       const std::map<long, int>& quantiles, int period) {
    std::vector<AteResult> results(5);
    for (int q = 1; q <= 5; ++q) {
        Panel slice;
        for (const auto& rec : panel) {
            const auto it = quantiles.find(rec.user_id);
            if (it != quantiles.end() && it->second == q) slice.push_back(rec);
        }
        results[q - 1] = ate(slice, outcome, period);
        if (results[q - 1].n_treated == 0 || results[q - 1].n_control == 0)
            results[q - 1].warnings.add("hte_by_quantile: empty arm cell in quantile " +
                                        std::to_string(q));
    }
    return results;
}

namespace {

void fill_arm_ratios(DecompositionArm& arm, Warnings& warnings, const char* label) {
    if (arm.views > 0.0) arm.prop_toxic_views = arm.toxic_views / arm.views;
    if (arm.shares > 0.0) arm.prop_toxic_shares = arm.toxic_shares / arm.shares;
    if (arm.toxic_views > 0.0) arm.cond_share_rate = arm.toxic_shares / arm.toxic_views;
    if (arm.views <= 0.0 || arm.shares <= 0.0 || arm.toxic_views <= 0.0 ||
        arm.toxic_shares <= 0.0)
        warnings.add(std::string("decomposition: zero cell in ") + label +
                     " arm, components undefined");
}

EmpiricalDecomposition decompose_arms(DecompositionArm control, DecompositionArm treated) {
    EmpiricalDecomposition out;
    fill_arm_ratios(control, out.warnings, "control");
    fill_arm_ratios(treated, out.warnings, "treated");
    out.control = control;
    out.treated = treated;
    if (!out.warnings.empty()) return out;

    // toxic shares == v * S * (s / v) identically, so log changes add up
    out.dlog_exposure = std::log(treated.prop_toxic_views / control.prop_toxic_views);
    out.dlog_engagement = std::log(treated.shares / control.shares);
    out.dlog_behavior = std::log((treated.prop_toxic_shares / treated.prop_toxic_views) /
                                 (control.prop_toxic_shares / control.prop_toxic_views));
    out.dlog_toxic_shares = std::log(treated.toxic_shares / control.toxic_shares);
    out.identity_residual = std::fabs(out.dlog_exposure + out.dlog_engagement +
                                      out.dlog_behavior - out.dlog_toxic_shares);
    out.responsiveness = (treated.toxic_shares / control.toxic_shares - 1.0) /
                         (treated.toxic_views / control.toxic_views - 1.0);
    return out;
}

}  // namespace

EmpiricalDecomposition empirical_decomposition(const Panel& panel, int period) {
    DecompositionArm control, treated;
    for (const auto& rec : panel) {
        if (rec.period != period) continue;
        DecompositionArm& arm = rec.treated ? treated : control;
        arm.views += rec.views;
        arm.toxic_views += rec.toxic_views;
        arm.shares += rec.shares;
        arm.toxic_shares += rec.toxic_shares;
    }
    return decompose_arms(control, treated);
}

EmpiricalDecomposition decompose_counts(double views_c, double toxic_views_c, double shares_c,
                                        double toxic_shares_c, double views_t,
                                        double toxic_views_t, double shares_t,
                                        double toxic_shares_t) {
    DecompositionArm control{views_c, toxic_views_c, shares_c, toxic_shares_c};
    DecompositionArm treated{views_t, toxic_views_t, shares_t, toxic_shares_t};
    return decompose_arms(control, treated);
}

Responsiveness responsiveness(const Panel& panel, int period) {
    // arm means of toxic shares (a, b) and toxic views (c, d), with the
    // within-arm covariance carried through the delta method
    double sa = 0, sc = 0, sb = 0, sd = 0;
    long nt = 0, nc = 0;
    for (const auto& rec : panel) {
        if (rec.period != period) continue;
        if (rec.treated) {
            sa += rec.toxic_shares;
            sc += rec.toxic_views;
            ++nt;
        } else {
            sb += rec.toxic_shares;
            sd += rec.toxic_views;
            ++nc;
        }
    }
    Responsiveness out;
    if (nt == 0 || nc == 0) {
        out.warnings.add("responsiveness: both arms required");
        return out;
    }
    const double a = sa / nt, c = sc / nt, b = sb / nc, d = sd / nc;
    if (b <= 0.0 || d <= 0.0) {
        out.unstable = true;
        out.warnings.add("responsiveness: zero control mean");
        return out;
    }
    double vaa = 0, vcc = 0, vac = 0, vbb = 0, vdd = 0, vbd = 0;
    for (const auto& rec : panel) {
        if (rec.period != period) continue;
        if (rec.treated) {
            vaa += (rec.toxic_shares - a) * (rec.toxic_shares - a);
            vcc += (rec.toxic_views - c) * (rec.toxic_views - c);
            vac += (rec.toxic_shares - a) * (rec.toxic_views - c);
        } else {
            vbb += (rec.toxic_shares - b) * (rec.toxic_shares - b);
            vdd += (rec.toxic_views - d) * (rec.toxic_views - d);
            vbd += (rec.toxic_shares - b) * (rec.toxic_views - d);
        }
    }
    const double na = static_cast<double>(nt), nb = static_cast<double>(nc);
    vaa /= na * (na - 1), vcc /= na * (na - 1), vac /= na * (na - 1);
    vbb /= nb * (nb - 1), vdd /= nb * (nb - 1), vbd /= nb * (nb - 1);

    const double denom = c / d - 1.0;
    const double se_denom = std::sqrt(std::max(0.0, vcc / (d * d) + vdd * c * c / (d * d * d * d)));
    if (std::fabs(denom) < 2.0 * se_denom) {
        out.unstable = true;
        out.warnings.add("responsiveness: percent change in toxic views indistinguishable from 0");
    }
    out.ratio = (d * (a - b)) / (b * (c - d));
    const double ga = d / (b * (c - d));
    const double gb = -a * d / (b * b * (c - d));
    const double gc = -d * (a - b) / (b * (c - d) * (c - d));
    const double gd = (a - b) * c / (b * (c - d) * (c - d));
    const double var = ga * ga * vaa + gc * gc * vcc + 2.0 * ga * gc * vac +
                       gb * gb * vbb + gd * gd * vdd + 2.0 * gb * gd * vbd;
    out.se = std::sqrt(std::max(0.0, var));
    out.p_value_vs_one = out.se > 0.0 ? z_test_pvalue((out.ratio - 1.0) / out.se) : kMissing;
    return out;
}

OlsFit sharing_elasticity(const Panel& panel, int period) {
    std::vector<double> ls, lv;
    for (const auto& rec : panel) {
        if (rec.period != period || rec.exited) continue;
        if (is_missing(rec.s_t) || is_missing(rec.v_t)) continue;
        if (rec.s_t <= 0.0 || rec.v_t <= 0.0) continue;
        ls.push_back(std::log(rec.s_t));
        lv.push_back(std::log(rec.v_t));
    }
    if (ls.size() < 3) throw std::runtime_error("sharing_elasticity: too few active users");
    Vector y = Eigen::Map<Vector>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    Vector x = Eigen::Map<Vector>(lv.data(), static_cast<Eigen::Index>(lv.size()));
    return simple_ols(y, x);
}

Panel simulate_attrition(const Panel& panel, const AttritionRule& rule) {
    Panel out = panel;
    for (auto& rec : out) {
        if (rec.period != 1 || rec.exited) continue;
        if (rec.views < rule.min_views) {
            rec.views = rec.shares = rec.toxic_views = rec.toxic_shares = 0;
            rec.v_t = rec.s_t = rec.v_half1 = rec.v_half2 = kMissing;
            rec.exited = true;
        }
    }
    return out;
}

AttritionRates attrition_rates(const Panel& panel, int period) {
    long exit_t = 0, n_t = 0, exit_c = 0, n_c = 0;
    for (const auto& rec : panel) {
        if (rec.period != period) continue;
        if (rec.treated) {
            ++n_t;
            exit_t += rec.exited;
        } else {
            ++n_c;
            exit_c += rec.exited;
        }
    }
    AttritionRates rates;
    rates.treated = n_t > 0 ? static_cast<double>(exit_t) / n_t : 0.0;
    rates.control = n_c > 0 ? static_cast<double>(exit_c) / n_c : 0.0;
    return rates;
}

LeeBounds lee_bounds(const Panel& censored, const OutcomeFn& outcome, int period) {
    std::vector<double> stay_t, stay_c;
    long n_t = 0, n_c = 0;
    for (const auto& rec : censored) {
        if (rec.period != period) continue;
        (rec.treated ? n_t : n_c)++;
        if (rec.exited) continue;
        const double v = outcome(rec);
        if (is_missing(v)) continue;
        (rec.treated ? stay_t : stay_c).push_back(v);
    }
    LeeBounds out;
    if (stay_t.empty() || stay_c.empty() || n_t == 0 || n_c == 0) {
        out.warnings.add("lee_bounds: empty stayer cell");
        return out;
    }
    const double pi_t = static_cast<double>(stay_t.size()) / n_t;
    const double pi_c = static_cast<double>(stay_c.size()) / n_c;
    const auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    out.point = mean(stay_t) - mean(stay_c);
    if (pi_t == pi_c) {
        out.lower = out.upper = out.point;
        return out;
    }

    // trim the less-attrited arm by the differential retention share
    const bool trim_treated = pi_t > pi_c;
    std::vector<double>& arm = trim_treated ? stay_t : stay_c;
    const double pi_hi = trim_treated ? pi_t : pi_c;
    const double pi_lo = trim_treated ? pi_c : pi_t;
    out.trim = (pi_hi - pi_lo) / pi_hi;
    const long k = std::lround(out.trim * static_cast<double>(arm.size()));
    std::sort(arm.begin(), arm.end());

    const auto trimmed_mean = [&](bool from_above) {
        double sum = 0.0;
        const long n = static_cast<long>(arm.size());
        const long begin = from_above ? 0 : k;
        const long end = from_above ? n - k : n;
        for (long i = begin; i < end; ++i) sum += arm[i];
        return sum / static_cast<double>(end - begin);
    };
    if (k >= static_cast<long>(arm.size())) {
        out.warnings.add("lee_bounds: trimming exhausts the arm");
        return out;
    }
    const double other_mean = trim_treated ? mean(stay_c) : mean(stay_t);
    double eff_above, eff_below;
    if (trim_treated) {
        eff_above = trimmed_mean(true) - other_mean;
        eff_below = trimmed_mean(false) - other_mean;
    } else {
        eff_above = other_mean - trimmed_mean(true);
        eff_below = other_mean - trimmed_mean(false);
    }
    out.lower = std::min(eff_above, eff_below);
    out.upper = std::max(eff_above, eff_below);
    return out;
}

FTest balance_check(const Matrix& covariates, const std::vector<bool>& treated) {
    if (static_cast<long>(treated.size()) != covariates.rows())
        throw std::invalid_argument("balance_check: size mismatch");
    Vector d(covariates.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = treated[i] ? 1.0 : 0.0;
    return joint_f_test(d, covariates);
}

FTest balance_check(const std::vector<UserState>& population, const Panel& panel) {
    std::map<long, const PanelRecord*> baseline;
    for (const auto& rec : panel)
        if (rec.period == 0) baseline[rec.user_id] = &rec;
    Matrix X(static_cast<Eigen::Index>(population.size()), 4);
    std::vector<bool> d(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto it = baseline.find(population[i].user_id);
        if (it == baseline.end()) throw std::invalid_argument("balance_check: user missing baseline");
        const PanelRecord& rec = *it->second;
        X(static_cast<Eigen::Index>(i), 0) = population[i].taste;
        X(static_cast<Eigen::Index>(i), 1) = static_cast<double>(rec.views);
        X(static_cast<Eigen::Index>(i), 2) = static_cast<double>(rec.shares);
        X(static_cast<Eigen::Index>(i), 3) = is_missing(rec.v_t) ? 0.0 : rec.v_t;
        d[i] = population[i].treated;
    }
    return balance_check(X, d);
}

void write_panel_csv(const std::string& path, const Panel& panel) {
    CsvTable table;
    table.header = {"user_id", "arm",     "period",  "views",   "shares",  "toxic_views",
                    "toxic_shares", "v_t", "s_t", "v_half1", "v_half2", "exited"};
    table.rows.reserve(panel.size());
    for (const auto& rec : panel) {
        table.rows.push_back({std::to_string(rec.user_id),
                              rec.treated ? "treated" : "control",
                              std::to_string(rec.period),
                              std::to_string(rec.views),
                              std::to_string(rec.shares),
                              std::to_string(rec.toxic_views),
                              std::to_string(rec.toxic_shares),
                              format_number(rec.v_t),
                              format_number(rec.s_t),
                              format_number(rec.v_half1),
                              format_number(rec.v_half2),
                              rec.exited ? "1" : "0"});
    }
    write_csv(path, table);
}

Panel read_panel_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expect = {"user_id", "arm",     "period",  "views",
                                             "shares",  "toxic_views", "toxic_shares", "v_t",
                                             "s_t",     "v_half1", "v_half2", "exited"};
    if (table.header != expect) throw std::runtime_error("read_panel_csv: unexpected schema in " + path);
    Panel panel;
    panel.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != expect.size())
            throw std::runtime_error("read_panel_csv: ragged row in " + path);
        PanelRecord rec;
        rec.user_id = std::stol(row[0]);
        if (row[1] == "treated")
            rec.treated = true;
        else if (row[1] == "control")
            rec.treated = false;
        else
            throw std::runtime_error("read_panel_csv: bad arm '" + row[1] + "'");
        rec.period = std::stoi(row[2]);
        rec.views = std::stol(row[3]);
        rec.shares = std::stol(row[4]);
        rec.toxic_views = std::stol(row[5]);
        rec.toxic_shares = std::stol(row[6]);
        rec.v_t = parse_number(row[7]);
        rec.s_t = parse_number(row[8]);
        rec.v_half1 = parse_number(row[9]);
        rec.v_half2 = parse_number(row[10]);
        rec.exited = row[11] == "1";
        panel.push_back(rec);
    }
    return panel;
}

}  // namespace feedsim
