#include "feedsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feedsim/behavior.hpp"
#include "feedsim/csv.hpp"
#include "feedsim/neldermead.hpp"
#include "feedsim/quadrature.hpp"

namespace feedsim {

namespace {

constexpr int kQuadratureOrder = 256;

const GaussLegendre& quad_rule() {
    static const GaussLegendre rule(kQuadratureOrder);
    return rule;
}

struct GroupMoments {
    double s = 0.0, n = 0.0, shares = 0.0;
};

// Conditional moments over one side of the median split.  N and S integrate
// their truncated-at-zero values; s^t conditions on active sharers, matching
// the missing-when-zero convention in the panel, and carries the lognormal
// shock mean.
GroupMoments integrate_group(const UtilityParams& params, double q_bar,
                             const TruncatedGumbel& taste, double lo, double hi) {
    const auto& rule = quad_rule();
    const Exposure q(std::min(std::max(q_bar, 1e-12), 1.0 - 1e-12));
    double mass = 0.0, mass_sharing = 0.0;
    GroupMoments g;
    const double shock_mean = std::exp(0.5 * params.mu * params.mu);
    const double xm = 0.5 * (hi + lo), xl = 0.5 * (hi - lo);
    for (int i = 0; i < kQuadratureOrder; ++i) {
        const double v = xm + xl * rule.nodes[i];
        const double w = rule.weights[i] * xl;
        const double dens = taste.base.pdf(v);
        const UserTaste p(v);
        const double n_raw = optimal_views(params, q, p);
        const double n = std::max(0.0, n_raw);
        const double s_count = n > 0.0 ? std::max(0.0, optimal_shares(params, n, q, p)) : 0.0;
        mass += w * dens;
        g.n += w * dens * n;
        g.shares += w * dens * s_count;
        if (s_count > 0.0) {
            mass_sharing += w * dens;
            g.s += w * dens * optimal_share_fraction(q, p, params.theta) * shock_mean;
        }
    }
    if (mass <= 0.0) throw std::runtime_error("simulated_moments: zero taste mass in group");
    g.n /= mass;
    g.shares /= mass;
    g.s = mass_sharing > 0.0 ? g.s / mass_sharing : kMissing;
    return g;
}

}  // namespace

ExposureModel ExposureModel::from_panel(const Panel& panel) {
    std::vector<double> baseline_v;
    double q_sum = 0.0, sampling_var = 0.0;
    long q_n = 0;
    for (const auto& rec : panel) {
        if (!rec.treated) continue;
        if (rec.period == 0 && !is_missing(rec.v_t) && rec.views > 0) {
            baseline_v.push_back(rec.v_t);
            sampling_var += rec.v_t * (1.0 - rec.v_t) / static_cast<double>(rec.views);
        }
        if (rec.period == 1 && !is_missing(rec.v_t)) {
            q_sum += rec.v_t;
            ++q_n;
        }
    }
    if (baseline_v.size() < 2 || q_n == 0)
        throw std::runtime_error("ExposureModel::from_panel: not enough treated observations");
    double mean = 0.0;
    for (const double v : baseline_v) mean += v;
    mean /= static_cast<double>(baseline_v.size());
    double var = 0.0;
    for (const double v : baseline_v) var += (v - mean) * (v - mean);
    var /= static_cast<double>(baseline_v.size() - 1);
    // observed exposure carries known binomial sampling noise on top of the
    // latent taste law; subtract it so the fitted density lives on the taste axis
    sampling_var /= static_cast<double>(baseline_v.size());
    const double latent_var = std::max(var - sampling_var, 0.05 * var);

    ExposureModel model;
    model.taste.base = Gumbel::fit_moments(mean, latent_var);
    model.taste.lo = 0.0;
    model.taste.hi = 1.0;
    model.q_bar = q_sum / static_cast<double>(q_n);
    return model;
}

MomentVector empirical_moments(const Panel& panel, double posts_per_view_unit) {
    if (!(posts_per_view_unit > 0.0))
        throw std::invalid_argument("empirical_moments: scale must be positive");
    struct Obs {
        double v0, s1, n1, shares1;
        bool has_s;
    };
    std::map<long, std::pair<const PanelRecord*, const PanelRecord*>> users;
    for (const auto& rec : panel) {
        if (!rec.treated) continue;
        auto& slot = users[rec.user_id];
        (rec.period == 0 ? slot.first : slot.second) = &rec;
    }
    std::vector<Obs> obs;
    for (const auto& [uid, pair] : users) {
        if (!pair.first || !pair.second) continue;
        if (is_missing(pair.first->v_t)) continue;
        Obs o;
        o.v0 = pair.first->v_t;
        o.s1 = pair.second->s_t;
        o.has_s = !is_missing(pair.second->s_t);
        o.n1 = pair.second->views / posts_per_view_unit;
        o.shares1 = pair.second->shares / posts_per_view_unit;
        obs.push_back(o);
    }
    if (obs.size() < 2) throw std::runtime_error("empirical_moments: not enough treated users");

    std::vector<double> v0s;
    v0s.reserve(obs.size());
    for (const auto& o : obs) v0s.push_back(o.v0);
    std::nth_element(v0s.begin(), v0s.begin() + v0s.size() / 2, v0s.end());
    const double median = v0s[v0s.size() / 2];

    MomentVector m;
    m.median = median;
    double s_lo = 0, n_lo = 0, sh_lo = 0, s_hi = 0, n_hi = 0, sh_hi = 0;
    long c_lo = 0, c_hi = 0, cs_lo = 0, cs_hi = 0;
    for (const auto& o : obs) {
        const bool low = o.v0 < median;
        if (low) {
            ++c_lo;
            n_lo += o.n1;
            sh_lo += o.shares1;
            if (o.has_s) {
                ++cs_lo;
                s_lo += o.s1;
            }
        } else {
            ++c_hi;
            n_hi += o.n1;
            sh_hi += o.shares1;
            if (o.has_s) {
                ++cs_hi;
                s_hi += o.s1;
            }
        }
    }
    if (c_lo == 0 || c_hi == 0) throw std::runtime_error("empirical_moments: empty exposure group");
    m.n_low = n_lo / c_lo;
    m.shares_low = sh_lo / c_lo;
    m.n_high = n_hi / c_hi;
    m.shares_high = sh_hi / c_hi;
    m.s_low = cs_lo > 0 ? s_lo / cs_lo : kMissing;
    m.s_high = cs_hi > 0 ? s_hi / cs_hi : kMissing;
    return m;
}

MomentVector simulated_moments(const UtilityParams& candidate, double theta,
                               const ExposureModel& exposure) {
    if (is_missing(exposure.q_bar))
        throw std::invalid_argument("simulated_moments: exposure model lacks q_bar");
    UtilityParams params(candidate.alpha, candidate.beta, candidate.eta, candidate.delta,
                         theta, candidate.mu);
    const double m = exposure.taste.median();
    const double lo = std::max(exposure.taste.lo, 1e-12);
    const double hi = std::min(exposure.taste.hi, 1.0 - 1e-12);
    const GroupMoments low = integrate_group(params, exposure.q_bar, exposure.taste, lo, m);
    const GroupMoments high = integrate_group(params, exposure.q_bar, exposure.taste, m, hi);
    MomentVector out;
    out.median = m;
    out.s_low = low.s;
    out.n_low = low.n;
    out.shares_low = low.shares;
    out.s_high = high.s;
    out.n_high = high.n;
    out.shares_high = high.shares;
    return out;
}

double msm_objective(const MomentVector& simulated, const MomentVector& empirical,
                     Warnings* warnings) {
    const auto sim = simulated.as_array();
    const auto emp = empirical.as_array();
    double total = 0.0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        if (is_missing(emp[i]) || emp[i] == 0.0) {
            if (warnings) warnings->add("msm_objective: empirical moment " + std::to_string(i) +
                                        " is zero or missing, dropped");
            continue;
        }
        if (is_missing(sim[i])) {
            total += 1.0;  // degenerate candidate with no sharers
            continue;
        }
        const double rel = sim[i] / emp[i] - 1.0;
        total += rel * rel;
    }
    return total;
}

CalibratedParams calibrate(const Panel& panel, double theta, const CalibrationOptions& opts) {
    const ExposureModel exposure = ExposureModel::from_panel(panel);
    const MomentVector empirical = empirical_moments(panel, opts.posts_per_view_unit);

    Vector x0 = opts.x0.size() == 4 ? opts.x0 : Vector::Ones(4);
    if ((x0.array() <= 0.0).any()) throw std::invalid_argument("calibrate: x0 must be positive");

    const auto objective = [&](const Vector& logx) {
        const UtilityParams candidate(std::exp(logx(0)), std::exp(logx(1)), std::exp(logx(2)),
                                      std::exp(logx(3)), theta, opts.mu);
        return msm_objective(simulated_moments(candidate, theta, exposure), empirical);
    };

    NelderMeadOptions nm_opts;
    const NelderMeadResult res = nelder_mead(objective, x0.array().log().matrix(), nm_opts);

    CalibratedParams out;
    out.alpha = std::exp(res.x(0));
    out.beta = std::exp(res.x(1));
    out.eta = std::exp(res.x(2));
    out.delta = std::exp(res.x(3));
    out.objective_value = res.value;
    out.iterations = res.iterations;
    out.converged = res.converged;
    out.empirical = empirical;
    const UtilityParams fitted(out.alpha, out.beta, out.eta, out.delta, theta, opts.mu);
    out.fitted = simulated_moments(fitted, theta, exposure);
    return out;
}

void write_calibration_csv(const std::string& path, const CalibratedParams& result) {
    CsvTable table;
    table.header = {"name", "value", "empirical", "fitted"};
    const auto row = [&](const std::string& name, double value, double emp = kMissing,
                         double fit = kMissing) {
        table.rows.push_back({name, format_number(value), format_number(emp), format_number(fit)});
    };
    row("alpha", result.alpha);
    row("beta", result.beta);
    row("eta", result.eta);
    row("delta", result.delta);
    row("objective", result.objective_value);
    row("iterations", result.iterations);
    row("converged", result.converged ? 1.0 : 0.0);
    const auto emp = result.empirical.as_array();
    const auto fit = result.fitted.as_array();
    const char* names[] = {"s_low", "n_low", "shares_low", "s_high", "n_high", "shares_high"};
    for (int i = 0; i < 6; ++i) row(names[i], kMissing, emp[i], fit[i]);
    write_csv(path, table);
}

}  // namespace feedsim
