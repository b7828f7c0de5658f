#include "feedsim/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "feedsim/csv.hpp"

namespace feedsim {

void PolicySpec::validate() const {
    if (!(mix_a >= 0.0 && mix_a <= 1.0))
        throw std::invalid_argument("PolicySpec: mixing weight must lie in [0, 1]");
    if (target == Target::Quantiles) {
        if (quantile_set.empty())
            throw std::invalid_argument("PolicySpec: quantile target needs a quantile set");
        for (const int q : quantile_set)
            if (q < 1 || q > 5)
                throw std::invalid_argument("PolicySpec: quantiles must lie in 1..5");
    }
}

double mixed_assignment(double a, double q_bar, double q_user) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("mixed_assignment: a must lie in [0, 1]");
    if (!(q_bar > 0.0 && q_bar < 1.0) || !(q_user > 0.0 && q_user < 1.0))
        throw std::domain_error("mixed_assignment: exposures must lie strictly inside (0, 1)");
    return a * q_bar + (1.0 - a) * q_user;
}

namespace {

double population_q_bar(const std::vector<UserState>& population) {
    double sum = 0.0;
    for (const auto& u : population) sum += u.taste;
    return sum / static_cast<double>(population.size());
}

}  // namespace

Panel simulate_policy(const std::vector<UserState>& population, const PolicySpec& policy,
                      const RegimeSpec& regime, const SimConfig& config, unsigned workers) {
    policy.validate();
    SimConfig regime_config = config;
    regime_config.params = UtilityParams(config.params.alpha, config.params.beta,
                                         config.params.eta, config.params.delta,
                                         regime.theta(), config.params.mu);

    const Panel baseline = run_period(population, 0, control_exposure(), regime_config, workers);

    // targeting sets
    const double q_bar = population_q_bar(population);
    std::set<long> quantile_targets;
    if (policy.target == PolicySpec::Target::Quantiles) {
        const auto quantiles = assign_quantiles(baseline);
        for (const auto& [uid, q] : quantiles)
            if (std::find(policy.quantile_set.begin(), policy.quantile_set.end(), q) !=
                policy.quantile_set.end())
                quantile_targets.insert(uid);
    }
    std::map<long, bool> targeted;
    for (const auto& u : population) {
        bool hit = false;
        switch (policy.target) {
            case PolicySpec::Target::All:
                hit = true;
                break;
            case PolicySpec::Target::AboveQbar:
                hit = u.taste > q_bar;  // open inequality; boundary users untargeted
                break;
            case PolicySpec::Target::Quantiles:
                hit = quantile_targets.count(u.user_id) > 0;
                break;
        }
        targeted[u.user_id] = hit;
    }

    const double a = policy.mix_a;
    const ExposureFn exposure = [&targeted, a, q_bar](const UserState& u, Rng&) {
        if (!targeted.at(u.user_id)) return u.taste;
        return mixed_assignment(a, q_bar, u.taste);
    };
    const Panel intervention = run_period(population, 1, exposure, regime_config, workers);

    Panel panel;
    panel.reserve(population.size() * 2);
    for (std::size_t i = 0; i < population.size(); ++i) {
        PanelRecord rec0 = baseline[i];
        PanelRecord rec1 = intervention[i];
        rec0.treated = rec1.treated = targeted.at(population[i].user_id);
        panel.push_back(rec0);
        panel.push_back(rec1);
    }
    return panel;
}

DecompositionResult model_decomposition(const Panel& policy_panel, const Panel& baseline_panel,
                                        const std::function<bool(long)>& in_group, int period) {
    struct Totals {
        double views = 0, shares = 0, toxic_shares = 0;
    };
    const auto accumulate = [&](const Panel& panel, std::map<long, const PanelRecord*>& index) {
        for (const auto& rec : panel)
            if (rec.period == period && in_group(rec.user_id)) index[rec.user_id] = &rec;
    };
    std::map<long, const PanelRecord*> policy_index, baseline_index;
    accumulate(policy_panel, policy_index);
    accumulate(baseline_panel, baseline_index);

    DecompositionResult out;
    Totals pol, base;
    long matched = 0;
    for (const auto& [uid, rec] : policy_index) {
        const auto it = baseline_index.find(uid);
        if (it == baseline_index.end()) continue;
        ++matched;
        pol.views += rec->views;
        pol.shares += rec->shares;
        pol.toxic_shares += rec->toxic_shares;
        base.views += it->second->views;
        base.shares += it->second->shares;
        base.toxic_shares += it->second->toxic_shares;
    }
    if (matched == 0) {
        out.warnings.add("model_decomposition: no matched users in group");
        return out;
    }
    if (matched < static_cast<long>(policy_index.size()))
        out.warnings.add("model_decomposition: scenarios only partially overlap");
    if (base.views <= 0 || base.shares <= 0 || base.toxic_shares <= 0 || pol.views <= 0 ||
        pol.shares <= 0 || pol.toxic_shares <= 0) {
        out.warnings.add("model_decomposition: zero group aggregate, components undefined");
        return out;
    }

    // toxic shares == N * (S/N) * (toxic shares / S) identically
    out.dlog_views = std::log(pol.views / base.views);
    out.dlog_share_rate = std::log((pol.shares / pol.views) / (base.shares / base.views));
    out.dlog_s_t = std::log((pol.toxic_shares / pol.shares) / (base.toxic_shares / base.shares));
    out.dlog_toxic_shares = std::log(pol.toxic_shares / base.toxic_shares);
    out.identity_residual = std::fabs(out.dlog_views + out.dlog_share_rate + out.dlog_s_t -
                                      out.dlog_toxic_shares);
    out.pct_change_views = std::expm1(out.dlog_views);
    out.pct_change_share_rate = std::expm1(out.dlog_share_rate);
    out.pct_change_s_t = std::expm1(out.dlog_s_t);
    out.pct_change_toxic_shares = std::expm1(out.dlog_toxic_shares);
    if (out.dlog_toxic_shares != 0.0)
        out.engagement_share = (out.dlog_views + out.dlog_share_rate) / out.dlog_toxic_shares;
    return out;
}

std::vector<FrontierRow> policy_frontier(const std::vector<UserState>& population,
                                         const std::vector<double>& a_grid,
                                         const RegimeSpec& regime, const SimConfig& config,
                                         unsigned workers) {
    const double q_bar = population_q_bar(population);
    std::set<long> target_ids;
    for (const auto& u : population)
        if (u.taste > q_bar) target_ids.insert(u.user_id);
    const auto in_target = [&](long uid) { return target_ids.count(uid) > 0; };

    PolicySpec base_policy;
    base_policy.mix_a = 0.0;
    base_policy.target = PolicySpec::Target::AboveQbar;
    const Panel baseline = simulate_policy(population, base_policy, regime, config, workers);

    std::vector<FrontierRow> rows;
    rows.reserve(a_grid.size());
    for (const double a : a_grid) {
        PolicySpec policy = base_policy;
        policy.mix_a = a;
        const Panel panel = simulate_policy(population, policy, regime, config, workers);
        FrontierRow row;
        row.a = a;
        for (const auto& rec : panel) {
            if (rec.period != 1 || !in_target(rec.user_id)) continue;
            row.total_views += rec.views;
            row.total_shares += rec.shares;
            row.toxic_shares += rec.toxic_shares;
        }
        const DecompositionResult d = model_decomposition(panel, baseline, in_target);
        row.pct_views = d.pct_change_views;
        row.pct_share_rate = d.pct_change_share_rate;
        row.pct_s_t = d.pct_change_s_t;
        rows.push_back(row);
    }
    return rows;
}

void write_frontier_csv(const std::string& path, const std::vector<FrontierRow>& rows) {
    CsvTable table;
    table.header = {"a",     "total_views",   "total_shares", "toxic_shares",
                    "pct_N", "pct_share_rate", "pct_s_t"};
    for (const auto& row : rows) {
        table.rows.push_back({format_number(row.a), format_number(row.total_views),
                              format_number(row.total_shares), format_number(row.toxic_shares),
                              format_number(row.pct_views), format_number(row.pct_share_rate),
                              format_number(row.pct_s_t)});
    }
    write_csv(path, table);
}

}  // namespace feedsim
