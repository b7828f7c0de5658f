#include "feedsim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "feedsim/calibration.hpp"
#include "feedsim/csv.hpp"
#include "feedsim/estimation.hpp"
#include "feedsim/measurement.hpp"

namespace feedsim::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (const double v : parse_double_list(value)) out.push_back(static_cast<int>(v));
    return out;
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("bad boolean value '" + value + "'");
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Writes artifacts under the output directory; refuses silent overwrites and
// removes everything it created if the run fails.
class OutputWriter {
public:
    OutputWriter(std::string out_dir, bool force) : out_dir_(std::move(out_dir)), force_(force) {
        std::filesystem::create_directories(out_dir_);
    }

    std::string path_for(const std::string& name) const { return out_dir_ + "/" + name; }

    std::string begin(const std::string& name) {
        const std::string path = path_for(name);
        if (!force_ && std::filesystem::exists(path))
            throw ConfigError("output " + path + " exists; pass --force to overwrite");
        created_.push_back(path);
        return path;
    }

    void rollback() {
        for (const auto& path : created_) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        created_.clear();
    }

private:
    std::string out_dir_;
    bool force_;
    std::vector<std::string> created_;
};

TasteDist::Kind parse_taste_kind(const std::string& value) {
    if (value == "beta") return TasteDist::Kind::Beta;
    if (value == "gumbel") return TasteDist::Kind::Gumbel01;
    if (value == "uniform") return TasteDist::Kind::Uniform;
    if (value == "degenerate") return TasteDist::Kind::Degenerate;
    if (value == "clusters") return TasteDist::Kind::Clusters;
    throw ConfigError("unknown taste_dist '" + value + "'");
}

void apply_simulate_key(FileConfig& cfg, const std::string& key, const std::string& value) {
    auto& params = cfg.sim.params;
    if (key == "n_users") cfg.sim.n_users = std::stol(value);
    else if (key == "treat_frac") cfg.sim.treat_frac = std::stod(value);
    else if (key == "days_per_period") cfg.sim.days_per_period = std::stoi(value);
    else if (key == "posts_per_view_unit") cfg.sim.posts_per_view_unit = std::stod(value);
    else if (key == "alpha") params = UtilityParams(std::stod(value), params.beta, params.eta, params.delta, params.theta, params.mu);
    else if (key == "beta") params = UtilityParams(params.alpha, std::stod(value), params.eta, params.delta, params.theta, params.mu);
    else if (key == "eta") params = UtilityParams(params.alpha, params.beta, std::stod(value), params.delta, params.theta, params.mu);
    else if (key == "delta") params = UtilityParams(params.alpha, params.beta, params.eta, std::stod(value), params.theta, params.mu);
    else if (key == "theta") params = UtilityParams(params.alpha, params.beta, params.eta, params.delta, std::stod(value), params.mu);
    else if (key == "mu") params = UtilityParams(params.alpha, params.beta, params.eta, params.delta, params.theta, std::stod(value));
    else if (key == "taste_dist") cfg.sim.taste.kind = parse_taste_kind(value);
    else if (key == "taste_a") cfg.sim.taste.a = std::stod(value);
    else if (key == "taste_b") cfg.sim.taste.b = std::stod(value);
    else if (key == "taste_lo") cfg.sim.taste.lo = std::stod(value);
    else if (key == "taste_hi") cfg.sim.taste.hi = std::stod(value);
    else if (key == "taste_loc") cfg.sim.taste.loc = std::stod(value);
    else if (key == "taste_scale") cfg.sim.taste.scale = std::stod(value);
    else if (key == "taste_value") cfg.sim.taste.value = std::stod(value);
    else if (key == "taste_weights") cfg.sim.taste.weights = parse_double_list(value);
    else if (key == "taste_means") cfg.sim.taste.means = parse_double_list(value);
    else if (key == "taste_sds") cfg.sim.taste.sds = parse_double_list(value);
    else throw ConfigError("unknown key '" + key + "' in [simulate]");
}

void apply_policy_key(FileConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mix_a") cfg.policy.mix_a = std::stod(value);
    else if (key == "target") {
        if (value == "all") cfg.policy.target = PolicySpec::Target::All;
        else if (value == "above_qbar") cfg.policy.target = PolicySpec::Target::AboveQbar;
        else if (value == "quantiles") cfg.policy.target = PolicySpec::Target::Quantiles;
        else throw ConfigError("unknown target '" + value + "'");
    } else if (key == "quantiles") cfg.policy.quantile_set = parse_int_list(value);
    else if (key == "theta_regime") {
        if (value == "mechanical") cfg.regime.kind = RegimeSpec::Kind::Mechanical;
        else if (value == "estimated") cfg.regime.kind = RegimeSpec::Kind::Estimated;
        else if (value == "malleable") cfg.regime.kind = RegimeSpec::Kind::Malleable;
        else throw ConfigError("unknown theta_regime '" + value + "'");
    } else if (key == "theta_value") cfg.regime.theta_value = std::stod(value);
    else if (key == "a_grid") cfg.a_grid = parse_double_list(value);
    else if (key == "revenue_per_1k_views") cfg.revenue_per_1k_views = std::stod(value);
    else throw ConfigError("unknown key '" + key + "' in [policy]");
}

void apply_estimate_key(FileConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "method") {
        if (value != "ols" && value != "iv" && value != "reliability" && value != "all")
            throw ConfigError("unknown estimate method '" + value + "'");
        cfg.estimate_method = value;
    } else if (key == "log_spec") cfg.log_spec = parse_bool(value);
    else if (key == "min_obs") cfg.min_obs = std::stol(value);
    else if (key == "panel_csv") cfg.panel_csv = value;
    else throw ConfigError("unknown key '" + key + "' in [estimate]");
}

void apply_calibrate_key(FileConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "theta") cfg.calibrate_theta = std::stod(value);
    else if (key == "panel_csv") cfg.panel_csv = value;
    else throw ConfigError("unknown key '" + key + "' in [calibrate]");
}

void apply_classify_key(FileConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "scores") cfg.scores_csv = value;
    else if (key == "thresholds") cfg.thresholds = parse_double_list(value);
    else throw ConfigError("unknown key '" + key + "' in [classify]");
}

}  // namespace

FileConfig parse_config_text(const std::string& text) {
    FileConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("bad section header at line " + std::to_string(lineno));
            section = line.substr(1, line.size() - 2);
            if (section != "simulate" && section != "policy" && section != "estimate" &&
                section != "calibrate" && section != "classify")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value at line " + std::to_string(lineno));
        auto trim = [](std::string s) {
            const auto b2 = s.find_first_not_of(" \t");
            const auto e2 = s.find_last_not_of(" \t");
            return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section");
        try {
            if (section == "simulate") apply_simulate_key(cfg, key, value);
            else if (section == "policy") apply_policy_key(cfg, key, value);
            else if (section == "estimate") apply_estimate_key(cfg, key, value);
            else if (section == "calibrate") apply_calibrate_key(cfg, key, value);
            else if (section == "classify") apply_classify_key(cfg, key, value);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value '" + value + "' for key '" + key + "'");
        }
    }
    return cfg;
}

FileConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::vector<BinscatterRow> binscatter(const std::vector<double>& x, const std::vector<double>& y,
                                      int bins) {
    if (x.size() != y.size()) throw std::invalid_argument("binscatter: length mismatch");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return a < b;
    });
    std::vector<BinscatterRow> rows;
    if (x.empty()) return rows;
    const std::size_t n = x.size();
    const int used = std::min<std::size_t>(bins, n);
    rows.resize(used);
    for (std::size_t r = 0; r < n; ++r) {
        const int b = static_cast<int>(r * used / n);
        rows[b].bin = b;
        rows[b].x_mean += x[order[r]];
        rows[b].y_mean += y[order[r]];
        rows[b].n += 1;
    }
    for (auto& row : rows) {
        row.x_mean /= row.n;
        row.y_mean /= row.n;
    }
    return rows;
}

namespace {

void write_binscatter_csv(const std::string& path, const std::vector<BinscatterRow>& rows) {
    CsvTable table;
    table.header = {"bin", "x_mean", "y_mean", "n"};
    for (const auto& row : rows)
        table.rows.push_back({std::to_string(row.bin), format_number(row.x_mean),
                              format_number(row.y_mean), std::to_string(row.n)});
    write_csv(path, table);
}

void write_quantile_effects_csv(const std::string& path, const Panel& panel) {
    CsvTable table;
    table.header = {"outcome", "quantile", "effect", "se", "control_mean", "n_treated", "n_control"};
    if (!panel.empty()) {
        const auto quantiles = assign_quantiles(panel);
        const std::vector<std::pair<std::string, OutcomeFn>> outcomes = {
            {"v_t", outcome_v_t()},
            {"views", outcome_views()},
            {"toxic_shares", outcome_toxic_shares()},
            {"toxic_share_view_ratio", outcome_toxic_share_view_ratio()},
            {"s_t", outcome_s_t()},
        };
        for (const auto& [name, fn] : outcomes) {
            const auto effects = hte_by_quantile(panel, fn, quantiles);
            for (int q = 1; q <= 5; ++q) {
                const AteResult& r = effects[q - 1];
                table.rows.push_back({name, std::to_string(q), format_number(r.effect),
                                      format_number(r.se), format_number(r.control_mean),
                                      std::to_string(r.n_treated), std::to_string(r.n_control)});
            }
        }
    }
    write_csv(path, table);
}

// change in sharing proportion vs baseline exposure among treated users
std::vector<BinscatterRow> sharing_change_binscatter(const Panel& panel) {
    std::map<long, std::pair<const PanelRecord*, const PanelRecord*>> users;
    for (const auto& rec : panel) {
        if (!rec.treated) continue;
        auto& slot = users[rec.user_id];
        (rec.period == 0 ? slot.first : slot.second) = &rec;
    }
    std::vector<double> x, y;
    for (const auto& [uid, pair] : users) {
        if (!pair.first || !pair.second) continue;
        if (is_missing(pair.first->v_t) || is_missing(pair.first->s_t) ||
            is_missing(pair.second->s_t))
            continue;
        x.push_back(pair.first->v_t);
        y.push_back(pair.second->s_t - pair.first->s_t);
    }
    return binscatter(x, y);
}

struct Manifest {
    std::vector<std::pair<std::string, std::string>> entries;
    void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
};

void write_manifest(const std::string& path, const Manifest& manifest) {
    std::ofstream out(path);
    for (const auto& [k, v] : manifest.entries) out << k << "=" << v << "\n";
}

struct CommandContext {
    RunConfig run;
    FileConfig cfg;
    OutputWriter* out = nullptr;
};

void require_seed(const RunConfig& run) {
    if (!run.seed_set)
        throw ConfigError("command '" + run.command + "' is stochastic; --seed is required");
}

std::string default_panel_path(const CommandContext& ctx) {
    if (!ctx.cfg.panel_csv.empty()) return ctx.cfg.panel_csv;
    return ctx.out->path_for("panel.csv");
}

Panel cmd_simulate(CommandContext& ctx) {
    require_seed(ctx.run);
    SimConfig sim = ctx.cfg.sim;
    sim.seed = ctx.run.seed;
    const Panel panel = run_experiment(sim, ctx.run.workers);
    write_panel_csv(ctx.out->begin("panel.csv"), panel);
    write_quantile_effects_csv(ctx.out->begin("quantile_effects.csv"), panel);
    write_binscatter_csv(ctx.out->begin("binscatter.csv"), sharing_change_binscatter(panel));
    return panel;
}

std::vector<IvThetaEstimate> cmd_estimate(CommandContext& ctx, const Panel& panel) {
    EstimatorOptions opts;
    opts.log_spec = ctx.cfg.log_spec;
    opts.min_obs = ctx.cfg.min_obs;
    std::vector<IvThetaEstimate> rows;
    const std::string& method = ctx.cfg.estimate_method;
    if (method == "ols" || method == "all")
        rows.push_back({estimate_theta_ols(panel, opts), IVDiagnostics{}});
    if (method == "iv" || method == "all") rows.push_back(estimate_theta_iv(panel, opts));
    if (method == "reliability" || method == "all")
        rows.push_back({estimate_theta_reliability(panel, opts), IVDiagnostics{}});
    write_results_csv(ctx.out->begin("results.csv"), rows);

    const SteadyStateCheck ss = steady_state_check(panel, opts);
    CsvTable table;
    table.header = {"delta1_ols", "se_ols", "delta1", "se", "p_value_vs_one", "n_obs"};
    table.rows.push_back({format_number(ss.delta1_ols), format_number(ss.se_ols),
                          format_number(ss.delta1), format_number(ss.se),
                          format_number(ss.p_value_vs_one), std::to_string(ss.n_obs)});
    write_csv(ctx.out->begin("steady_state.csv"), table);
    return rows;
}

CalibratedParams cmd_calibrate(CommandContext& ctx, const Panel& panel, double theta) {
    CalibrationOptions opts;
    opts.posts_per_view_unit = ctx.cfg.sim.posts_per_view_unit;
    opts.mu = ctx.cfg.sim.params.mu;
    const CalibratedParams result = calibrate(panel, theta, opts);
    write_calibration_csv(ctx.out->begin("calibration.csv"), result);
    return result;
}

std::vector<FrontierRow> cmd_counterfactual(CommandContext& ctx) {
    require_seed(ctx.run);
    SimConfig sim = ctx.cfg.sim;
    sim.seed = ctx.run.seed;
    const auto population = draw_population(sim);
    const auto rows = policy_frontier(population, ctx.cfg.a_grid, ctx.cfg.regime, sim,
                                      ctx.run.workers);
    write_frontier_csv(ctx.out->begin("frontier.csv"), rows);

    if (ctx.cfg.revenue_per_1k_views > 0.0) {
        CsvTable table;
        table.header = {"a", "total_views", "revenue"};
        for (const auto& row : rows)
            table.rows.push_back({format_number(row.a), format_number(row.total_views),
                                  format_number(row.total_views / 1000.0 *
                                                ctx.cfg.revenue_per_1k_views)});
        write_csv(ctx.out->begin("revenue.csv"), table);
    }

    // diagnostic plot data from the fully mixed policy over all users
    PolicySpec all_policy;
    all_policy.mix_a = 1.0;
    all_policy.target = PolicySpec::Target::All;
    const Panel policy_panel = simulate_policy(population, all_policy, ctx.cfg.regime, sim,
                                               ctx.run.workers);
    write_binscatter_csv(ctx.out->begin("policy_binscatter.csv"),
                         sharing_change_binscatter(policy_panel));
    return rows;
}

void cmd_classify(CommandContext& ctx) {
    if (ctx.cfg.scores_csv.empty()) throw ConfigError("[classify] scores path is required");
    const auto items = read_scores_csv(ctx.cfg.scores_csv);
    const auto selection = select_threshold(items, ctx.cfg.thresholds);
    write_threshold_report_csv(ctx.out->begin("threshold_report.csv"), selection);
}

void cmd_full_pipeline(CommandContext& ctx) {
    require_seed(ctx.run);
    cmd_simulate(ctx);
    // re-read from disk so the chain exercises the panel round trip
    const Panel reloaded = read_panel_csv(ctx.out->path_for("panel.csv"));
    const auto estimates = cmd_estimate(ctx, reloaded);

    double theta_iv = kMissing, theta_iv_se = kMissing;
    for (const auto& row : estimates)
        if (row.est.method == "iv2sls") {
            theta_iv = row.est.theta_hat;
            theta_iv_se = row.est.se;
        }
    if (is_missing(theta_iv)) throw std::runtime_error("full-pipeline: IV estimate unavailable");

    const CalibratedParams calib = cmd_calibrate(ctx, reloaded, theta_iv);
    cmd_counterfactual(ctx);

    const double theta_true = ctx.cfg.sim.params.theta;
    const double ci_lo = theta_iv - 1.96 * theta_iv_se;
    const double ci_hi = theta_iv + 1.96 * theta_iv_se;
    double worst_fit = 0.0;
    const auto emp = calib.empirical.as_array();
    const auto fit = calib.fitted.as_array();
    for (std::size_t i = 0; i < emp.size(); ++i)
        if (!is_missing(emp[i]) && emp[i] != 0.0 && !is_missing(fit[i]))
            worst_fit = std::max(worst_fit, std::fabs(fit[i] / emp[i] - 1.0));

    std::ofstream summary(ctx.out->begin("summary.txt"));
    summary << "theta_true=" << format_number(theta_true) << "\n"
            << "theta_iv=" << format_number(theta_iv) << "\n"
            << "theta_iv_ci=[" << format_number(ci_lo) << "," << format_number(ci_hi) << "]\n"
            << "theta_in_ci=" << (theta_true >= ci_lo && theta_true <= ci_hi ? "1" : "0") << "\n"
            << "calibration_converged=" << (calib.converged ? "1" : "0") << "\n"
            << "calibration_worst_moment_dev=" << format_number(worst_fit) << "\n";
    summary.close();
    if (!calib.converged) throw NonConvergence("full-pipeline: calibration did not converge");
}

}  // namespace

void emit_plot_data(const Panel& panel, const std::string& out_dir, bool force) {
    OutputWriter out(out_dir, force);
    write_quantile_effects_csv(out.begin("quantile_effects.csv"), panel);
    write_binscatter_csv(out.begin("binscatter.csv"), sharing_change_binscatter(panel));
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("feedsim");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
    CLI::App app{"feed diversification simulator and estimator toolkit"};
    app.require_subcommand(1);

    RunConfig run_cfg;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "generate a two-period experiment panel"},
        {"estimate", "recover the influence weight from a panel CSV"},
        {"calibrate", "match behavioral parameters to panel moments"},
        {"counterfactual", "sweep feed-mixing policies over a grid"},
        {"classify", "threshold selection report for scored items"},
        {"full-pipeline", "simulate, estimate, calibrate, and sweep in one run"}};
    for (const auto& [name, description] : commands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", run_cfg.config_path, "config file (key=value sections)");
        sub->add_option("--seed", run_cfg.seed, "master seed")->each([&run_cfg](const std::string&) {
            run_cfg.seed_set = true;
        });
        sub->add_option("--out", run_cfg.out_dir, "output directory");
        sub->add_option("--workers", run_cfg.workers, "worker threads (results are invariant)");
        sub->add_flag("--force", run_cfg.force, "allow overwriting existing outputs");
        sub->callback([&run_cfg, name] { run_cfg.command = name; });
    }

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? kOk : kConfigError;
    }

    const auto started = std::chrono::steady_clock::now();
    OutputWriter out(run_cfg.out_dir, run_cfg.force);
    Manifest manifest;
    try {
        CommandContext ctx;
        ctx.run = run_cfg;
        std::string config_bytes;
        if (!run_cfg.config_path.empty()) {
            std::ifstream in(run_cfg.config_path);
            if (!in) throw ConfigError("cannot open config file " + run_cfg.config_path);
            std::stringstream buffer;
            buffer << in.rdbuf();
            config_bytes = buffer.str();
            ctx.cfg = parse_config_text(config_bytes);
        }
        ctx.out = &out;

        if (run_cfg.command == "simulate") {
            cmd_simulate(ctx);
        } else if (run_cfg.command == "estimate") {
            cmd_estimate(ctx, read_panel_csv(default_panel_path(ctx)));
        } else if (run_cfg.command == "calibrate") {
            const CalibratedParams result =
                cmd_calibrate(ctx, read_panel_csv(default_panel_path(ctx)), ctx.cfg.calibrate_theta);
            if (!result.converged) throw NonConvergence("calibrate: did not converge");
        } else if (run_cfg.command == "counterfactual") {
            cmd_counterfactual(ctx);
        } else if (run_cfg.command == "classify") {
            cmd_classify(ctx);
        } else if (run_cfg.command == "full-pipeline") {
            cmd_full_pipeline(ctx);
        }

        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        manifest.add("command", run_cfg.command);
        manifest.add("config_hash", std::to_string(fnv1a_hash(config_bytes)));
        manifest.add("seed", run_cfg.seed_set ? std::to_string(run_cfg.seed) : "");
        manifest.add("workers", std::to_string(run_cfg.workers));
        manifest.add("feedsim_version", kVersion);
        manifest.add("wall_time_ms", std::to_string(elapsed.count()));
        write_manifest(out.begin("manifest.txt"), manifest);
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        out.rollback();
        return kConfigError;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        out.rollback();
        return kDataContractError;
    }
}

}  // namespace feedsim::cli
