#pragma once

#include <string>
#include <vector>

#include "feedsim/common.hpp"
#include "feedsim/counterfactual.hpp"
#include "feedsim/simulator.hpp"

namespace feedsim::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNonConvergence = 3;
inline constexpr int kDataContractError = 4;

struct RunConfig {
    std::string command;  // simulate | estimate | calibrate | counterfactual | classify | full-pipeline
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
    unsigned workers = 1;
    bool force = false;
};

// Full parsed configuration file (key=value sections).  Unknown sections or
// keys abort before any compute.
struct FileConfig {
    SimConfig sim;
    PolicySpec policy;
    RegimeSpec regime;
    std::vector<double> a_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    double revenue_per_1k_views = 0.0;
    std::string estimate_method = "all";
    bool log_spec = false;
    long min_obs = 30;
    std::string panel_csv;  // defaults to <out>/panel.csv
    double calibrate_theta = 0.16;
    std::string scores_csv;
    std::vector<double> thresholds = {0.1, 0.2, 0.3, 0.35};
};

FileConfig parse_config_file(const std::string& path);
FileConfig parse_config_text(const std::string& text);

// Equal-count binscatter bins.
struct BinscatterRow {
    int bin = 0;
    double x_mean = 0.0;
    double y_mean = 0.0;
    long n = 0;
};

std::vector<BinscatterRow> binscatter(const std::vector<double>& x, const std::vector<double>& y,
                                      int bins = 20);

// Plot-ready tables: per-quantile effects for the standard outcomes and the
// change-in-sharing diagnostic among treated users.
void emit_plot_data(const Panel& panel, const std::string& out_dir, bool force);

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace feedsim::cli
