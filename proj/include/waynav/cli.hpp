#pragma once

// Command-line front end. Precedence: flags, then the --config file, then defaults.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace waynav {

struct RunConfig {
    std::string command;
    std::string scene;
    std::vector<std::string> episodes;  // empty = all
    std::string backend = "greedy";
    std::string endpoint;
    std::string protocol = "native";
    std::string model;
    double temperature = 0.0;
    std::string token_env = "WAYNAV_API_TOKEN";
    int timeout = 60;
    int retries = 2;
    bool attach_views = false;
    std::vector<std::string> predictor{"oracle"};  // "oracle" or params file paths
    std::vector<double> lambda_occ{0.5};
    int max_steps = 20;
    double threshold = 3.0;
    bool custom_threshold = false;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out = "out";
    bool no_backtrack = false;
    int epochs = 500;
    double lr = 0.1;
    int feature_dim = 16;
    int train_poses = 200;
    int poses = 100;
    std::vector<std::string> traces;
    std::string heatmaps;

    // Throws ConfigError on inconsistent values.
    void validate() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;

// Parses argv into a config; throws ConfigError (message includes usage problems).
// `help` is set and the usage text written to `out` when --help is given.
RunConfig parse_args(int argc, const char* const* argv, std::ostream& out, bool* help = nullptr);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_simulate(const RunConfig& config, bool write_traces, std::ostream& out, std::ostream& err);
int cmd_train_toy(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval_waypoints(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_render(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace waynav
