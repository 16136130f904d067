#include "waynav/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "waynav/errors.hpp"
#include "waynav/experiments.hpp"
#include "waynav/external_backend.hpp"
#include "waynav/harness.hpp"
#include "waynav/navigator.hpp"
#include "waynav/render.hpp"

namespace fs = std::filesystem;

namespace waynav {

void RunConfig::validate() const {
    if (backend != "greedy" && backend != "external") throw ConfigError("backend must be greedy or external");
    if (backend == "external" && endpoint.empty()) throw ConfigError("the external backend needs --endpoint");
    wire_protocol_from_name(protocol);
    if (max_steps < 0) throw ConfigError("max-steps must be non-negative");
    if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
    if (!custom_threshold && threshold != kSimSuccessThreshold && threshold != kStrictSuccessThreshold)
        throw ConfigError("threshold must be 3.0 or 2.0 unless --custom-threshold is given");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (timeout < 1) throw ConfigError("timeout must be at least 1 second");
    if (retries < 0) throw ConfigError("retries must be non-negative");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (feature_dim < 1) throw ConfigError("feature-dim must be at least 1");
    if (predictor.empty()) throw ConfigError("predictor list is empty");
    for (double l : lambda_occ)
        if (!(l >= 0.0)) throw ConfigError("lambda-occ values must be non-negative");
}

RunConfig parse_args(int argc, const char* const* argv, std::ostream& out, bool* help) {
    RunConfig c;
    CLI::App app{"Waypoint navigation toolkit", "waynav"};
    app.set_config("--config", "", "TOML config file; flags override its values");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);
    app.fallthrough();

    app.add_option("--scene", c.scene, "Scene JSON file");
    app.add_option("--episodes", c.episodes, "Episode ids to run (default: all)");
    app.add_option("--backend", c.backend, "Decision backend: greedy or external");
    app.add_option("--endpoint", c.endpoint, "External decision endpoint URL");
    app.add_option("--protocol", c.protocol, "External wire protocol: native or chat");
    app.add_option("--model", c.model, "Model name sent to the external endpoint");
    app.add_option("--temperature", c.temperature, "Sampling temperature for the external endpoint");
    app.add_option("--token-env", c.token_env, "Environment variable holding the bearer token");
    app.add_option("--timeout", c.timeout, "External request timeout in seconds");
    app.add_option("--retries", c.retries, "Extra attempts after a transport failure");
    app.add_flag("--attach-views", c.attach_views, "Attach the depth view of each waypoint option");
    app.add_option("--predictor", c.predictor, "Waypoint source: oracle or a TWP1 params file (eval-waypoints: list)");
    app.add_option("--lambda-occ", c.lambda_occ, "Occupancy loss weight(s)");
    app.add_option("--max-steps", c.max_steps, "Decision steps per episode");
    app.add_option("--threshold", c.threshold, "Success radius in metres (3.0 sim, 2.0 strict)");
    app.add_flag("--custom-threshold", c.custom_threshold, "Accept a threshold other than 3.0 or 2.0");
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--workers", c.workers, "Episodes run in parallel");
    app.add_option("--out", c.out, "Output directory");
    app.add_flag("--no-backtrack", c.no_backtrack, "Never offer MoveBack");
    app.add_option("--epochs", c.epochs, "Training epochs");
    app.add_option("--lr", c.lr, "Training learning rate");
    app.add_option("--feature-dim", c.feature_dim, "Feature width of the toy predictor");
    app.add_option("--train-poses", c.train_poses, "Training poses for train-toy");
    app.add_option("--poses", c.poses, "Held-out poses for eval-waypoints");
    app.add_option("--trace", c.traces, "Trace JSONL file(s) to render");
    app.add_option("--heatmaps", c.heatmaps, "Directory with step_NNN.phm files (render)");

    app.add_subcommand("simulate", "Run episodes and write traces, heatmaps and metrics");
    app.add_subcommand("eval-nav", "Run episodes and write metrics only");
    app.add_subcommand("train-toy", "Train the toy predictor for each --lambda-occ value");
    app.add_subcommand("eval-waypoints", "Waypoint metrics of one or more predictors on held-out poses");
    app.add_subcommand("render", "SVG trajectory and PPM heatmaps from traces");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        if (help) *help = true;
        return c;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        if (help) *help = true;
        return c;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    c.command = app.get_subcommands().front()->get_name();
    c.validate();
    return c;
}

namespace {

std::unique_ptr<DecisionBackend> make_backend(const RunConfig& c) {
    if (c.backend == "greedy") return std::make_unique<GreedyBackend>();
    ExternalBackendConfig e;
    e.endpoint = c.endpoint;
    e.protocol = wire_protocol_from_name(c.protocol);
    e.model = c.model;
    e.temperature = c.temperature;
    e.token_env = c.token_env;
    e.timeout_s = c.timeout;
    e.max_retries = c.retries;
    return std::make_unique<ExternalBackend>(e);
}

std::string lambda_tag(double l) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", l);
    return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write '" + path.string() + "'");
    out << bytes;
}

std::string step_name(int step, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%03d.%s", step, ext);
    return buf;
}

}  // namespace

int cmd_simulate(const RunConfig& c, bool write_traces, std::ostream& out, std::ostream& err) {
    if (c.scene.empty()) throw ConfigError("--scene is required");
    const Scene scene = load_scene(c.scene);
    std::vector<Episode> episodes;
    for (const auto& e : scene.episodes)
        if (c.episodes.empty() || std::find(c.episodes.begin(), c.episodes.end(), e.id) != c.episodes.end())
            episodes.push_back(e);
    if (episodes.empty()) throw ConfigError("no episodes match the filter");

    std::unique_ptr<WaypointSource> source;
    if (c.predictor.front() == "oracle")
        source = std::make_unique<OracleWaypointSource>();
    else
        source = std::make_unique<ToyPredictorSource>(load_params(c.predictor.front()), c.seed);

    EpisodeOptions opt;
    opt.max_steps = c.max_steps;
    opt.success_threshold = c.threshold;
    opt.backtrack_enabled = !c.no_backtrack;
    opt.attach_views = c.attach_views;

    const int n = static_cast<int>(episodes.size());
    std::vector<EpisodeTrace> traces(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for num_threads(c.workers) schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            auto backend = make_backend(c);
            traces[static_cast<std::size_t>(i)] = run_episode(scene.plan, episodes[static_cast<std::size_t>(i)], *backend, *source, opt);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<EpisodeMetrics> metrics;
    for (const auto& t : traces) metrics.push_back(evaluate_episode(t, scene.plan, c.threshold));
    const NavMetrics mean = aggregate(metrics, traces);

    const fs::path dir(c.out);
    fs::create_directories(dir);
    if (write_traces) {
        fs::create_directories(dir / "traces");
        for (const auto& t : traces) {
            save_trace((dir / "traces" / (t.episode_id + ".jsonl")).string(), t);
            const fs::path hdir = dir / "heatmaps" / t.episode_id;
            fs::create_directories(hdir);
            for (std::size_t s = 0; s < t.heatmaps.size(); ++s)
                save_heatmap((hdir / step_name(static_cast<int>(s) + 1, "phm")).string(), t.heatmaps[s]);
        }
    }
    {
        std::ostringstream jl;
        write_metrics_jsonl(jl, metrics);
        write_file(dir / "metrics.jsonl", jl.str());
        std::ostringstream csv;
        write_metrics_csv(csv, metrics, mean);
        write_file(dir / "metrics.csv", csv.str());
    }

    int aborted = 0;
    for (const auto& t : traces)
        if (t.aborted) {
            ++aborted;
            err << "episode " << t.episode_id << " aborted: " << t.abort_reason << "\n";
        }
    out << "episodes " << n << " tl " << format_number(mean.tl) << " ne " << format_number(mean.ne) << " osr "
        << format_number(mean.osr) << " sr " << format_number(mean.sr) << " spl " << format_number(mean.spl)
        << " collisions " << format_number(mean.collisions) << "\n";
    return aborted > 0 ? kExitBackend : kExitOk;
}

int cmd_train_toy(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.train_poses < 1) throw ConfigError("train-poses must be at least 1");
    const auto poses = make_pose_set(c.seed, c.train_poses, c.feature_dim);
    const auto samples = training_samples(poses);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    int status = kExitOk;
    for (double lambda : c.lambda_occ) {
        const std::string tag = lambda_tag(lambda);
        const fs::path params_path = dir / ("params_lambda_" + tag + ".twp");
        const fs::path loss_path = dir / ("loss_lambda_" + tag + ".csv");
        auto initial = ToyPredictorParams::initialise(c.feature_dim, c.seed, c.lr);
        TrainResult result;
        try {
            result = train_toy(samples, lambda, c.epochs, initial);
        } catch (const TrainingError& e) {
            err << "lambda " << tag << ": " << e.what() << "; partial results saved\n";
            result = e.partial();
            status = kExitFailure;
        }
        save_params(params_path.string(), result.params);
        std::ostringstream csv;
        write_loss_csv(csv, result.curve);
        write_file(loss_path, csv.str());
        char buf[128];
        std::snprintf(buf, sizeof buf, "lambda %s final l_total %.12g l_vis %.12g l_occ %.12g\n", tag.c_str(),
                      result.curve.back().l_total, result.curve.back().l_vis, result.curve.back().l_occ);
        out << buf;
    }
    return status;
}

int cmd_eval_waypoints(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.poses < 1) throw ConfigError("empty pose set: --poses must be at least 1");
    // Held-out stream: differs from the train-toy stream for the same --seed.
    const std::uint64_t eval_seed = c.seed ^ 0x5EED0000C0FFEEULL;
    const fs::path dir(c.out);
    fs::create_directories(dir);

    std::vector<double> pct;
    for (const auto& name : c.predictor) {
        WaypointEval e;
        std::string label;
        if (name == "oracle") {
            e = evaluate_oracle(make_pose_set(eval_seed, c.poses, c.feature_dim));
            label = "oracle";
        } else {
            const ToyPredictorParams params = load_params(name);
            e = evaluate_predictor(params, make_pose_set(eval_seed, c.poses, params.feature_dim));
            label = fs::path(name).stem().string();
        }
        std::ostringstream csv;
        write_waypoint_csv(csv, e.rows, e.mean);
        write_file(dir / ("waypoints_" + label + ".csv"), csv.str());
        pct.push_back(e.mean.pct_open.value_or(0.0));
        out << label << " delta " << format_number(e.mean.delta) << " pct_open "
            << (e.mean.pct_open ? format_number(*e.mean.pct_open) : "n/a") << " d_c "
            << (e.mean.d_c ? format_number(*e.mean.d_c) : "n/a") << " d_h "
            << (e.mean.d_h ? format_number(*e.mean.d_h) : "n/a") << " s_way "
            << (e.mean.s_way ? format_number(*e.mean.s_way) : "n/a") << "\n";
    }
    if (pct.size() == 2) out << "pct_open delta " << format_number(pct[1] - pct[0]) << "\n";
    return kExitOk;
}

int cmd_render(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.scene.empty()) throw ConfigError("--scene is required");
    if (c.traces.empty()) throw ConfigError("--trace is required");
    const Scene scene = load_scene(c.scene);
    std::vector<EpisodeTrace> traces;
    for (const auto& p : c.traces) traces.push_back(load_trace(p));
    const fs::path dir(c.out);
    fs::create_directories(dir);
    write_file(dir / "trajectory.svg", render_trajectory_svg(scene.plan, traces));
    int images = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        fs::path hdir = c.heatmaps.empty() ? fs::path(c.traces[i]).parent_path().parent_path() / "heatmaps" / t.episode_id
                                           : fs::path(c.heatmaps);
        if (!fs::is_directory(hdir)) continue;
        for (const auto& s : t.steps) {
            const fs::path phm = hdir / step_name(s.step, "phm");
            if (!fs::exists(phm)) continue;
            const RgbImage img = render_heatmap_image(load_heatmap(phm.string()), s.waypoints);
            write_file(dir / (t.episode_id + "_" + step_name(s.step, "ppm")), encode_ppm(img));
            ++images;
        }
    }
    out << "wrote trajectory.svg and " << images << " heatmap images to " << dir.string() << "\n";
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        bool help = false;
        c = parse_args(argc, argv, out, &help);
        if (help) return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        if (c.command == "simulate") return cmd_simulate(c, true, out, err);
        if (c.command == "eval-nav") return cmd_simulate(c, false, out, err);
        if (c.command == "train-toy") return cmd_train_toy(c, out, err);
        if (c.command == "eval-waypoints") return cmd_eval_waypoints(c, out, err);
        if (c.command == "render") return cmd_render(c, out, err);
        err << "unknown command '" << c.command << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace waynav
