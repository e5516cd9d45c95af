// mincusum: experiment runner for the min-CuSum change-diagnosis procedure.
//
// Exit codes: 0 success, 1 validation error, 2 verification failure, 3 runtime fault.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mincusum/checks.hpp"
#include "mincusum/io/config.hpp"
#include "mincusum/io/csv.hpp"
#include "mincusum/io/output.hpp"
#include "mincusum/parallel.hpp"
#include "mincusum/studies.hpp"

namespace fs = std::filesystem;
using namespace mincusum;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kValidation = 1, kVerification = 2, kRuntime = 3 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> horizon;
    std::size_t workers = default_workers();
    std::optional<std::string> out_dir;
};

// flag > MINCUSUM_OUT_DIR > config
void apply(const Overrides& o, StudyConfig& cfg) {
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.paths) cfg.sim.paths = *o.paths;
    if (o.horizon) cfg.sim.horizon = *o.horizon;
    cfg.sim.workers = o.workers;
    if (o.out_dir)
        cfg.out_dir = *o.out_dir;
    else if (const char* env = std::getenv("MINCUSUM_OUT_DIR"); env && *env)
        cfg.out_dir = env;
    validate(cfg);
}

ordered_json manifest_head(const std::string& command, const StudyConfig& cfg) {
    ordered_json m;
    m["tool"] = "mincusum";
    m["version"] = MINCUSUM_VERSION;
    m["command"] = command;
    m["seed"] = cfg.sim.seed;
    m["config"] = io::to_json(cfg);
    return m;
}

void finish(io::OutputSession& session, const StudyConfig& cfg, const std::string& command,
            const ordered_json& extra = {}) {
    ordered_json m = manifest_head(command, cfg);
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    // one manifest per result file: <name>.manifest.json
    fs::path manifest = session.files().front().path;
    manifest.replace_extension(".manifest.json");
    session.write_manifest(manifest, m);
    session.commit();
    for (const auto& f : session.files()) std::cout << f.path << "  " << f.sha256 << "\n";
    std::cout << manifest.string() << "\n";
}

int study(StudyConfig cfg, const Overrides& o, const std::string& command) {
    apply(o, cfg);
    io::OutputSession session;
    const auto rows = run_study(cfg, ConstantOptions{.seed = cfg.sim.seed});
    session.write(fs::path(cfg.out_dir) / (cfg.prefix + "_results.csv"), results_csv(rows));
    finish(session, cfg, command);
    return kOk;
}

int bounds(StudyConfig cfg, const Overrides& o) {
    apply(o, cfg);
    const HypothesisSet hs = cfg.scenario.build();
    const bool positive_nu =
        std::any_of(cfg.change_points.begin(), cfg.change_points.end(), [](std::size_t n) { return n >= 1; });
    io::OutputSession session;
    const auto rows = bounds_table(hs, cfg.thresholds, cfg.alphas, positive_nu, ConstantOptions{.seed = cfg.sim.seed});
    session.write(fs::path(cfg.out_dir) / (cfg.prefix + "_bounds.csv"), bounds_csv(rows));
    finish(session, cfg, "bounds");
    return kOk;
}

int trace(StudyConfig cfg, const Overrides& o, std::optional<double> threshold, std::size_t length) {
    if (o.horizon) length = *o.horizon;
    apply(o, cfg);
    const HypothesisSet hs = cfg.scenario.build();
    std::optional<std::size_t> j;
    if (cfg.true_hypothesis) j = resolve_label(hs, *cfg.true_hypothesis, "experiment.true_hypothesis");
    const std::size_t nu = cfg.change_points.front();
    const double b = threshold.value_or(cfg.thresholds.back());
    if (!(b > 0.0)) throw ConfigError("--threshold", "must be positive");
    if (length < 1) throw ConfigError("--length", "must be at least one step");

    RandomStream rng(derive_seed(cfg.sim.seed, 0x7ace, 0));
    const DiagnosisResult r = simulate_path(hs, j, nu, b, rng, length, true);

    std::ostringstream os;
    io::CsvWriter w(os);
    std::vector<std::string> head{"n"};
    for (const auto& l : hs.labels()) head.push_back("Y_" + l);
    w.row(head);
    for (std::size_t n = 0; n < r.trace.size(); ++n) {
        std::vector<std::string> row{std::to_string(n + 1)};
        for (double y : r.trace[n]) row.push_back(io::format_double(y));
        w.row(row);
    }
    io::OutputSession session;
    session.write(fs::path(cfg.out_dir) / (cfg.prefix + "_trace.csv"), os.str());
    ordered_json extra;
    extra["trace"] = {{"threshold", b},
                      {"nu", nu},
                      {"stop_time", r.stop_time},
                      {"decision", r.truncated ? std::string() : hs.label(r.decision)},
                      {"truncated", r.truncated}};
    finish(session, cfg, "trace", extra);
    return kOk;
}

int verify(const std::string& name, const Overrides& o) {
    const auto ids = checks::suite(name);
    if (ids.empty()) throw ConfigError("suite", "unknown suite '" + name + "'");
    checks::CheckOptions opt;
    if (o.seed) opt.seed = *o.seed;
    opt.workers = o.workers;
    int failed = 0;
    for (const auto& [id, fn] : checks::all_checks()) {
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
        const auto r = fn(opt);
        std::cout << checks::report_line(r) << std::endl;
        for (const auto& f : r.failures) std::cout << "    " << f << "\n";
        failed += !r.passed;
    }
    std::cout << "suite " << name << ": " << (failed ? std::to_string(failed) + " failed" : std::string("passed"))
              << std::endl;
    return failed ? kVerification : kOk;
}

StudyConfig config_or_figure(const std::string& config_path, const std::string& figure) {
    if (!config_path.empty() && !figure.empty()) throw ConfigError("--config", "give either --config or --figure");
    if (!figure.empty()) return figure_study(figure);
    if (config_path.empty()) throw ConfigError("--config", "required");
    return io::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"min-CuSum sequential change diagnosis: studies, bounds and verification"};
    app.set_version_flag("--version", std::string(MINCUSUM_VERSION));
    app.require_subcommand(1);

    Overrides o;
    std::uint64_t seed = 0;
    std::size_t paths = 0, horizon = 0;
    std::string out_dir;
    auto common = [&](CLI::App* sub, bool sim) {
        sub->add_option("--seed", seed, "Master seed")->check(CLI::NonNegativeNumber);
        if (sim) {
            sub->add_option("--paths", paths, "Monte Carlo paths per estimate")->check(CLI::PositiveNumber);
            sub->add_option("--horizon", horizon, "Step cap per path")->check(CLI::PositiveNumber);
        }
        sub->add_option("--workers", o.workers, "Worker threads (default: hardware parallelism)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", out_dir, "Output directory (env MINCUSUM_OUT_DIR)");
    };

    std::string config_path, figure, suite_name;
    std::optional<double> threshold;
    std::size_t length = 1000;

    auto* run_cmd = app.add_subcommand("run", "Run the study described by a config file");
    run_cmd->add_option("--config", config_path, "Config file (JSON)")->required();
    common(run_cmd, true);

    auto* repro = app.add_subcommand("reproduce", "Run a built-in figure study");
    repro->add_option("figure", figure, "fig2, fig3 or fig4")->required()->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
    common(repro, true);

    auto* bounds_cmd = app.add_subcommand("bounds", "Tabulate KL numbers, roots, constants and bound curves");
    bounds_cmd->add_option("--config", config_path, "Config file (JSON)")->required();
    common(bounds_cmd, false);

    auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
    verify_cmd->add_option("suite", suite_name, "all, engine, bounds, oracle, tail (alias condition34), studies")
        ->required()
        ->check(CLI::IsMember({"all", "engine", "bounds", "oracle", "tail", "condition34", "studies"}));
    verify_cmd->add_option("--seed", seed, "Master seed")->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* trace_cmd = app.add_subcommand("trace", "Export Y_i(n) of one simulated path as CSV");
    trace_cmd->add_option("--config", config_path, "Config file (JSON)");
    trace_cmd->add_option("--figure", figure, "Use a built-in study instead of a config")
        ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
    trace_cmd->add_option("--threshold", threshold, "Stop threshold b (default: largest grid value)");
    trace_cmd->add_option("--length", length, "Maximum path length");
    common(trace_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed")) o.seed = seed;
        if (sub->get_option_no_throw("--paths") && sub->count("--paths")) o.paths = paths;
        if (sub->get_option_no_throw("--horizon") && sub->count("--horizon")) o.horizon = horizon;
        if (sub->get_option_no_throw("--out-dir") && sub->count("--out-dir")) o.out_dir = out_dir;
    }

    try {
        if (run_cmd->parsed()) return study(io::load_config(config_path), o, "run");
        if (repro->parsed()) return study(figure_study(figure), o, "reproduce " + figure);
        if (bounds_cmd->parsed()) return bounds(io::load_config(config_path), o);
        if (verify_cmd->parsed()) return verify(suite_name, o);
        if (trace_cmd->parsed()) return trace(config_or_figure(config_path, figure), o, threshold, length);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return kRuntime;
    }
    return kValidation;
}
