#pragma once

// Subcommand dispatch for the esg-lab tool. Exit codes: 0 success,
// 1 domain error (bad input data, infeasible problem), 2 usage error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esglab/config.hpp"
#include "esglab/report_io.hpp"
#include "esglab/stability.hpp"
#include "esglab/tree.hpp"

namespace esglab {

// Option combinations CLI11 cannot express (e.g. conditionally required
// flags); reported like any other usage mistake.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::size_t thread_cap_from_env() {
    const char* v = std::getenv("ESG_LAB_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long parsed = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || parsed < 1)
        throw DomainError("ESG_LAB_THREADS must be a positive integer, got '" + std::string(v) +
                          "'");
    return static_cast<std::size_t>(parsed);
}

inline std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (tok.empty() || end == tok.c_str() || *end != '\0')
            throw DomainError(what + ": expected a comma-separated integer list, got '" + text +
                              "'");
        out.push_back(static_cast<std::size_t>(v));
        pos = comma + 1;
    }
    return out;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline Json model_to_json(const AssetModel& model) {
    Json j;
    j["assets"] = model.names;
    Json m;
    m["mu"] = model.mu;
    m["sigma"] = model.sigma;
    std::vector<std::vector<double>> corr_rows;
    for (std::size_t i = 0; i < model.size(); ++i) {
        std::vector<double> row(model.size());
        for (std::size_t k = 0; k < model.size(); ++k) row[k] = model.corr(i, k);
        corr_rows.push_back(std::move(row));
    }
    m["corr"] = corr_rows;
    j["model"] = m;
    return j;
}

inline void run_calibrate(const std::string& data_path, std::size_t periods_per_year,
                          std::ostream& out) {
    const AssetModel model = calibrate(load_history(data_path), periods_per_year);
    out << model_to_json(model).dump(2) << '\n';
}

inline void run_generate(const std::string& config_path, std::size_t n_paths,
                         const std::filesystem::path& out_dir, std::ostream& out) {
    const Stopwatch total;
    const LoadedConfig loaded = parse_config(config_path);
    const ExperimentConfig& cfg = loaded.experiment;
    if (n_paths < 1) throw DomainError("generate: --paths must be >= 1");

    const ScenarioSet set = generate_set(cfg, n_paths, cfg.master_seed, cfg.antithetic);
    std::filesystem::create_directories(out_dir);
    write_scenarios_csv(set, cfg.model.names, out_dir / "scenarios.csv");

    RunManifest manifest;
    manifest.command = "generate";
    manifest.config_echo = loaded.echo;
    manifest.master_seed = cfg.master_seed;
    manifest.outputs = {"scenarios.csv"};
    manifest.timings_ms.emplace_back("total", total.ms());
    write_manifest(manifest, out_dir);
    out << "wrote " << (out_dir / "scenarios.csv").string() << " (" << set.n_paths << " paths, "
        << set.method << ")\n";
}

inline void run_tree(const std::string& branching_text, bool count_only,
                     const std::string& config_path, const std::filesystem::path& out_dir,
                     std::size_t max_nodes, std::ostream& out) {
    const BranchingVector branching =
        validate_branching(parse_size_list(branching_text, "--branching"));
    if (count_only) {
        out << count_nodes(branching) << '\n';
        return;
    }
    if (config_path.empty()) throw UsageError("tree: --config is required unless --count-only");

    const Stopwatch total;
    const LoadedConfig loaded = parse_config(config_path);
    const ExperimentConfig& cfg = loaded.experiment;
    const ScenarioTree tree =
        build_tree(cfg.model, branching, cfg.dt, cfg.master_seed, max_nodes);
    std::filesystem::create_directories(out_dir);
    write_tree_csv(tree, cfg.model.names, out_dir / "tree.csv");

    RunManifest manifest;
    manifest.command = "tree";
    manifest.config_echo = loaded.echo;
    manifest.master_seed = cfg.master_seed;
    manifest.outputs = {"tree.csv"};
    manifest.timings_ms.emplace_back("total", total.ms());
    write_manifest(manifest, out_dir);
    out << "wrote " << (out_dir / "tree.csv").string() << " (" << tree.nodes.size() << " nodes, "
        << count_leaves(branching) << " leaves)\n";
}

inline void run_optimize(const std::string& config_path, std::size_t n_paths,
                         const std::filesystem::path& out_dir, std::ostream& out) {
    const Stopwatch total;
    const LoadedConfig loaded = parse_config(config_path);
    const ExperimentConfig& cfg = loaded.experiment;
    if (n_paths < 2) throw DomainError("optimize: --paths must be >= 2");

    const ScenarioSet set = generate_set(cfg, n_paths, cfg.master_seed, cfg.antithetic);
    const OptimizationOutcome outcome = solve_grid(set, cfg.spec);
    if (!outcome.feasible())
        throw DomainError("optimize: no grid allocation meets the expected-return floor " +
                          format_number(cfg.spec.m0));

    Json j;
    j["objective"] = outcome.objective;
    j["expected"] = outcome.expected;
    j["feasible_count"] = outcome.feasible_count;
    Json weights;
    for (std::size_t i = 0; i < cfg.model.size(); ++i)
        weights[cfg.model.names[i]] = outcome.best->weights[i];
    j["weights"] = weights;
    out << j.dump(2) << '\n';

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto csv = detail::open_output(out_dir / "solution.csv");
        csv << "asset,weight\n";
        for (std::size_t i = 0; i < cfg.model.size(); ++i)
            csv << cfg.model.names[i] << ',' << format_number(outcome.best->weights[i]) << '\n';
        csv.close();

        RunManifest manifest;
        manifest.command = "optimize";
        manifest.config_echo = loaded.echo;
        manifest.master_seed = cfg.master_seed;
        manifest.outputs = {"solution.csv"};
        manifest.timings_ms.emplace_back("total", total.ms());
        write_manifest(manifest, out_dir);
    }
}

inline void run_stability(const std::string& config_path, const std::filesystem::path& out_dir,
                          std::size_t n_threads, std::ostream& out) {
    const Stopwatch total;
    const LoadedConfig loaded = parse_config(config_path);
    const ExperimentConfig& cfg = loaded.experiment;
    if (n_threads == 0) n_threads = thread_cap_from_env();

    const Stopwatch sweep;
    const StabilityReport report = run_replications(cfg, n_threads);
    const double sweep_ms = sweep.ms();

    std::filesystem::create_directories(out_dir);
    write_objectives_csv(report, out_dir / "objectives.csv");
    write_weights_csv(report, cfg.model.names, out_dir / "weights.csv");
    write_internal_stats_csv(report, out_dir / "internal_stats.csv");
    write_external_stats_csv(report, out_dir / "external_stats.csv");
    write_bias_csv(report, out_dir / "bias.csv");

    RunManifest manifest;
    manifest.command = "stability";
    manifest.config_echo = loaded.echo;
    manifest.master_seed = cfg.master_seed;
    manifest.outputs = {"objectives.csv", "weights.csv", "internal_stats.csv",
                        "external_stats.csv", "bias.csv"};
    manifest.timings_ms.emplace_back("replications", sweep_ms);
    manifest.timings_ms.emplace_back("total", total.ms());
    write_manifest(manifest, out_dir);

    out << "reference objective " << format_number(report.reference_objective) << '\n';
    for (const auto& s : report.sizes)
        out << "size " << s.size << ": internal std " << format_number(s.internal.std_dev)
            << ", external range " << format_number(s.external_dispersion) << ", mean e_f "
            << format_number(s.mean_bias) << '\n';
}

inline void run_quadratic_demo(double mean, double var, const std::string& sizes_text,
                               std::size_t replications, std::uint64_t seed,
                               const std::filesystem::path& out_dir, std::ostream& out) {
    const Stopwatch total;
    const std::vector<std::size_t> sizes = parse_size_list(sizes_text, "--sizes");
    const QuadraticDemoReport report =
        quadratic_stability_demo(mean, var, sizes, replications, seed);

    static const char* kModeNames[3] = {"plain", "match-mean", "match-variance"};
    for (std::size_t mi = 0; mi < report.cells.size(); ++mi)
        for (const auto& cell : report.cells[mi])
            out << kModeNames[mi] << " size " << cell.size << ": f_star std "
                << format_number(cell.f_stats.std_dev) << ", mean e_f "
                << format_number(cell.mean_e_f) << '\n';

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_quadratic_demo_csv(report, out_dir / "quadratic_demo.csv");
        RunManifest manifest;
        manifest.command = "quadratic-demo";
        manifest.master_seed = seed;
        manifest.config_echo = Json::object();
        manifest.outputs = {"quadratic_demo.csv"};
        manifest.timings_ms.emplace_back("total", total.ms());
        write_manifest(manifest, out_dir);
    }
}

}  // namespace detail

inline int command_dispatch(int argc, const char* const* argv) {
    CLI::App app{"Scenario-generation laboratory for asset allocation studies"};
    app.require_subcommand(1);

    auto* cal = app.add_subcommand("calibrate", "Fit a return model from a price history CSV");
    std::string cal_data;
    std::size_t cal_ppy = 1;
    cal->add_option("--data", cal_data, "price history CSV")->required();
    cal->add_option("--periods-per-year", cal_ppy, "observation frequency (12 = monthly)");

    auto* gen = app.add_subcommand("generate", "Write one scenario set as CSV");
    std::string gen_config, gen_out;
    std::size_t gen_paths = 1000;
    gen->add_option("--config", gen_config, "experiment config JSON")->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--paths", gen_paths, "number of paths");

    auto* tre = app.add_subcommand("tree", "Build a scenario tree (or just count its nodes)");
    std::string tre_branching, tre_config, tre_out = "tree-out";
    bool tre_count_only = false;
    std::size_t tre_max_nodes = kDefaultMaxTreeNodes;
    tre->add_option("--branching", tre_branching, "children per level, e.g. 5,3,3,2")->required();
    tre->add_flag("--count-only", tre_count_only, "print the node count and exit");
    tre->add_option("--config", tre_config, "experiment config JSON");
    tre->add_option("--out", tre_out, "output directory");
    tre->add_option("--max-nodes", tre_max_nodes, "refuse larger trees");

    auto* opt = app.add_subcommand("optimize", "Solve the grid problem on one scenario set");
    std::string opt_config, opt_out;
    std::size_t opt_paths = 10000;
    opt->add_option("--config", opt_config, "experiment config JSON")->required();
    opt->add_option("--paths", opt_paths, "number of paths");
    opt->add_option("--out", opt_out, "output directory (optional)");

    auto* sta = app.add_subcommand("stability", "Run the replication experiment");
    std::string sta_config, sta_out;
    std::size_t sta_threads = 0;
    sta->add_option("--config", sta_config, "experiment config JSON")->required();
    sta->add_option("--out", sta_out, "output directory")->required();
    sta->add_option("--threads", sta_threads, "worker cap (default: ESG_LAB_THREADS or all cores)");

    auto* qua = app.add_subcommand("quadratic-demo", "One-dimensional stability illustration");
    double qua_mean = 0.0, qua_var = 1.0;
    std::string qua_sizes = "50,1000,5000,10000", qua_out;
    std::size_t qua_reps = 30;
    std::uint64_t qua_seed = 12345;
    qua->add_option("--mean", qua_mean, "distribution mean");
    qua->add_option("--var", qua_var, "distribution variance");
    qua->add_option("--sizes", qua_sizes, "sample sizes, comma separated");
    qua->add_option("--replications", qua_reps, "replications per size");
    qua->add_option("--seed", qua_seed, "master seed");
    qua->add_option("--out", qua_out, "output directory (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cal->parsed()) {
            detail::run_calibrate(cal_data, cal_ppy, std::cout);
        } else if (gen->parsed()) {
            detail::run_generate(gen_config, gen_paths, gen_out, std::cout);
        } else if (tre->parsed()) {
            detail::run_tree(tre_branching, tre_count_only, tre_config, tre_out, tre_max_nodes,
                             std::cout);
        } else if (opt->parsed()) {
            detail::run_optimize(opt_config, opt_paths, opt_out, std::cout);
        } else if (sta->parsed()) {
            detail::run_stability(sta_config, sta_out, sta_threads, std::cout);
        } else if (qua->parsed()) {
            detail::run_quadratic_demo(qua_mean, qua_var, qua_sizes, qua_reps, qua_seed, qua_out,
                                       std::cout);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace esglab
