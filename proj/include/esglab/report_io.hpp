#pragma once

// File output. Every number is written in its shortest round-trip decimal
// form, so files are byte-stable across runs and lossless to re-read.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "esglab/stability.hpp"
#include "esglab/types.hpp"
#include "esglab/version.hpp"

namespace esglab {

inline std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no \r\n surprises
    if (!out) throw DomainError("cannot open output file: " + path.string());
    return out;
}

}  // namespace detail

// size,replication,objective,expected,feasible — infeasible replications
// keep their row with empty value cells.
inline void write_objectives_csv(const StabilityReport& report,
                                 const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "size,replication,objective,expected,feasible\n";
    for (const auto& r : report.replications) {
        out << r.size << ',' << r.replication << ',';
        if (r.feasible)
            out << format_number(r.objective) << ',' << format_number(r.expected) << ",1\n";
        else
            out << ",,0\n";
    }
}

inline void write_weights_csv(const StabilityReport& report, const std::vector<std::string>& assets,
                              const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "size,replication,asset,weight\n";
    for (const auto& r : report.replications) {
        if (!r.feasible) continue;
        for (std::size_t i = 0; i < assets.size(); ++i)
            out << r.size << ',' << r.replication << ',' << assets[i] << ','
                << format_number(r.best.weights[i]) << '\n';
    }
}

namespace detail {

inline void write_stats_csv(const StabilityReport& report, bool external,
                            const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "size,mean,std,min,q25,q50,q75,max\n";
    for (const auto& s : report.sizes) {
        const SummaryStats& st = external ? s.external : s.internal;
        out << s.size << ',' << format_number(st.mean) << ',' << format_number(st.std_dev) << ','
            << format_number(st.min) << ',' << format_number(st.q25) << ','
            << format_number(st.q50) << ',' << format_number(st.q75) << ','
            << format_number(st.max) << '\n';
    }
}

}  // namespace detail

inline void write_internal_stats_csv(const StabilityReport& report,
                                     const std::filesystem::path& path) {
    detail::write_stats_csv(report, false, path);
}

inline void write_external_stats_csv(const StabilityReport& report,
                                     const std::filesystem::path& path) {
    detail::write_stats_csv(report, true, path);
}

inline void write_bias_csv(const StabilityReport& report, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "size,replication,e_f\n";
    for (const auto& r : report.replications) {
        if (!r.feasible) continue;
        out << r.size << ',' << r.replication << ',' << format_number(r.bias) << '\n';
    }
}

// One row per (path, period), assets as columns.
inline void write_scenarios_csv(const ScenarioSet& set, const std::vector<std::string>& assets,
                                const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "path,period";
    for (const auto& a : assets) out << ',' << a;
    out << '\n';
    for (std::size_t p = 0; p < set.n_paths; ++p)
        for (std::size_t t = 0; t < set.n_periods; ++t) {
            out << p + 1 << ',' << t + 1;
            for (std::size_t i = 0; i < set.n_assets; ++i)
                out << ',' << format_number(set.at(p, t, i));
            out << '\n';
        }
}

// Breadth-order dump; the root has an empty parent cell.
inline void write_tree_csv(const ScenarioTree& tree, const std::vector<std::string>& assets,
                           const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "node,parent,depth,prob";
    for (const auto& a : assets) out << ',' << a;
    out << '\n';
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const TreeNode& node = tree.nodes[k];
        out << k << ',';
        if (node.parent) out << *node.parent;
        out << ',' << node.depth << ',' << format_number(node.prob);
        for (std::size_t i = 0; i < tree.n_assets; ++i)
            out << ',' << (node.depth == 0 ? "" : format_number(node.values[i]));
        out << '\n';
    }
}

inline void write_quadratic_demo_csv(const QuadraticDemoReport& report,
                                     const std::filesystem::path& path) {
    static const char* kModeNames[3] = {"plain", "match-mean", "match-variance"};
    auto out = detail::open_output(path);
    out << "mode,size,replication,x_star,f_star,e_f\n";
    for (std::size_t mi = 0; mi < report.cells.size(); ++mi)
        for (const auto& cell : report.cells[mi])
            for (std::size_t r = 0; r < cell.x_star.size(); ++r)
                out << kModeNames[mi] << ',' << cell.size << ',' << r + 1 << ','
                    << format_number(cell.x_star[r]) << ',' << format_number(cell.f_star[r]) << ','
                    << format_number(cell.e_f[r]) << '\n';
}

struct RunManifest {
    std::string command;
    nlohmann::ordered_json config_echo;
    std::uint64_t master_seed{0};
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<std::string> outputs;  // filenames relative to the output dir
};

inline void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    nlohmann::ordered_json j;
    j["tool"] = "esg-lab";
    j["version"] = kVersion;
    j["command"] = manifest.command;
    j["master_seed"] = manifest.master_seed;
    j["config"] = manifest.config_echo;
    nlohmann::ordered_json timings;
    for (const auto& [name, ms] : manifest.timings_ms) timings[name] = ms;
    j["timings_ms"] = timings;
    j["outputs"] = manifest.outputs;
    for (const auto& name : manifest.outputs)
        if (!std::filesystem::exists(dir / name))
            throw DomainError("manifest lists missing output: " + name);
    auto out = detail::open_output(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

}  // namespace esglab
