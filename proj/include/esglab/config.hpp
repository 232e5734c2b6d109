#pragma once

// Experiment configuration files: strict JSON, unknown keys rejected,
// every diagnostic carries the offending field path. The model block is
// either inline numbers or a pointer at a price-history CSV to calibrate
// from (paths resolve relative to the config file).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "esglab/calibration.hpp"
#include "esglab/stability.hpp"
#include "esglab/types.hpp"

namespace esglab {

using Json = nlohmann::ordered_json;

struct LoadedConfig {
    ExperimentConfig experiment;
    std::string model_source;  // "inline" or the calibration CSV path
    Json echo;                 // normalized effective config, for the manifest
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
    throw DomainError("config: " + path + ": " + what);
}

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                                const std::string& path) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            config_error(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
}

inline double number_field(const Json& obj, const std::string& key, const std::string& path,
                           double fallback, bool* present = nullptr) {
    if (!obj.contains(key)) {
        if (present) *present = false;
        return fallback;
    }
    if (present) *present = true;
    const Json& v = obj.at(key);
    if (!v.is_number()) config_error(path + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(path + key, "must be finite");
    return d;
}

inline std::uint64_t uint_field(const Json& obj, const std::string& key, const std::string& path,
                                std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    config_error(path + key, "expected a non-negative integer");
}

inline bool bool_field(const Json& obj, const std::string& key, const std::string& path,
                       bool fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_boolean()) config_error(path + key, "expected true or false");
    return v.get<bool>();
}

inline std::vector<double> number_array(const Json& v, const std::string& path) {
    if (!v.is_array()) config_error(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) config_error(path + "[" + std::to_string(i) + "]", "expected a number");
        const double d = v[i].get<double>();
        if (!std::isfinite(d)) config_error(path + "[" + std::to_string(i) + "]", "must be finite");
        out.push_back(d);
    }
    return out;
}

inline Matrix matrix_field(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) config_error(path, "expected an array of number arrays");
    const std::size_t n = v.size();
    Matrix m(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = number_array(v[i], path + "[" + std::to_string(i) + "]");
        if (i == 0) {
            m = Matrix(n, row.size());
        } else if (row.size() != m.cols) {
            config_error(path + "[" + std::to_string(i) + "]", "ragged row");
        }
        for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = row[j];
    }
    return m;
}

}  // namespace detail

inline LoadedConfig parse_config_json(const Json& root, const std::filesystem::path& base_dir) {
    using detail::config_error;
    if (!root.is_object()) config_error("", "top level must be an object");
    detail::reject_unknown_keys(
        root,
        {"assets", "model", "m0", "step", "sizes", "replications", "master_seed",
         "reference_size", "dt", "n_periods", "method", "antithetic", "moment_match"},
        "");

    LoadedConfig out;
    ExperimentConfig& cfg = out.experiment;

    std::vector<std::string> asset_names;
    if (root.contains("assets")) {
        const Json& a = root.at("assets");
        if (!a.is_array()) config_error("assets", "expected an array of strings");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!a[i].is_string())
                config_error("assets[" + std::to_string(i) + "]", "expected a string");
            asset_names.push_back(a[i].get<std::string>());
        }
    }

    if (!root.contains("model")) config_error("model", "missing");
    const Json& model = root.at("model");
    if (!model.is_object()) config_error("model", "expected an object");

    if (model.contains("calibrate")) {
        detail::reject_unknown_keys(model, {"calibrate", "periods_per_year"}, "model");
        if (!model.at("calibrate").is_string()) config_error("model.calibrate", "expected a path string");
        const std::uint64_t ppy = detail::uint_field(model, "periods_per_year", "model.", 0);
        if (ppy < 1) config_error("model.periods_per_year", "required, a positive integer");

        std::filesystem::path csv(model.at("calibrate").get<std::string>());
        if (csv.is_relative()) csv = base_dir / csv;
        const PriceHistory history = load_history(csv.string());
        cfg.hist_returns = to_returns(history);
        std::vector<std::string> names = history.names;
        if (!asset_names.empty()) {
            if (asset_names.size() != names.size())
                config_error("assets", "length does not match the history's " +
                                           std::to_string(names.size()) + " columns");
            names = asset_names;
        }
        cfg.model = calibrate(cfg.hist_returns, static_cast<std::size_t>(ppy), names);
        out.model_source = model.at("calibrate").get<std::string>();
    } else {
        detail::reject_unknown_keys(model, {"mu", "sigma", "corr"}, "model");
        for (const char* key : {"mu", "sigma", "corr"})
            if (!model.contains(key)) config_error(std::string("model.") + key, "missing");
        const auto mu = detail::number_array(model.at("mu"), "model.mu");
        const auto sigma = detail::number_array(model.at("sigma"), "model.sigma");
        const Matrix corr = detail::matrix_field(model.at("corr"), "model.corr");
        if (asset_names.empty())
            config_error("assets", "required when the model is inline");
        cfg.model = validate_asset_model(asset_names, mu, sigma, corr);
        out.model_source = "inline";
    }

    cfg.spec.m0 = detail::number_field(root, "m0", "", 0.04);
    cfg.spec.step = detail::number_field(root, "step", "", 0.05);
    if (cfg.spec.step <= 0.0 || cfg.spec.step > 1.0) config_error("step", "must be in (0, 1]");

    if (root.contains("sizes")) {
        const Json& s = root.at("sizes");
        if (!s.is_array() || s.empty()) config_error("sizes", "expected a non-empty integer array");
        cfg.sizes.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string path = "sizes[" + std::to_string(i) + "]";
            if (!s[i].is_number_integer() && !s[i].is_number_unsigned())
                config_error(path, "expected an integer");
            const auto v = s[i].get<std::int64_t>();
            if (v < 2) config_error(path, "must be >= 2");
            cfg.sizes.push_back(static_cast<std::size_t>(v));
        }
    }
    cfg.replications =
        static_cast<std::size_t>(detail::uint_field(root, "replications", "", cfg.replications));
    cfg.master_seed = detail::uint_field(root, "master_seed", "", 0);
    cfg.reference_size = static_cast<std::size_t>(
        detail::uint_field(root, "reference_size", "", cfg.reference_size));
    cfg.dt = detail::number_field(root, "dt", "", 1.0);
    cfg.n_periods = static_cast<std::size_t>(detail::uint_field(root, "n_periods", "", 1));

    if (root.contains("method")) {
        if (!root.at("method").is_string()) config_error("method", "expected a string");
        cfg.method = method_from_name(root.at("method").get<std::string>());
    }
    cfg.antithetic = detail::bool_field(root, "antithetic", "", false);
    cfg.moment_match = detail::bool_field(root, "moment_match", "", false);

    validate_experiment_config(cfg);

    Json echo;
    echo["assets"] = cfg.model.names;
    Json model_echo;
    model_echo["source"] = out.model_source;
    model_echo["mu"] = cfg.model.mu;
    model_echo["sigma"] = cfg.model.sigma;
    std::vector<std::vector<double>> corr_rows;
    for (std::size_t i = 0; i < cfg.model.size(); ++i) {
        std::vector<double> row(cfg.model.size());
        for (std::size_t j = 0; j < cfg.model.size(); ++j) row[j] = cfg.model.corr(i, j);
        corr_rows.push_back(std::move(row));
    }
    model_echo["corr"] = corr_rows;
    echo["model"] = model_echo;
    echo["m0"] = cfg.spec.m0;
    echo["step"] = cfg.spec.step;
    echo["sizes"] = cfg.sizes;
    echo["replications"] = cfg.replications;
    echo["master_seed"] = cfg.master_seed;
    echo["reference_size"] = cfg.reference_size;
    echo["dt"] = cfg.dt;
    echo["n_periods"] = cfg.n_periods;
    echo["method"] = method_name(cfg.method);
    echo["antithetic"] = cfg.antithetic;
    echo["moment_match"] = cfg.moment_match;
    out.echo = std::move(echo);
    return out;
}

inline LoadedConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file: " + path);
    Json root;
    try {
        root = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError("config: " + path + ": " + e.what());
    }
    return parse_config_json(root, std::filesystem::path(path).parent_path());
}

}  // namespace esglab
