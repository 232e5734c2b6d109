#pragma once

// Decision-quality diagnostics for a generator: run K replications at
// each scenario-set size, collect the optimal objective values and
// solutions, re-evaluate every solution on one large reference set (the
// stand-in for the unknown true distribution), and report
//   - internal stability: dispersion of optimal objectives per size,
//   - external stability: dispersion of reference-set performance,
//   - bias: the gap between each solution's reference performance and the
//     reference-set grid optimum (non-negative whenever the reference
//     optimum is the grid-wide minimum).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "esglab/generation.hpp"
#include "esglab/optimize.hpp"
#include "esglab/rng.hpp"
#include "esglab/types.hpp"

namespace esglab {

enum class Method { gaussian, bootstrap, gbm, pca };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::gaussian: return "gaussian";
        case Method::bootstrap: return "bootstrap";
        case Method::gbm: return "gbm";
        case Method::pca: return "pca";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "gaussian") return Method::gaussian;
    if (s == "bootstrap") return Method::bootstrap;
    if (s == "gbm") return Method::gbm;
    if (s == "pca") return Method::pca;
    throw DomainError("unknown method '" + s + "' (expected gaussian|bootstrap|gbm|pca)");
}

struct ExperimentConfig {
    AssetModel model;
    ObjectiveSpec spec;
    std::vector<std::size_t> sizes{50, 1000, 5000, 10000};
    std::size_t replications{30};
    std::uint64_t master_seed{0};
    std::size_t reference_size{200000};
    double dt{1.0};
    std::size_t n_periods{1};
    Method method{Method::gaussian};
    bool antithetic{false};
    bool moment_match{false};
    Matrix hist_returns;  // required by the bootstrap method
};

inline void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.sizes.empty()) throw DomainError("config: sizes must be non-empty");
    std::size_t max_size = 0;
    for (std::size_t z : cfg.sizes) {
        if (z < 2) throw DomainError("config: every size must be >= 2");
        max_size = std::max(max_size, z);
    }
    if (cfg.replications < 2) throw DomainError("config: replications must be >= 2");
    if (cfg.reference_size < 10 * max_size)
        throw DomainError("config: reference_size must be at least 10x the largest size");
    if (!(cfg.dt > 0.0)) throw DomainError("config: dt must be positive");
    if (cfg.n_periods < 1) throw DomainError("config: n_periods must be >= 1");
    if (cfg.method == Method::bootstrap && cfg.hist_returns.rows == 0)
        throw DomainError("config: bootstrap method needs a calibration history");
}

// One scenario set for this configuration at the given size and seed.
inline ScenarioSet generate_set(const ExperimentConfig& cfg, std::size_t n_paths,
                                std::uint64_t seed, bool antithetic) {
    ScenarioSet set;
    switch (cfg.method) {
        case Method::gaussian:
            set = generate_linear(cfg.model, n_paths, cfg.n_periods, cfg.dt, seed, antithetic);
            break;
        case Method::gbm:
            set = gbm_returns(cfg.model, n_paths, cfg.n_periods, cfg.dt, seed);
            break;
        case Method::bootstrap:
            set = bootstrap(cfg.hist_returns, n_paths, cfg.n_periods, seed);
            break;
        case Method::pca: {
            const auto basis =
                pca_fit(model_covariance(cfg.model), cfg.model.mu, cfg.model.size());
            set = pca_generate(basis, n_paths, cfg.n_periods, cfg.dt, seed);
            break;
        }
    }
    if (cfg.moment_match) set = moment_match_to_model(set, cfg.model);
    return set;
}

// Order-statistic summary; quantiles interpolate linearly at h = (n-1) q.
inline SummaryStats internal_stats(std::vector<double> values) {
    if (values.size() < 2) throw DomainError("internal_stats: need at least 2 values");
    SummaryStats s;
    s.mean = sample_mean(values);
    s.std_dev = sample_std(values);
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    auto quantile = [&](double q) {
        const double h = static_cast<double>(values.size() - 1) * q;
        const auto lo = static_cast<std::size_t>(h);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = h - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    s.q25 = quantile(0.25);
    s.q50 = quantile(0.50);
    s.q75 = quantile(0.75);
    return s;
}

struct ExternalEvaluation {
    std::vector<double> objectives;  // per solution, on the reference set
    double dispersion{0.0};          // max - min
    double std_dev{0.0};
};

// Reference-set performance of a batch of solutions.
inline ExternalEvaluation external_evaluate(const std::vector<Allocation>& solutions,
                                            const ScenarioSet& reference,
                                            const ObjectiveSpec& spec) {
    ExternalEvaluation ev;
    ev.objectives.reserve(solutions.size());
    for (const auto& a : solutions)
        ev.objectives.push_back(evaluate_objective(a, reference, spec).std_dev);
    if (!ev.objectives.empty()) {
        const auto [lo, hi] = std::minmax_element(ev.objectives.begin(), ev.objectives.end());
        ev.dispersion = *hi - *lo;
        ev.std_dev = ev.objectives.size() >= 2 ? sample_std(ev.objectives) : 0.0;
    }
    return ev;
}

// e_f per solution: reference performance minus the reference-set grid
// optimum (the constrained minimum over the full grid).
inline std::vector<double> bias_estimate(const std::vector<Allocation>& solutions,
                                         const ScenarioSet& reference,
                                         const ObjectiveSpec& spec,
                                         double reference_optimum) {
    std::vector<double> out;
    out.reserve(solutions.size());
    for (const auto& a : solutions)
        out.push_back(evaluate_objective(a, reference, spec).std_dev - reference_optimum);
    return out;
}

namespace detail {

// Deterministic parallel map: task i writes slot i, so the result is
// independent of the thread count (1 worker reproduces the default).
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t n_threads, Fn&& fn) {
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, count ? count : std::size_t{1});
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// The full sweep. Replication r at size z runs on its own derived seed, so
// the sweep is reproducible and replications can run on parallel workers
// without changing a single bit of the output.
inline StabilityReport run_replications(const ExperimentConfig& cfg, std::size_t n_threads = 0) {
    validate_experiment_config(cfg);

    const ScenarioSet reference =
        generate_set(cfg, cfg.reference_size, reference_seed(cfg.master_seed), false);
    const OptimizationOutcome ref_outcome = solve_grid(reference, cfg.spec);
    if (!ref_outcome.feasible())
        throw DomainError("stability: reference set infeasible for every grid point");

    StabilityReport report;
    report.master_seed = cfg.master_seed;
    report.reference_objective = ref_outcome.objective;
    report.reference_best = *ref_outcome.best;
    report.total_resamples = reference.resample_count;

    const std::size_t k = cfg.replications;
    report.replications.resize(cfg.sizes.size() * k);

    struct Slot {
        ReplicationResult rec;
        std::uint64_t resamples{0};
    };
    std::vector<Slot> slots(cfg.sizes.size() * k);

    detail::parallel_for(slots.size(), n_threads, [&](std::size_t idx) {
        const std::size_t zi = idx / k;
        const std::size_t r = idx % k + 1;  // replications are 1-based
        const std::size_t size = cfg.sizes[zi];
        const std::uint64_t seed = replication_seed(cfg.master_seed, size, r);
        const ScenarioSet set = generate_set(cfg, size, seed, cfg.antithetic);
        const OptimizationOutcome outcome = solve_grid(set, cfg.spec);

        Slot& slot = slots[idx];
        slot.resamples = set.resample_count;
        slot.rec.size = size;
        slot.rec.replication = r;
        if (outcome.feasible()) {
            slot.rec.feasible = true;
            slot.rec.objective = outcome.objective;
            slot.rec.expected = outcome.expected;
            slot.rec.best = *outcome.best;
            slot.rec.external_objective =
                evaluate_objective(*outcome.best, reference, cfg.spec).std_dev;
            slot.rec.bias = slot.rec.external_objective - ref_outcome.objective;
        }
    });

    const std::size_t n_assets = cfg.model.size();
    for (std::size_t zi = 0; zi < cfg.sizes.size(); ++zi) {
        const std::size_t size = cfg.sizes[zi];
        SizeSummary summary;
        summary.size = size;

        std::vector<double> objectives, externals, biases;
        std::vector<Allocation> solutions;
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            const Slot& slot = slots[zi * k + r];
            report.replications[zi * k + r] = slot.rec;
            report.total_resamples += slot.resamples;
            if (!slot.rec.feasible) {
                ++summary.infeasible_count;
                continue;
            }
            objectives.push_back(slot.rec.objective);
            externals.push_back(slot.rec.external_objective);
            biases.push_back(slot.rec.bias);
            solutions.push_back(slot.rec.best);
        }
        if (summary.infeasible_count * 10 > cfg.replications)
            throw DomainError("stability: more than 10% infeasible replications at size " +
                              std::to_string(size) + " (" +
                              std::to_string(summary.infeasible_count) + "/" +
                              std::to_string(cfg.replications) + ")");

        summary.internal = internal_stats(objectives);
        summary.external = internal_stats(externals);
        const auto [lo, hi] = std::minmax_element(externals.begin(), externals.end());
        summary.external_dispersion = *hi - *lo;
        summary.mean_bias = sample_mean(biases);

        summary.weights.resize(n_assets);
        for (std::size_t i = 0; i < n_assets; ++i) {
            std::vector<double> w;
            w.reserve(solutions.size());
            for (const auto& a : solutions) w.push_back(a.weights[i]);
            WeightStats ws;
            ws.mean = sample_mean(w);
            ws.std_dev = w.size() >= 2 ? sample_std(w) : 0.0;
            const auto [wlo, whi] = std::minmax_element(w.begin(), w.end());
            ws.min = *wlo;
            ws.max = *whi;
            ws.range = ws.max - ws.min;
            summary.weights[i] = ws;
        }
        report.sizes.push_back(std::move(summary));
    }
    return report;
}

// Self-contained three-asset setup used by the shipped example config and
// the default demo run. Every asset clears the return floor m0, so the
// whole grid stays feasible and the diagnostics isolate pure sampling
// noise.
inline ExperimentConfig bundled_experiment() {
    ExperimentConfig cfg;
    cfg.model.names = {"cash", "bonds", "equity"};
    cfg.model.mu = {0.045, 0.052, 0.078};
    cfg.model.sigma = {0.018, 0.042, 0.165};
    cfg.model.corr = Matrix::identity(3);
    cfg.model.corr(0, 1) = cfg.model.corr(1, 0) = 0.25;
    cfg.model.corr(0, 2) = cfg.model.corr(2, 0) = 0.05;
    cfg.model.corr(1, 2) = cfg.model.corr(2, 1) = 0.15;
    cfg.model = validate_asset_model(cfg.model);
    cfg.spec.m0 = 0.04;
    cfg.spec.step = 0.05;
    cfg.sizes = {50, 1000, 5000, 10000};
    cfg.replications = 30;
    cfg.master_seed = 20240611;
    cfg.reference_size = 200000;
    return cfg;
}

// ---------------------------------------------------------------------------
// One-dimensional quadratic demonstration: min over x of E[(x - xi)^2].
// The optimizer is the sample mean and the optimum the sample's population
// variance, so internal and external stability can be read off exactly.
// Forcing all samples to share the target mean gives external stability
// with varying optima; forcing the variance gives constant optima with
// varying external error.

enum class SampleAdjustment { none, match_mean, match_variance };

struct QuadraticDemoCell {
    std::size_t size{0};
    std::vector<double> x_star;  // per replication
    std::vector<double> f_star;
    std::vector<double> e_f;  // (x_star - dist_mean)^2, the exact external gap
    SummaryStats f_stats;
    double mean_e_f{0.0};
    double max_e_f{0.0};
};

struct QuadraticDemoReport {
    double dist_mean{0.0};
    double dist_var{0.0};
    std::vector<std::size_t> sizes;
    std::size_t replications{0};
    std::uint64_t master_seed{0};
    // indexed [mode][size]; mode order: none, match_mean, match_variance
    std::vector<std::vector<QuadraticDemoCell>> cells;
};

inline QuadraticDemoReport quadratic_stability_demo(double dist_mean, double dist_var,
                                                    const std::vector<std::size_t>& sizes,
                                                    std::size_t replications,
                                                    std::uint64_t master_seed) {
    if (dist_var < 0.0) throw DomainError("quadratic demo: variance must be >= 0");
    if (sizes.empty()) throw DomainError("quadratic demo: sizes must be non-empty");
    if (replications < 2) throw DomainError("quadratic demo: replications must be >= 2");

    const double dist_std = std::sqrt(dist_var);
    QuadraticDemoReport report;
    report.dist_mean = dist_mean;
    report.dist_var = dist_var;
    report.sizes = sizes;
    report.replications = replications;
    report.master_seed = master_seed;
    report.cells.resize(3);

    const SampleAdjustment modes[3] = {SampleAdjustment::none, SampleAdjustment::match_mean,
                                       SampleAdjustment::match_variance};
    for (std::size_t mi = 0; mi < 3; ++mi) {
        for (std::size_t size : sizes) {
            QuadraticDemoCell cell;
            cell.size = size;
            for (std::size_t r = 1; r <= replications; ++r) {
                NormalSampler normal(replication_seed(master_seed, size, r));
                std::vector<double> sample(size);
                for (double& v : sample) v = dist_mean + dist_std * normal();

                if (modes[mi] == SampleAdjustment::match_mean) {
                    const double shift = dist_mean - sample_mean(sample);
                    for (double& v : sample) v += shift;
                } else if (modes[mi] == SampleAdjustment::match_variance) {
                    const auto [m, v] = quadratic_oracle(sample);
                    const double pop_std = std::sqrt(v);
                    const double scale = pop_std > 0.0 ? dist_std / pop_std : 0.0;
                    for (double& x : sample) x = m + scale * (x - m);
                }

                const auto [x_star, f_star] = quadratic_oracle(sample);
                cell.x_star.push_back(x_star);
                cell.f_star.push_back(f_star);
                cell.e_f.push_back((x_star - dist_mean) * (x_star - dist_mean));
            }
            cell.f_stats = internal_stats(cell.f_star);
            cell.mean_e_f = sample_mean(cell.e_f);
            cell.max_e_f = *std::max_element(cell.e_f.begin(), cell.e_f.end());
            report.cells[mi].push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace esglab
