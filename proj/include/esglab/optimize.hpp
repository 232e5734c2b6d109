#pragma once

// The mean-variance decision problem on a quantized simplex:
//   min std(R_p) over the allocation grid, subject to mean(R_p) >= m0.
// Solved by exhaustive scan; ties go to the lexicographically smallest
// weight vector. The estimator conventions are pinned: mean is the plain
// path average in path order, std uses the n-1 denominator on the same
// two-pass order.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "esglab/types.hpp"

namespace esglab {

struct OptimizationOutcome {
    std::optional<Allocation> best;  // empty iff no feasible allocation
    double objective{0.0};           // std of R_p at the optimum
    double expected{0.0};            // mean of R_p at the optimum
    std::size_t feasible_count{0};

    bool feasible() const { return best.has_value(); }
};

struct ObjectiveValue {
    double mean{0.0};
    double std_dev{0.0};
    bool feasible{false};
};

// All weight vectors with entries in {0, step, ..., 1} summing to 1, in
// ascending lexicographic order. Count is C(1/step + n - 1, n - 1).
inline std::vector<Allocation> enumerate_grid(std::size_t n_assets, double step) {
    if (n_assets < 1) throw DomainError("enumerate_grid: need at least one asset");
    if (!(step > 0.0) || step > 1.0) throw DomainError("enumerate_grid: step must be in (0, 1]");
    const double inv = 1.0 / step;
    const auto m = static_cast<std::size_t>(std::llround(inv));
    if (std::abs(inv - static_cast<double>(m)) > 1e-9)
        throw DomainError("enumerate_grid: 1/step must be an integer");

    std::vector<Allocation> grid;
    std::vector<std::size_t> counts(n_assets, 0);
    // counts[0..n-2] free, the last takes the remainder
    auto emit = [&](auto&& self, std::size_t asset, std::size_t remaining) -> void {
        if (asset + 1 == n_assets) {
            counts[asset] = remaining;
            Allocation a;
            a.weights.resize(n_assets);
            for (std::size_t i = 0; i < n_assets; ++i)
                a.weights[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
            grid.push_back(std::move(a));
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[asset] = c;
            self(self, asset + 1, remaining - c);
        }
    };
    emit(emit, 0, m);
    return grid;
}

// Per-path horizon return: compound the per-period portfolio returns,
//   R = prod_t (1 + sum_j p_j r[s][t][j]) - 1.
// For a single period this is the plain weighted sum of asset returns.
inline std::vector<double> portfolio_returns(const Allocation& alloc, const ScenarioSet& set) {
    const std::size_t n = set.n_assets;
    if (alloc.weights.size() != n) throw DomainError("portfolio_returns: asset count mismatch");
    std::vector<double> out(set.n_paths);
    for (std::size_t s = 0; s < set.n_paths; ++s) {
        if (set.n_periods == 1) {
            double rp = 0.0;
            for (std::size_t j = 0; j < n; ++j) rp += alloc.weights[j] * set.at(s, 0, j);
            out[s] = rp;
        } else {
            double growth = 1.0;
            for (std::size_t t = 0; t < set.n_periods; ++t) {
                double rp = 0.0;
                for (std::size_t j = 0; j < n; ++j) rp += alloc.weights[j] * set.at(s, t, j);
                growth *= 1.0 + rp;
            }
            out[s] = growth - 1.0;
        }
    }
    return out;
}

inline double sample_mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// n-1 denominator, two-pass
inline double sample_std(const std::vector<double>& x) {
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline ObjectiveValue evaluate_objective(const Allocation& alloc, const ScenarioSet& set,
                                         const ObjectiveSpec& spec) {
    if (set.n_paths < 2) throw DomainError("evaluate_objective: need at least 2 paths");
    const auto rp = portfolio_returns(alloc, set);
    ObjectiveValue v;
    v.mean = sample_mean(rp);
    v.std_dev = sample_std(rp);
    v.feasible = v.mean >= spec.m0;
    return v;
}

// Exhaustive scan of the grid. Among feasible points the minimal std wins;
// scanning in lexicographic order with a strict '<' keeps the smallest
// weight vector on ties. Infeasibility is a result, not an exception.
inline OptimizationOutcome solve_grid(const ScenarioSet& set, const ObjectiveSpec& spec) {
    const auto grid = enumerate_grid(set.n_assets, spec.step);
    OptimizationOutcome outcome;
    for (const auto& alloc : grid) {
        const auto v = evaluate_objective(alloc, set, spec);
        if (!v.feasible) continue;
        ++outcome.feasible_count;
        if (!outcome.best || v.std_dev < outcome.objective) {
            outcome.best = alloc;
            outcome.objective = v.std_dev;
            outcome.expected = v.mean;
        }
    }
    return outcome;
}

// Population-moment counterpart of solve_grid: grid argmin of
// sqrt(p' Sigma p) with Sigma = dt * diag(sigma) corr diag(sigma),
// subject to p'mu*dt >= m0. Same order, same tie-break.
inline OptimizationOutcome exact_moment_argmin(const AssetModel& model, const ObjectiveSpec& spec,
                                               double dt = 1.0) {
    const std::size_t n = model.size();
    const auto grid = enumerate_grid(n, spec.step);
    OptimizationOutcome outcome;
    for (const auto& alloc : grid) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += alloc.weights[i] * model.mu[i] * dt;
        if (mean < spec.m0) continue;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                var += alloc.weights[i] * alloc.weights[j] * model.sigma[i] * model.sigma[j] *
                       model.corr(i, j);
        const double sd = std::sqrt(var * dt);
        ++outcome.feasible_count;
        if (!outcome.best || sd < outcome.objective) {
            outcome.best = alloc;
            outcome.objective = sd;
            outcome.expected = mean;
        }
    }
    if (!outcome.best) throw DomainError("exact_moment_argmin: m0 infeasible for this model");
    return outcome;
}

// Closed form for min E[(x - xi)^2] under the empirical distribution of a
// sample: the minimizer is the sample mean, the minimum the population
// (divide by n) variance.
inline std::pair<double, double> quadratic_oracle(const std::vector<double>& sample) {
    if (sample.empty()) throw DomainError("quadratic_oracle: empty sample");
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(sample.size());
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    var /= static_cast<double>(sample.size());
    return {mean, var};
}

}  // namespace esglab
