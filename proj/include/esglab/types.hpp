#pragma once

// Shared domain types. Everything is a plain value type, immutable by
// convention after construction, and safe to share across threads.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "esglab/linalg.hpp"

namespace esglab {

// Thrown for violated preconditions and malformed inputs; carries a
// human-readable message naming the offending field/row/asset.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kCorrSymmetryTol = 1e-10;
inline constexpr double kCorrEigenvalueTol = 1e-10;

// Per-asset annualized drift and volatility plus the cross-asset
// correlation of their shocks. Construct through validate_asset_model so
// the invariants below always hold:
//   - n = names = mu = sigma >= 1, sigma >= 0
//   - corr symmetric (tol 1e-10), unit diagonal, entries in [-1, 1],
//     smallest eigenvalue >= -1e-10 (then clipped to 0 and rescaled)
struct AssetModel {
    std::vector<std::string> names;
    std::vector<double> mu;
    std::vector<double> sigma;
    Matrix corr;

    std::size_t size() const { return names.size(); }
};

// Near-PSD repair: clip negative eigenvalues at zero, rebuild, rescale to
// unit diagonal. Empirical matrices from short histories are routinely a
// hair below PSD; anything below the -1e-10 floor is rejected upstream.
inline Matrix regularize_correlation(const Matrix& corr) {
    const auto eig = eigen_symmetric(corr);
    const std::size_t n = corr.rows;
    bool clipped = false;
    for (double v : eig.values)
        if (v < 0.0) clipped = true;
    if (!clipped) return corr;

    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double lam = eig.values[k] > 0.0 ? eig.values[k] : 0.0;
                s += lam * eig.vectors(i, k) * eig.vectors(j, k);
            }
            out(i, j) = s;
        }
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = out(i, i);
        if (diag[i] <= 0.0) throw DomainError("correlation regularization produced a zero diagonal");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) /= std::sqrt(diag[i] * diag[j]);
    // exact symmetry and unit diagonal after the rescale
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = m;
            out(j, i) = m;
        }
    }
    return out;
}

inline AssetModel validate_asset_model(std::vector<std::string> names, std::vector<double> mu,
                                       std::vector<double> sigma, Matrix corr) {
    const std::size_t n = names.size();
    if (n < 1) throw DomainError("asset model: need at least one asset");
    if (mu.size() != n || sigma.size() != n)
        throw DomainError("asset model: names/mu/sigma sizes disagree");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(mu[i])) throw DomainError("asset model: mu[" + names[i] + "] not finite");
        if (!std::isfinite(sigma[i]) || sigma[i] < 0.0)
            throw DomainError("asset model: sigma[" + names[i] + "] must be finite and >= 0");
    }
    if (corr.rows != n || corr.cols != n)
        throw DomainError("asset model: correlation matrix must be " + std::to_string(n) + "x" +
                          std::to_string(n));
    if (max_symmetry_error(corr) > kCorrSymmetryTol) {
        std::size_t bi = 0, bj = 1;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double err = std::abs(corr(i, j) - corr(j, i));
                if (err > worst) {
                    worst = err;
                    bi = i;
                    bj = j;
                }
            }
        throw DomainError("asset model: correlation matrix not symmetric at (" +
                          std::to_string(bi) + "," + std::to_string(bj) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(corr(i, i) - 1.0) > kCorrSymmetryTol)
            throw DomainError("asset model: correlation diagonal must be 1");
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(corr(i, j)) > 1.0 + kCorrSymmetryTol)
                throw DomainError("asset model: correlation entry out of [-1, 1] at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
    }
    const auto eig = eigen_symmetric(corr);
    if (eig.values.back() < -kCorrEigenvalueTol)
        throw DomainError("asset model: correlation matrix not positive semidefinite");
    AssetModel model{std::move(names), std::move(mu), std::move(sigma),
                     regularize_correlation(corr)};
    return model;
}

inline AssetModel validate_asset_model(const AssetModel& m) {
    return validate_asset_model(m.names, m.mu, m.sigma, m.corr);
}

// Linear-structure scenario container: arithmetic per-period returns
// indexed [path][period][asset], flattened row-major. Generation enforces
// that every entry is finite and > -1.
struct ScenarioSet {
    std::size_t n_paths{0};
    std::size_t n_periods{0};
    std::size_t n_assets{0};
    std::vector<double> returns;
    double dt{1.0};
    std::string method;
    std::uint64_t seed{0};
    std::uint64_t resample_count{0};  // slots redrawn to respect the -100% floor

    ScenarioSet() = default;
    ScenarioSet(std::size_t paths, std::size_t periods, std::size_t assets, double dt_years,
                std::string method_tag, std::uint64_t seed_used)
        : n_paths(paths),
          n_periods(periods),
          n_assets(assets),
          returns(paths * periods * assets, 0.0),
          dt(dt_years),
          method(std::move(method_tag)),
          seed(seed_used) {}

    double& at(std::size_t path, std::size_t period, std::size_t asset) {
        return returns[(path * n_periods + period) * n_assets + asset];
    }
    double at(std::size_t path, std::size_t period, std::size_t asset) const {
        return returns[(path * n_periods + period) * n_assets + asset];
    }
};

inline void check_scenario_set(const ScenarioSet& set) {
    if (set.n_paths < 1 || set.n_periods < 1 || set.n_assets < 1)
        throw DomainError("scenario set: empty dimension");
    if (set.returns.size() != set.n_paths * set.n_periods * set.n_assets)
        throw DomainError("scenario set: storage size mismatch");
    for (double r : set.returns) {
        if (!std::isfinite(r)) throw DomainError("scenario set: non-finite return");
        if (r <= -1.0) throw DomainError("scenario set: return at or below -100%");
    }
}

// Tree layout descriptor: factors[t-1] children per node at level t.
struct BranchingVector {
    std::vector<std::size_t> factors;

    std::size_t height() const { return factors.size(); }
};

inline BranchingVector validate_branching(std::vector<std::size_t> factors) {
    for (std::size_t b : factors)
        if (b < 1) throw DomainError("branching vector: factors must be >= 1");
    return BranchingVector{std::move(factors)};
}

struct TreeNode {
    std::optional<std::size_t> parent;  // empty for the root
    std::size_t depth{0};
    std::vector<double> values;  // per-asset return over the arc into this node
    double prob{1.0};            // conditional transition probability from parent
};

// Breadth-order node arena; children of a node are contiguous.
struct ScenarioTree {
    std::vector<TreeNode> nodes;
    BranchingVector branching;
    std::size_t n_assets{0};
    double dt{1.0};
    std::uint64_t seed{0};

    std::size_t arc_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

// A point of the quantized simplex: weights >= 0, sum 1, each an integer
// multiple of the grid step (all within 1e-12 as produced by the grid
// enumerator).
struct Allocation {
    std::vector<double> weights;
};

struct ObjectiveSpec {
    double m0{0.04};   // minimal expected portfolio return per horizon
    double step{0.05};  // grid step
};

// Order-statistic summary used by the stability report (quantiles by
// linear interpolation at h = (n-1) q).
struct SummaryStats {
    double mean{0.0};
    double std_dev{0.0};  // sample (n-1) standard deviation
    double min{0.0};
    double q25{0.0};
    double q50{0.0};
    double q75{0.0};
    double max{0.0};
};

struct WeightStats {
    double mean{0.0};
    double std_dev{0.0};
    double min{0.0};
    double max{0.0};
    double range{0.0};
};

struct ReplicationResult {
    std::size_t size{0};
    std::size_t replication{0};  // 1-based
    double objective{0.0};
    double expected{0.0};
    bool feasible{false};
    Allocation best;
    double external_objective{0.0};
    double bias{0.0};  // e_f against the reference set
};

struct SizeSummary {
    std::size_t size{0};
    SummaryStats internal;              // optimal objective values
    SummaryStats external;              // objectives re-evaluated on the reference set
    double external_dispersion{0.0};    // max - min across solutions on the reference
    double mean_bias{0.0};
    std::vector<WeightStats> weights;   // per asset
    std::size_t infeasible_count{0};
};

struct StabilityReport {
    std::vector<ReplicationResult> replications;  // ordered by (size, replication)
    std::vector<SizeSummary> sizes;
    double reference_objective{0.0};   // constrained grid minimum on the reference set
    Allocation reference_best;
    std::uint64_t master_seed{0};
    std::uint64_t total_resamples{0};
};

}  // namespace esglab
