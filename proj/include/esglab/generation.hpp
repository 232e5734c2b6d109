#pragma once

// Scenario generation engines: correlated Gaussian one-period returns,
// exact-scheme geometric Brownian motion, whole-row bootstrap of
// historical returns, exact affine two-moment matching, and PCA-reduced
// factor simulation. Every engine is a pure function of its inputs
// including the seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "esglab/linalg.hpp"
#include "esglab/rng.hpp"
#include "esglab/types.hpp"

namespace esglab {

// Standard-normal draws indexed [path][period][asset].
struct NoiseBlock {
    std::size_t n_paths{0};
    std::size_t n_periods{0};
    std::size_t n_assets{0};
    std::vector<double> eps;
    std::uint64_t seed{0};

    double& at(std::size_t path, std::size_t period, std::size_t asset) {
        return eps[(path * n_periods + period) * n_assets + asset];
    }
    double at(std::size_t path, std::size_t period, std::size_t asset) const {
        return eps[(path * n_periods + period) * n_assets + asset];
    }
};

// iid N(0,1) block; with antithetic=true paths come in (e, -e) pairs:
// path 2m-1 (1-based) is drawn, path 2m is its exact negation.
inline NoiseBlock draw_noise(std::size_t n_paths, std::size_t n_periods, std::size_t n_assets,
                             std::uint64_t seed, bool antithetic = false) {
    if (n_paths < 1 || n_periods < 1 || n_assets < 1)
        throw DomainError("draw_noise: dimensions must be >= 1");
    if (antithetic && n_paths % 2 != 0)
        throw DomainError("draw_noise: antithetic sampling needs an even path count");

    NoiseBlock block;
    block.n_paths = n_paths;
    block.n_periods = n_periods;
    block.n_assets = n_assets;
    block.seed = seed;
    block.eps.resize(n_paths * n_periods * n_assets);

    NormalSampler normal(seed);
    const std::size_t slot = n_periods * n_assets;
    if (antithetic) {
        for (std::size_t s = 0; s + 1 < n_paths; s += 2) {
            for (std::size_t k = 0; k < slot; ++k) {
                const double e = normal();
                block.eps[s * slot + k] = e;
                block.eps[(s + 1) * slot + k] = -e;
            }
        }
    } else {
        for (double& e : block.eps) e = normal();
    }
    return block;
}

// Applies the lower-triangular factor of corr to every (path, period)
// asset vector. Marginals stay standard normal; cross-asset correlation
// becomes corr.
inline NoiseBlock correlate(const NoiseBlock& noise, const Matrix& corr) {
    if (corr.rows != noise.n_assets || corr.cols != noise.n_assets)
        throw DomainError("correlate: correlation size mismatch");
    const Matrix l = cholesky_psd(corr);
    NoiseBlock out = noise;
    const std::size_t n = noise.n_assets;
    std::vector<double> v(n);
    for (std::size_t s = 0; s < noise.n_paths; ++s) {
        for (std::size_t t = 0; t < noise.n_periods; ++t) {
            for (std::size_t i = 0; i < n; ++i) v[i] = noise.at(s, t, i);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * v[j];
                out.at(s, t, i) = acc;
            }
        }
    }
    return out;
}

namespace detail {

inline constexpr int kMaxSlotResamples = 100;

// Redraws one (path, period) slot from the continued stream until every
// asset return stays above -100%. Resampling (rather than truncation)
// keeps the conditional distribution untouched; the event is vanishingly
// rare for sane parameters and each redraw is counted.
template <typename ComputeReturns>
inline void resample_slot(NormalSampler& normal, const Matrix& l, std::size_t n,
                          ComputeReturns&& compute, std::vector<double>& out,
                          std::uint64_t& resamples) {
    std::vector<double> raw(n), corr_eps(n);
    for (int attempt = 0; attempt < kMaxSlotResamples; ++attempt) {
        ++resamples;
        for (std::size_t i = 0; i < n; ++i) raw[i] = normal();
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * raw[j];
            corr_eps[i] = acc;
        }
        compute(corr_eps, out);
        bool ok = true;
        for (double r : out)
            if (!(r > -1.0)) ok = false;
        if (ok) return;
    }
    throw DomainError("return floor resampling exceeded " + std::to_string(kMaxSlotResamples) +
                      " attempts for one slot; parameters are pathological");
}

}  // namespace detail

// One-period arithmetic returns r = mu*dt + sigma*sqrt(dt)*eps with
// correlated eps. Slots producing a return <= -100% are redrawn from the
// continued stream (counted in resample_count).
inline ScenarioSet generate_linear(const AssetModel& model, std::size_t n_paths,
                                   std::size_t n_periods, double dt, std::uint64_t seed,
                                   bool antithetic = false) {
    if (!(dt > 0.0)) throw DomainError("generate_linear: dt must be positive");
    const std::size_t n = model.size();
    const Matrix l = cholesky_psd(model.corr);
    const double sqrt_dt = std::sqrt(dt);

    NormalSampler normal(seed);
    NoiseBlock block;
    block.n_paths = n_paths;
    block.n_periods = n_periods;
    block.n_assets = n;
    block.eps.resize(n_paths * n_periods * n);
    if (antithetic) {
        if (n_paths % 2 != 0)
            throw DomainError("generate_linear: antithetic sampling needs an even path count");
        const std::size_t slot = n_periods * n;
        for (std::size_t s = 0; s + 1 < n_paths; s += 2)
            for (std::size_t k = 0; k < slot; ++k) {
                const double e = normal();
                block.eps[s * slot + k] = e;
                block.eps[(s + 1) * slot + k] = -e;
            }
    } else {
        for (double& e : block.eps) e = normal();
    }

    ScenarioSet set(n_paths, n_periods, n, dt, antithetic ? "gaussian-antithetic" : "gaussian",
                    seed);
    auto slot_returns = [&](const std::vector<double>& eps, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = model.mu[i] * dt + model.sigma[i] * sqrt_dt * eps[i];
    };

    std::vector<double> v(n), corr_eps(n), r(n);
    for (std::size_t s = 0; s < n_paths; ++s) {
        for (std::size_t t = 0; t < n_periods; ++t) {
            for (std::size_t i = 0; i < n; ++i) v[i] = block.at(s, t, i);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * v[j];
                corr_eps[i] = acc;
            }
            slot_returns(corr_eps, r);
            bool ok = true;
            for (double x : r)
                if (!(x > -1.0)) ok = false;
            if (!ok) detail::resample_slot(normal, l, n, slot_returns, r, set.resample_count);
            for (std::size_t i = 0; i < n; ++i) set.at(s, t, i) = r[i];
        }
    }
    return set;
}

// Price paths [path][0..n_periods][asset] under the exact log-normal step
//   S_{t+1} = S_t * exp((mu - sigma^2/2) dt + sigma sqrt(dt) eps)
// with correlated eps. Column 0 is s0.
inline std::vector<double> gbm_paths(const std::vector<double>& s0, const AssetModel& model,
                                     std::size_t n_paths, std::size_t n_periods, double dt,
                                     std::uint64_t seed) {
    const std::size_t n = model.size();
    if (s0.size() != n) throw DomainError("gbm_paths: s0 size mismatch");
    for (double v : s0)
        if (!(v > 0.0)) throw DomainError("gbm_paths: s0 must be positive");
    if (!(dt > 0.0)) throw DomainError("gbm_paths: dt must be positive");
    if (n_paths < 1 || n_periods < 1) throw DomainError("gbm_paths: dimensions must be >= 1");

    const Matrix l = cholesky_psd(model.corr);
    const double sqrt_dt = std::sqrt(dt);
    NormalSampler normal(seed);

    std::vector<double> paths(n_paths * (n_periods + 1) * n);
    auto at = [&](std::size_t s, std::size_t t, std::size_t i) -> double& {
        return paths[(s * (n_periods + 1) + t) * n + i];
    };

    std::vector<double> raw(n), eps(n);
    for (std::size_t s = 0; s < n_paths; ++s) {
        for (std::size_t i = 0; i < n; ++i) at(s, 0, i) = s0[i];
        for (std::size_t t = 0; t < n_periods; ++t) {
            for (std::size_t i = 0; i < n; ++i) raw[i] = normal();
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * raw[j];
                eps[i] = acc;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double drift = (model.mu[i] - 0.5 * model.sigma[i] * model.sigma[i]) * dt;
                at(s, t + 1, i) = at(s, t, i) * std::exp(drift + model.sigma[i] * sqrt_dt * eps[i]);
            }
        }
    }
    return paths;
}

// GBM expressed as a per-period arithmetic-return ScenarioSet
// (S_{t+1}/S_t - 1; strictly above -100% by construction).
inline ScenarioSet gbm_returns(const AssetModel& model, std::size_t n_paths,
                               std::size_t n_periods, double dt, std::uint64_t seed) {
    const std::size_t n = model.size();
    const std::vector<double> s0(n, 1.0);
    const auto paths = gbm_paths(s0, model, n_paths, n_periods, dt, seed);
    ScenarioSet set(n_paths, n_periods, n, dt, "gbm", seed);
    auto at = [&](std::size_t s, std::size_t t, std::size_t i) {
        return paths[(s * (n_periods + 1) + t) * n + i];
    };
    for (std::size_t s = 0; s < n_paths; ++s)
        for (std::size_t t = 0; t < n_periods; ++t)
            for (std::size_t i = 0; i < n; ++i)
                set.at(s, t, i) = at(s, t + 1, i) / at(s, t, i) - 1.0;
    return set;
}

// Every (path, period) slot is one whole historical row drawn uniformly
// with replacement, so the observed cross-asset dependence is kept intact.
inline ScenarioSet bootstrap(const Matrix& hist_returns, std::size_t n_paths,
                             std::size_t n_periods, std::uint64_t seed) {
    const std::size_t p = hist_returns.rows;
    const std::size_t n = hist_returns.cols;
    if (p < 1 || n < 1) throw DomainError("bootstrap: empty history");
    if (n_paths < 1 || n_periods < 1) throw DomainError("bootstrap: dimensions must be >= 1");

    std::mt19937_64 gen(seed);
    ScenarioSet set(n_paths, n_periods, n, 1.0, "bootstrap", seed);
    for (std::size_t s = 0; s < n_paths; ++s)
        for (std::size_t t = 0; t < n_periods; ++t) {
            const std::size_t row = static_cast<std::size_t>(bounded_uint(gen, p));
            for (std::size_t i = 0; i < n; ++i) set.at(s, t, i) = hist_returns(row, i);
        }
    return set;
}

// Per-period affine map A (r - m_hat) + target_mean with
// A = chol(target_cov) * chol(sample_cov)^-1, so the sample mean and
// covariance (n-1 denominator) hit the targets exactly up to roundoff.
inline ScenarioSet moment_match_affine(const ScenarioSet& set,
                                       const std::vector<std::vector<double>>& target_mean,
                                       const std::vector<Matrix>& target_cov) {
    const std::size_t n = set.n_assets;
    const std::size_t paths = set.n_paths;
    if (target_mean.size() != set.n_periods || target_cov.size() != set.n_periods)
        throw DomainError("moment_match_affine: one target per period required");
    if (paths < 2) throw DomainError("moment_match_affine: need at least 2 paths");

    ScenarioSet out = set;
    out.method = set.method + "+moment-matched";

    std::vector<double> mean(n), centered(n), z(n);
    for (std::size_t t = 0; t < set.n_periods; ++t) {
        if (target_mean[t].size() != n || target_cov[t].rows != n || target_cov[t].cols != n)
            throw DomainError("moment_match_affine: target dimension mismatch");

        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t s = 0; s < paths; ++s)
            for (std::size_t i = 0; i < n; ++i) mean[i] += set.at(s, t, i);
        for (double& m : mean) m /= static_cast<double>(paths);

        Matrix cov(n, n);
        for (std::size_t s = 0; s < paths; ++s)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    cov(i, j) += (set.at(s, t, i) - mean[i]) * (set.at(s, t, j) - mean[j]);
        for (double& v : cov.data) v /= static_cast<double>(paths - 1);

        Matrix ls;
        try {
            ls = cholesky_strict(cov);
        } catch (const std::runtime_error&) {
            throw DomainError("moment_match_affine: sample covariance singular at period " +
                              std::to_string(t + 1));
        }
        const Matrix lt = cholesky_psd(target_cov[t]);

        for (std::size_t s = 0; s < paths; ++s) {
            for (std::size_t i = 0; i < n; ++i) centered[i] = set.at(s, t, i) - mean[i];
            z = forward_solve(ls, centered);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) acc += lt(i, j) * z[j];
                out.at(s, t, i) = acc + target_mean[t][i];
            }
        }
    }
    check_scenario_set(out);
    return out;
}

// k orthonormal directions with the largest variances of a covariance
// matrix, plus the mean they were taken around.
struct PcaBasis {
    Matrix components;               // k rows, each an n-dim unit direction
    std::vector<double> eigenvalues; // descending, clipped at 0
    std::vector<double> mean;        // n-dim
};

inline PcaBasis pca_fit(const Matrix& cov, const std::vector<double>& mean, std::size_t k) {
    if (!cov.square()) throw DomainError("pca_fit: covariance must be square");
    const std::size_t n = cov.rows;
    if (mean.size() != n) throw DomainError("pca_fit: mean size mismatch");
    if (k < 1 || k > n) throw DomainError("pca_fit: k out of range [1, n]");
    if (max_symmetry_error(cov) > 1e-10) throw DomainError("pca_fit: covariance not symmetric");

    const auto eig = eigen_symmetric(cov);
    if (eig.values.back() < -1e-12) throw DomainError("pca_fit: covariance not positive semidefinite");

    PcaBasis basis;
    basis.mean = mean;
    basis.components = Matrix(k, n);
    basis.eigenvalues.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        basis.eigenvalues[c] = eig.values[c] > 0.0 ? eig.values[c] : 0.0;
        for (std::size_t i = 0; i < n; ++i) basis.components(c, i) = eig.vectors(i, c);
    }
    return basis;
}

inline double explained_variance_ratio(const Matrix& cov, const PcaBasis& basis) {
    double trace = 0.0;
    for (std::size_t i = 0; i < cov.rows; ++i) trace += cov(i, i);
    double kept = 0.0;
    for (double v : basis.eigenvalues) kept += v;
    return trace > 0.0 ? kept / trace : 1.0;
}

// Draws k independent factor shocks scaled by sqrt(eigenvalue * dt), maps
// them back through the components and adds mean*dt. Returns along dropped
// directions are constant. The -100% floor is enforced by slot resampling
// as in generate_linear.
inline ScenarioSet pca_generate(const PcaBasis& basis, std::size_t n_paths, std::size_t n_periods,
                                double dt, std::uint64_t seed) {
    const std::size_t k = basis.components.rows;
    const std::size_t n = basis.components.cols;
    if (k < 1 || n < 1) throw DomainError("pca_generate: empty basis");
    if (!(dt > 0.0)) throw DomainError("pca_generate: dt must be positive");
    if (n_paths < 1 || n_periods < 1) throw DomainError("pca_generate: dimensions must be >= 1");

    std::vector<double> scale(k);
    for (std::size_t c = 0; c < k; ++c) scale[c] = std::sqrt(basis.eigenvalues[c] * dt);

    NormalSampler normal(seed);
    ScenarioSet set(n_paths, n_periods, n, dt, "pca", seed);
    std::vector<double> f(k), r(n);
    auto slot_returns = [&](const std::vector<double>& factors, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = basis.mean[i] * dt;
            for (std::size_t c = 0; c < k; ++c)
                acc += basis.components(c, i) * scale[c] * factors[c];
            out[i] = acc;
        }
    };
    for (std::size_t s = 0; s < n_paths; ++s)
        for (std::size_t t = 0; t < n_periods; ++t) {
            for (std::size_t c = 0; c < k; ++c) f[c] = normal();
            slot_returns(f, r);
            bool ok = true;
            for (double x : r)
                if (!(x > -1.0)) ok = false;
            if (!ok) {
                // identity "correlation" over the k factors
                for (int attempt = 0;; ++attempt) {
                    if (attempt >= detail::kMaxSlotResamples)
                        throw DomainError("pca_generate: return floor resampling exhausted");
                    ++set.resample_count;
                    for (std::size_t c = 0; c < k; ++c) f[c] = normal();
                    slot_returns(f, r);
                    ok = true;
                    for (double x : r)
                        if (!(x > -1.0)) ok = false;
                    if (ok) break;
                }
            }
            for (std::size_t i = 0; i < n; ++i) set.at(s, t, i) = r[i];
        }
    return set;
}

// Model-implied per-period targets for moment matching: mean mu*dt and
// covariance dt * diag(sigma) * corr * diag(sigma).
inline Matrix model_covariance(const AssetModel& model, double dt = 1.0) {
    const std::size_t n = model.size();
    Matrix cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(i, j) = dt * model.sigma[i] * model.sigma[j] * model.corr(i, j);
    return cov;
}

inline ScenarioSet moment_match_to_model(const ScenarioSet& set, const AssetModel& model) {
    std::vector<std::vector<double>> means(set.n_periods);
    std::vector<Matrix> covs(set.n_periods);
    const std::size_t n = model.size();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = model.mu[i] * set.dt;
    const Matrix cov = model_covariance(model, set.dt);
    for (std::size_t t = 0; t < set.n_periods; ++t) {
        means[t] = m;
        covs[t] = cov;
    }
    return moment_match_affine(set, means, covs);
}

}  // namespace esglab
