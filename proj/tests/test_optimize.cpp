#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "esglab/generation.hpp"
#include "esglab/optimize.hpp"

using namespace esglab;

namespace {

// independent enumerator: odometer over explicit integer counts
std::vector<std::vector<std::size_t>> enumerate_counts(std::size_t n, std::size_t total) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(n, 0);
    while (true) {
        std::size_t used = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) used += cur[i];
        if (used <= total) {
            cur[n - 1] = total - used;
            out.push_back(cur);
        }
        // advance the first n-1 digits like an odometer in base total+1
        std::size_t pos = n - 1;
        while (pos > 0) {
            --pos;
            if (++cur[pos] <= total) break;
            cur[pos] = 0;
            if (pos == 0) return out;
        }
        if (n == 1) return out;
    }
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

AssetModel random_model(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> mu(0.0, 0.12);
    std::uniform_real_distribution<double> sd(0.02, 0.3);
    std::uniform_real_distribution<double> rho(-0.4, 0.7);
    Matrix c = Matrix::identity(3);
    c(0, 1) = c(1, 0) = rho(gen);
    c(0, 2) = c(2, 0) = rho(gen);
    c(1, 2) = c(2, 1) = rho(gen);
    try {
        return validate_asset_model({"x", "y", "z"}, {mu(gen), mu(gen), mu(gen)},
                                    {sd(gen), sd(gen), sd(gen)}, c);
    } catch (const DomainError&) {
        return random_model(gen);  // rejected correlation draw; try again
    }
}

}  // namespace

TEST_CASE("the 5% three-asset grid has 231 points") {
    const auto grid = enumerate_grid(3, 0.05);
    CHECK(grid.size() == 231);
}

TEST_CASE("grid points are valid simplex points in ascending order") {
    const auto grid = enumerate_grid(3, 0.05);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double sum = 0.0;
        for (double w : grid[k].weights) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
            const double scaled = w / 0.05;
            CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        if (k > 0) CHECK(grid[k - 1].weights < grid[k].weights);
    }
}

TEST_CASE("grid cardinality matches the binomial formula and a second enumerator") {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (std::size_t m : {1, 2, 4, 5, 10, 20}) {
            const double step = 1.0 / static_cast<double>(m);
            const auto grid = enumerate_grid(n, step);
            CHECK(grid.size() == binomial(m + n - 1, n - 1));
            const auto counts = enumerate_counts(n, m);
            REQUIRE(grid.size() == counts.size());
            for (std::size_t k = 0; k < grid.size(); ++k)
                for (std::size_t i = 0; i < n; ++i)
                    CHECK(grid[k].weights[i] ==
                          static_cast<double>(counts[k][i]) / static_cast<double>(m));
        }
    }
}

TEST_CASE("grid enumeration rejects bad steps") {
    CHECK_THROWS_AS(enumerate_grid(3, 0.0), DomainError);
    CHECK_THROWS_AS(enumerate_grid(3, -0.1), DomainError);
    CHECK_THROWS_AS(enumerate_grid(3, 0.3), DomainError);  // 1/0.3 is not an integer
    CHECK_THROWS_AS(enumerate_grid(0, 0.5), DomainError);
    CHECK(enumerate_grid(1, 1.0).size() == 1);
    CHECK(enumerate_grid(1, 1.0)[0].weights[0] == 1.0);
}

TEST_CASE("portfolio returns on hand-checked values") {
    ScenarioSet one(2, 1, 2, 1.0, "t", 0);
    one.at(0, 0, 0) = 0.10;
    one.at(0, 0, 1) = -0.02;
    one.at(1, 0, 0) = 0.04;
    one.at(1, 0, 1) = 0.08;
    const auto r1 = portfolio_returns(Allocation{{0.25, 0.75}}, one);
    CHECK(r1[0] == Catch::Approx(0.01).margin(1e-15));
    CHECK(r1[1] == Catch::Approx(0.07).margin(1e-15));

    ScenarioSet two(1, 2, 2, 1.0, "t", 0);
    two.at(0, 0, 0) = 0.1;
    two.at(0, 0, 1) = -0.1;
    two.at(0, 1, 0) = 0.2;
    two.at(0, 1, 1) = 0.0;
    const auto r2 = portfolio_returns(Allocation{{0.5, 0.5}}, two);
    CHECK(r2[0] == Catch::Approx(0.1).margin(1e-14));  // (1+0)(1+0.1)-1

    CHECK_THROWS_AS(portfolio_returns(Allocation{{1.0}}, one), DomainError);
}

TEST_CASE("mean and deviation estimators on hand-checked values") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(sample_mean(x) == 3.0);
    CHECK(sample_std(x) == Catch::Approx(std::sqrt(2.5)).epsilon(1e-15));
}

TEST_CASE("objective evaluation flags feasibility against the floor") {
    // dyadic values: the mean is exactly 0.5, so the boundary test is sharp
    ScenarioSet set(4, 1, 1, 1.0, "t", 0);
    set.at(0, 0, 0) = 0.25;
    set.at(1, 0, 0) = 0.5;
    set.at(2, 0, 0) = 0.75;
    set.at(3, 0, 0) = 0.5;
    const Allocation all{{1.0}};
    CHECK(evaluate_objective(all, set, {0.25, 1.0}).feasible);
    CHECK(evaluate_objective(all, set, {0.5, 1.0}).feasible);  // mean >= m0 holds with equality
    CHECK(!evaluate_objective(all, set, {0.51, 1.0}).feasible);

    ScenarioSet tiny(1, 1, 1, 1.0, "t", 0);
    CHECK_THROWS_AS(evaluate_objective(all, tiny, {0.0, 1.0}), DomainError);
}

TEST_CASE("grid solver agrees with an exhaustive double-loop rewrite") {
    std::mt19937_64 gen(8675309);
    for (int inst = 0; inst < 5; ++inst) {
        const AssetModel model = random_model(gen);
        const auto set = generate_linear(model, 500, 1, 1.0, gen());
        const ObjectiveSpec spec{0.04, 0.05};
        const auto fast = solve_grid(set, spec);

        // independent scan: recompute everything from scratch
        const auto grid = enumerate_grid(3, 0.05);
        bool found = false;
        double best_sd = 0.0;
        std::vector<double> best_w;
        std::size_t feasible = 0;
        for (const auto& alloc : grid) {
            std::vector<double> rp(set.n_paths);
            for (std::size_t s = 0; s < set.n_paths; ++s) {
                double acc = 0.0;
                for (std::size_t j = 0; j < 3; ++j) acc += alloc.weights[j] * set.at(s, 0, j);
                rp[s] = acc;
            }
            double m = 0.0;
            for (double v : rp) m += v;
            m /= static_cast<double>(rp.size());
            if (m < spec.m0) continue;
            ++feasible;
            double s2 = 0.0;
            for (double v : rp) s2 += (v - m) * (v - m);
            const double sd = std::sqrt(s2 / static_cast<double>(rp.size() - 1));
            if (!found || sd < best_sd) {
                found = true;
                best_sd = sd;
                best_w = alloc.weights;
            }
        }

        REQUIRE(fast.feasible() == found);
        if (found) {
            CHECK(fast.objective == best_sd);
            CHECK(fast.best->weights == best_w);
            CHECK(fast.feasible_count == feasible);
        }
    }
}

TEST_CASE("ties resolve to the lexicographically smallest allocation") {
    // two clones: every mix has identical portfolio returns, all 21
    // allocations tie, so the first grid point (0, 1) must win
    Matrix c = Matrix::identity(2);
    c(0, 1) = c(1, 0) = 1.0;
    const AssetModel m = validate_asset_model({"a", "b"}, {0.06, 0.06}, {0.1, 0.1}, c);
    const auto set = generate_linear(m, 400, 1, 1.0, 55);
    const auto outcome = solve_grid(set, {0.0, 0.05});
    REQUIRE(outcome.feasible());
    CHECK(outcome.best->weights == std::vector<double>{0.0, 1.0});
    CHECK(outcome.feasible_count == 21);
}

TEST_CASE("an unreachable floor yields an infeasible outcome, not a throw") {
    const AssetModel m = validate_asset_model({"a"}, {0.02}, {0.05}, Matrix::identity(1));
    const auto set = generate_linear(m, 200, 1, 1.0, 77);
    const auto outcome = solve_grid(set, {0.5, 0.05});
    CHECK(!outcome.feasible());
    CHECK(!outcome.best.has_value());
    CHECK(outcome.feasible_count == 0);
}

TEST_CASE("population argmin agrees with a brute-force recomputation") {
    std::mt19937_64 gen(24601);
    for (int inst = 0; inst < 10; ++inst) {
        const AssetModel model = random_model(gen);
        const ObjectiveSpec spec{0.03, 0.05};
        OptimizationOutcome exact;
        try {
            exact = exact_moment_argmin(model, spec);
        } catch (const DomainError&) {
            continue;  // floor unreachable for this draw
        }
        const auto grid = enumerate_grid(3, 0.05);
        bool found = false;
        double best = 0.0;
        std::vector<double> w;
        for (const auto& alloc : grid) {
            double mean = 0.0;
            for (std::size_t i = 0; i < 3; ++i) mean += alloc.weights[i] * model.mu[i];
            if (mean < spec.m0) continue;
            double var = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    var += alloc.weights[i] * alloc.weights[j] * model.sigma[i] *
                           model.sigma[j] * model.corr(i, j);
            const double sd = std::sqrt(var);
            if (!found || sd < best) {
                found = true;
                best = sd;
                w = alloc.weights;
            }
        }
        REQUIRE(found);
        CHECK(exact.objective == best);
        CHECK(exact.best->weights == w);
    }
}

TEST_CASE("large samples land on the population argmin") {
    Matrix c = Matrix::identity(3);
    c(0, 1) = c(1, 0) = 0.25;
    c(0, 2) = c(2, 0) = 0.05;
    c(1, 2) = c(2, 1) = 0.15;
    const AssetModel model = validate_asset_model({"cash", "bonds", "equity"},
                                                  {0.045, 0.052, 0.078},
                                                  {0.018, 0.042, 0.165}, c);
    const ObjectiveSpec spec{0.04, 0.05};
    const auto exact = exact_moment_argmin(model, spec);
    const auto set = generate_linear(model, 200000, 1, 1.0, 314159);
    const auto sampled = solve_grid(set, spec);
    REQUIRE(sampled.feasible());
    CHECK(sampled.best->weights == exact.best->weights);
    CHECK(sampled.objective == Catch::Approx(exact.objective).margin(5e-4));
}

TEST_CASE("quadratic oracle on hand-checked values") {
    const auto [x, f] = quadratic_oracle({1.0, 2.0, 3.0, 4.0});
    CHECK(x == 2.5);
    CHECK(f == 1.25);
    const auto [x1, f1] = quadratic_oracle({7.0});
    CHECK(x1 == 7.0);
    CHECK(f1 == 0.0);
    CHECK_THROWS_AS(quadratic_oracle({}), DomainError);
}

TEST_CASE("the sample mean minimizes the empirical quadratic loss") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> dist(1.0, 2.0);
    std::vector<double> sample(400);
    for (double& v : sample) v = dist(gen);
    const auto [x_star, f_star] = quadratic_oracle(sample);
    auto loss = [&](double x) {
        double s = 0.0;
        for (double v : sample) s += (x - v) * (x - v);
        return s / static_cast<double>(sample.size());
    };
    CHECK(loss(x_star) == Catch::Approx(f_star).margin(1e-12));
    for (double delta : {1e-3, 0.1, 1.0}) {
        CHECK(loss(x_star + delta) > f_star);
        CHECK(loss(x_star - delta) > f_star);
    }
}
