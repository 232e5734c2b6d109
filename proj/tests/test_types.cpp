#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "esglab/types.hpp"

using namespace esglab;

namespace {

Matrix corr3(double ab, double ac, double bc) {
    Matrix c = Matrix::identity(3);
    c(0, 1) = c(1, 0) = ab;
    c(0, 2) = c(2, 0) = ac;
    c(1, 2) = c(2, 1) = bc;
    return c;
}

}  // namespace

TEST_CASE("asset model validation accepts a sane model") {
    const auto m = validate_asset_model({"a", "b", "c"}, {0.04, 0.05, 0.08},
                                        {0.02, 0.05, 0.18}, corr3(0.3, 0.1, 0.2));
    CHECK(m.size() == 3);
    CHECK(m.corr(0, 1) == 0.3);
    CHECK(m.corr(2, 2) == 1.0);
}

TEST_CASE("asset model validation rejects malformed input") {
    const Matrix ok = corr3(0.3, 0.1, 0.2);
    CHECK_THROWS_AS(validate_asset_model({}, {}, {}, Matrix()), DomainError);
    CHECK_THROWS_AS(validate_asset_model({"a", "b"}, {0.1}, {0.1, 0.1}, Matrix::identity(2)),
                    DomainError);
    CHECK_THROWS_AS(
        validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, -0.2, 0.1}, ok),
        DomainError);
    CHECK_THROWS_AS(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                         Matrix::identity(2)),
                    DomainError);

    Matrix asym = corr3(0.3, 0.1, 0.2);
    asym(0, 1) = 0.31;
    CHECK_THROWS_WITH(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                           asym),
                      Catch::Matchers::ContainsSubstring("(0,1)"));

    Matrix diag = corr3(0.3, 0.1, 0.2);
    diag(1, 1) = 0.99;
    CHECK_THROWS_AS(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                         diag),
                    DomainError);

    CHECK_THROWS_AS(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                         corr3(1.2, 0.1, 0.2)),
                    DomainError);
}

TEST_CASE("asset model validation rejects indefinite correlations") {
    // eigenvalues (-0.8, 1.9, 1.9); far below any tolerance
    CHECK_THROWS_AS(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                         corr3(0.9, -0.9, 0.9)),
                    DomainError);
    // smallest eigenvalue about -6.7e-3: still clearly indefinite
    CHECK_THROWS_AS(validate_asset_model({"a", "b", "c"}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1},
                                         corr3(0.7, 0.9, 0.95)),
                    DomainError);
}

TEST_CASE("perfectly correlated assets pass validation") {
    const auto m = validate_asset_model({"a", "a2", "b"}, {0.05, 0.05, 0.07},
                                        {0.1, 0.1, 0.2}, corr3(1.0, 0.4, 0.4));
    CHECK(m.corr(0, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(m.corr(0, 0) == 1.0);
    CHECK(max_symmetry_error(m.corr) == 0.0);
}

TEST_CASE("PSD correlations pass through regularization untouched") {
    const Matrix in = corr3(0.6, -0.2, 0.35);
    const auto m = validate_asset_model({"a", "b", "c"}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, in);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(m.corr(i, j) == in(i, j));
}

TEST_CASE("a hair-below-PSD correlation is clipped to a clean one") {
    // spectral assembly with eigenvalues {2.1, 0.9, -5e-11} on a fixed
    // orthonormal basis, then rescaled to unit diagonal; the tiny negative
    // survives the congruence, so this always takes the repair path
    const double s3 = 1.0 / std::sqrt(3.0), s2 = 1.0 / std::sqrt(2.0), s6 = 1.0 / std::sqrt(6.0);
    const double basis[3][3] = {{s3, s3, s3}, {s2, -s2, 0.0}, {s6, s6, -2.0 * s6}};
    const double lambda[3] = {2.1, 0.9, -5e-11};
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += lambda[k] * basis[k][i] * basis[k][j];
            a(i, j) = s;
        }
    Matrix corr(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) corr(i, j) = a(i, j) / std::sqrt(a(i, i) * a(j, j));
    for (std::size_t i = 0; i < 3; ++i) corr(i, i) = 1.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) corr(j, i) = corr(i, j);
    REQUIRE(eigen_symmetric(corr).values.back() < 0.0);

    const auto m = validate_asset_model({"a", "b", "c"}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, corr);
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.corr(i, i) == 1.0);
    CHECK(max_symmetry_error(m.corr) == 0.0);
    CHECK(eigen_symmetric(m.corr).values.back() >= -1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(m.corr(i, j) == Catch::Approx(corr(i, j)).margin(1e-8));
}

TEST_CASE("scenario set storage and checks") {
    ScenarioSet set(2, 3, 2, 1.0, "test", 7);
    CHECK(set.returns.size() == 12);
    set.at(1, 2, 1) = 0.25;
    CHECK(set.at(1, 2, 1) == 0.25);
    CHECK_NOTHROW(check_scenario_set(set));

    set.at(0, 0, 0) = -1.0;
    CHECK_THROWS_AS(check_scenario_set(set), DomainError);
    set.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(check_scenario_set(set), DomainError);

    ScenarioSet bad;
    CHECK_THROWS_AS(check_scenario_set(bad), DomainError);
}

TEST_CASE("branching vector validation") {
    CHECK_NOTHROW(validate_branching({5, 3, 3, 2}));
    CHECK_NOTHROW(validate_branching({}));
    CHECK_THROWS_AS(validate_branching({3, 0, 2}), DomainError);
}
