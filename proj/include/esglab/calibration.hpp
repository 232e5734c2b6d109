#pragma once

// Historical index levels -> arithmetic returns -> annualized model
// parameters. Input is a strict CSV: header `date,<name1>,...,<nameN>`,
// ISO dates, positive levels, no gaps.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "esglab/types.hpp"

namespace esglab {

struct PriceHistory {
    std::vector<std::string> names;
    std::vector<std::string> dates;  // strictly increasing ISO dates
    Matrix levels;                   // row = date, col = asset, all > 0
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace detail

inline PriceHistory parse_history(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError(source_name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "date")
        throw DomainError(source_name + ": header must be 'date,<name1>,...'");

    PriceHistory h;
    h.names.assign(header.begin() + 1, header.end());
    const std::size_t n = h.names.size();
    std::vector<double> levels;
    std::size_t row = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != n + 1)
            throw DomainError(source_name + ": malformed row " + std::to_string(row) +
                              " (expected " + std::to_string(n + 1) + " cells)");
        if (!detail::valid_iso_date(cells[0]))
            throw DomainError(source_name + ": bad date at row " + std::to_string(row));
        if (!h.dates.empty() && cells[0] <= h.dates.back())
            throw DomainError(source_name + ": non-increasing dates at row " + std::to_string(row));
        h.dates.push_back(cells[0]);
        for (std::size_t i = 0; i < n; ++i) {
            if (cells[i + 1].empty())
                throw DomainError(source_name + ": missing cell at row " + std::to_string(row));
            double v = 0.0;
            try {
                std::size_t pos = 0;
                v = std::stod(cells[i + 1], &pos);
                if (pos != cells[i + 1].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw DomainError(source_name + ": malformed number at row " + std::to_string(row));
            }
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError(source_name + ": non-positive level at row " + std::to_string(row));
            levels.push_back(v);
        }
    }
    if (h.dates.empty()) throw DomainError(source_name + ": no data rows");
    h.levels = Matrix(h.dates.size(), n);
    h.levels.data = std::move(levels);
    return h;
}

inline PriceHistory load_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open history file: " + path);
    return parse_history(in, path);
}

// entry[t][i] = levels[t+1][i] / levels[t][i] - 1
inline Matrix to_returns(const PriceHistory& history) {
    if (history.dates.size() < 2) throw DomainError("to_returns: need at least 2 dates");
    const std::size_t p = history.dates.size() - 1;
    const std::size_t n = history.names.size();
    Matrix r(p, n);
    for (std::size_t t = 0; t < p; ++t)
        for (std::size_t i = 0; i < n; ++i)
            r(t, i) = history.levels(t + 1, i) / history.levels(t, i) - 1.0;
    return r;
}

// Empirical annualized model: mean scales with periods_per_year, the
// volatility with its square root, sample correlation as observed (then
// run through the usual near-PSD repair).
inline AssetModel calibrate(const Matrix& returns, std::size_t periods_per_year,
                            std::vector<std::string> names) {
    const std::size_t p = returns.rows;
    const std::size_t n = returns.cols;
    if (p < 2) throw DomainError("calibrate: need at least 2 return rows");
    if (names.size() != n) throw DomainError("calibrate: name count mismatch");
    if (periods_per_year < 1) throw DomainError("calibrate: periods_per_year must be >= 1");

    std::vector<double> mean(n, 0.0);
    for (std::size_t t = 0; t < p; ++t)
        for (std::size_t i = 0; i < n; ++i) mean[i] += returns(t, i);
    for (std::size_t i = 0; i < n; ++i) mean[i] /= static_cast<double>(p);

    Matrix cov(n, n);
    for (std::size_t t = 0; t < p; ++t)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cov(i, j) += (returns(t, i) - mean[i]) * (returns(t, j) - mean[j]);
    for (double& v : cov.data) v /= static_cast<double>(p - 1);

    for (std::size_t i = 0; i < n; ++i)
        if (cov(i, i) <= 0.0)
            throw DomainError("calibrate: asset '" + names[i] +
                              "' has zero variance; correlation undefined");

    Matrix corr(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            corr(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
    for (std::size_t i = 0; i < n; ++i) corr(i, i) = 1.0;

    const double ppy = static_cast<double>(periods_per_year);
    std::vector<double> mu(n), sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = ppy * mean[i];
        sigma[i] = std::sqrt(ppy) * std::sqrt(cov(i, i));
    }
    return validate_asset_model(std::move(names), std::move(mu), std::move(sigma), corr);
}

inline AssetModel calibrate(const PriceHistory& history, std::size_t periods_per_year) {
    return calibrate(to_returns(history), periods_per_year, history.names);
}

}  // namespace esglab
