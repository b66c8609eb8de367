#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "compidx/compidx.hpp"

namespace fixtures {

using compidx::CountryRecord;
using compidx::DataMatrix;
using compidx::Domain;
using compidx::IndicatorSpec;
using compidx::MaybeGrid;

using Row = std::vector<std::optional<double>>;

/// "AAA", "AAB", ... deterministic 3-letter codes.
inline std::string code_for(std::size_t i) {
    std::string c(3, 'A');
    c[2] = static_cast<char>('A' + i % 26);
    c[1] = static_cast<char>('A' + (i / 26) % 26);
    c[0] = static_cast<char>('A' + (i / 676) % 26);
    return c;
}

/// k generic indicators, domains assigned in contiguous blocks.
inline std::vector<IndicatorSpec> generic_specs(std::size_t k) {
    std::vector<IndicatorSpec> specs;
    for (std::size_t j = 0; j < k; ++j) {
        const Domain d = j * 3 < k ? Domain::precondition : (j * 3 < 2 * k ? Domain::resource : Domain::output);
        specs.push_back({"ind" + std::to_string(j), "indicator " + std::to_string(j), d, "units"});
    }
    return specs;
}

inline DataMatrix panel(const std::vector<Row>& rows, std::vector<IndicatorSpec> specs) {
    std::vector<CountryRecord> countries;
    MaybeGrid grid(rows.size(), specs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        countries.push_back({code_for(i), "Country " + code_for(i), 1.0e6 * static_cast<double>(i + 1),
                             1000.0 * static_cast<double>(i + 1)});
        for (std::size_t j = 0; j < specs.size(); ++j) grid(i, j) = rows[i][j];
    }
    return compidx::make_matrix(std::move(countries), std::move(specs), std::move(grid));
}

inline DataMatrix panel(const std::vector<Row>& rows) {
    return panel(rows, generic_specs(rows.empty() ? 0 : rows.front().size()));
}

/// Random complete panel of continuous, nonnegative values (ties have probability zero).
inline DataMatrix random_panel(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::uniform_real_distribution<double> scale(0.5, 1000.0);
    std::vector<Row> rows(n, Row(k));
    for (std::size_t j = 0; j < k; ++j) {
        const double s = scale(rng);
        std::exponential_distribution<double> dist(1.0);
        for (std::size_t i = 0; i < n; ++i) rows[i][j] = s * dist(rng);
    }
    return panel(rows);
}

/// Fixed 5-country x 8-indicator panel on the reference indicators, with
/// two missing cells (KOR/patents and KEN/enrolment).
inline DataMatrix five_by_eight() {
    const std::vector<Row> rows = {
        {14.2, 24000.0, 2900.0, 12.5, 2.1, 1500.0, 120.0, 640.0},
        {9.8, 13500.0, 1450.0, 4.1, 0.95, 420.0, std::nullopt, 210.0},
        {6.3, 8200.0, 820.0, 1.6, 0.55, 160.0, 3.2, 95.5},
        {std::nullopt, 3100.0, 310.0, 0.9, 0.21, 55.0, 0.4, 22.0},
        {11.7, 19800.0, 2300.0, 30.2, 1.75, 980.0, 64.0, 430.0},
    };
    auto m = panel(rows, compidx::reference_indicator_specs());
    const char* codes[] = {"NLD", "KOR", "BRA", "KEN", "FIN"};
    const char* names[] = {"Netherlands", "Korea, Republic of", "Brazil", "Kenya", "Finland"};
    for (std::size_t i = 0; i < 5; ++i) {
        m.countries[i].code = codes[i];
        m.countries[i].name = names[i];
    }
    return m;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace fixtures
