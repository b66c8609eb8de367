#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/grid.hpp"
#include "compidx/text.hpp"

namespace compidx {

/// Divisor convention for dispersion and skewness. Population (divide by n)
/// treats the country set as the whole population of interest.
enum class Dispersion { population, sample };

inline const char* to_string(Dispersion d) {
    return d == Dispersion::population ? "population" : "sample";
}

struct ColumnStats {
    std::string indicator_id;
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;
    /// Empty when std_dev is zero (or, for the sample variant, n < 3).
    std::optional<double> skewness;
};

/// Mean, median, standard deviation and moment skewness over the present values.
///
/// Population variant: sd = sqrt(m2), g1 = m3 / m2^(3/2) with central moments
/// divided by n. Sample variant: sd divides by n - 1 and skewness is the
/// adjusted G1 = g1 * sqrt(n (n - 1)) / (n - 2).
inline ColumnStats column_stats(std::span<const std::optional<double>> column,
                                Dispersion dispersion = Dispersion::population,
                                std::string indicator_id = {}) {
    std::vector<double> xs;
    xs.reserve(column.size());
    for (const auto& v : column)
        if (v) xs.push_back(*v);
    const std::size_t n = xs.size();
    if (n < 2)
        throw Error(ErrorKind::insufficient_data,
                    "indicator '" + indicator_id + "' has " + std::to_string(n) +
                        " present value(s); at least 2 are required");

    ColumnStats s;
    s.indicator_id = std::move(indicator_id);
    s.n = n;
    const double dn = static_cast<double>(n);

    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / dn;

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    // Exact zero spread for constant columns, independent of rounding in the mean.
    if (sorted.front() == sorted.back()) {
        s.mean = sorted.front();
        s.std_dev = 0.0;
        return s;
    }

    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : xs) {
        const double d = x - s.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= dn;
    m3 /= dn;
    const double g1 = m3 / std::pow(m2, 1.5);
    if (dispersion == Dispersion::population) {
        s.std_dev = std::sqrt(m2);
        s.skewness = g1;
    } else {
        s.std_dev = std::sqrt(m2 * dn / (dn - 1.0));
        if (n >= 3) s.skewness = g1 * std::sqrt(dn * (dn - 1.0)) / (dn - 2.0);
    }
    return s;
}

enum class Method { z_score, min_max };

inline const char* to_string(Method m) { return m == Method::z_score ? "zscore" : "minmax"; }

inline Method parse_method(std::string_view s) {
    if (s == "zscore" || s == "z_score") return Method::z_score;
    if (s == "minmax" || s == "min_max") return Method::min_max;
    throw Error(ErrorKind::argument, "unknown conversion method '" + std::string(s) + "'");
}

struct Bounds {
    double min = 0.0;
    double max = 1.0;
};

using BoundsMap = std::map<std::string, Bounds, std::less<>>;

struct ConvertedMatrix {
    std::vector<CountryRecord> countries;
    std::vector<IndicatorSpec> indicators;
    MaybeGrid values;
    /// Raw-column statistics. Always present for z-scores; for min-max they are
    /// informational and empty where a column has fewer than 2 values.
    std::vector<std::optional<ColumnStats>> per_indicator_stats;
    Method method = Method::z_score;
    Dispersion dispersion = Dispersion::population;
    /// Per-indicator bounds, min-max only.
    std::vector<Bounds> bounds;
    /// Per-indicator count of values clamped into [0, 1], min-max only.
    std::vector<std::size_t> clamp_counts;

    [[nodiscard]] std::size_t total_clamps() const {
        std::size_t t = 0;
        for (auto c : clamp_counts) t += c;
        return t;
    }

    [[nodiscard]] std::size_t coverage(std::size_t row) const {
        const auto r = values.row(row);
        return static_cast<std::size_t>(
            std::count_if(r.begin(), r.end(), [](const auto& v) { return v.has_value(); }));
    }

    [[nodiscard]] std::optional<std::size_t> find_country(std::string_view code) const {
        for (std::size_t i = 0; i < countries.size(); ++i)
            if (countries[i].code == code) return i;
        return std::nullopt;
    }
};

/// Distance from the column mean in units of the column standard deviation.
inline ConvertedMatrix z_convert(const DataMatrix& matrix,
                                 Dispersion dispersion = Dispersion::population) {
    ConvertedMatrix out;
    out.countries = matrix.countries;
    out.indicators = matrix.indicators;
    out.method = Method::z_score;
    out.dispersion = dispersion;
    out.values = MaybeGrid(matrix.country_count(), matrix.indicator_count());
    for (std::size_t j = 0; j < matrix.indicator_count(); ++j) {
        const auto column = matrix.values.column(j);
        const auto stats = column_stats(column, dispersion, matrix.indicators[j].id);
        if (stats.std_dev == 0.0)
            throw Error(ErrorKind::degenerate, "indicator '" + matrix.indicators[j].id +
                                                   "' has zero standard deviation");
        for (std::size_t i = 0; i < column.size(); ++i)
            if (column[i]) out.values(i, j) = (*column[i] - stats.mean) / stats.std_dev;
        out.per_indicator_stats.emplace_back(stats);
    }
    return out;
}

/// Position between fixed per-indicator bounds, clamped into [0, 1]. Each
/// country's value depends only on its own raw value and the bounds.
inline ConvertedMatrix minmax_convert(const DataMatrix& matrix, const BoundsMap& bounds) {
    ConvertedMatrix out;
    out.countries = matrix.countries;
    out.indicators = matrix.indicators;
    out.method = Method::min_max;
    out.values = MaybeGrid(matrix.country_count(), matrix.indicator_count());
    out.clamp_counts.assign(matrix.indicator_count(), 0);
    for (std::size_t j = 0; j < matrix.indicator_count(); ++j) {
        const auto& id = matrix.indicators[j].id;
        const auto it = bounds.find(id);
        if (it == bounds.end())
            throw Error(ErrorKind::bounds, "no bounds given for indicator '" + id + "'");
        const Bounds b = it->second;
        if (!(b.max > b.min))
            throw Error(ErrorKind::bounds, "indicator '" + id + "': max must exceed min");
        out.bounds.push_back(b);

        const auto column = matrix.values.column(j);
        for (std::size_t i = 0; i < column.size(); ++i) {
            if (!column[i]) continue;
            double y = (*column[i] - b.min) / (b.max - b.min);
            if (y < 0.0 || y > 1.0) {
                y = std::clamp(y, 0.0, 1.0);
                ++out.clamp_counts[j];
            }
            out.values(i, j) = y;
        }
        try {
            out.per_indicator_stats.emplace_back(column_stats(column, Dispersion::population, id));
        } catch (const Error&) {
            out.per_indicator_stats.emplace_back(std::nullopt);
        }
    }
    return out;
}

/// JSON object mapping indicator id to {"min": x, "max": y}.
inline BoundsMap parse_bounds_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::schema, std::string("bounds file: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::schema, "bounds file must be a JSON object");
    BoundsMap out;
    for (const auto& [id, v] : doc.items()) {
        if (!v.is_object() || !v.contains("min") || !v.contains("max") ||
            !v["min"].is_number() || !v["max"].is_number())
            throw Error(ErrorKind::schema, "bounds for '" + id + "' need numeric 'min' and 'max'");
        Bounds b{v["min"].get<double>(), v["max"].get<double>()};
        if (!(b.max > b.min))
            throw Error(ErrorKind::bounds, "indicator '" + id + "': max must exceed min");
        out.emplace(id, b);
    }
    return out;
}

/// Converted values in the ingestion schema, full precision.
inline std::string write_converted_csv(const ConvertedMatrix& conv,
                                       std::span<const std::string> comment_lines = {}) {
    DataMatrix shim;
    shim.countries = conv.countries;
    shim.indicators = conv.indicators;
    shim.values = conv.values;
    return write_dataset_csv(shim, comment_lines);
}

/// Reads a file written by write_converted_csv. The method is taken from a
/// "method=..." token in the comment header when present.
inline ConvertedMatrix read_converted_csv(std::string_view csv_text,
                                          std::span<const IndicatorSpec> specs) {
    auto parsed = detail::parse_panel_csv(csv_text, specs, true);
    ConvertedMatrix conv;
    conv.countries = std::move(parsed.countries);
    conv.indicators.assign(specs.begin(), specs.end());
    conv.values = std::move(parsed.values);
    conv.per_indicator_stats.assign(specs.size(), std::nullopt);
    for (const auto& line : parsed.comments) {
        const auto pos = line.find("method=");
        if (pos == std::string::npos) continue;
        const auto end = line.find_first_of(" \t", pos);
        conv.method = parse_method(line.substr(pos + 7, end == std::string::npos ? end : end - pos - 7));
    }
    return conv;
}

}  // namespace compidx
