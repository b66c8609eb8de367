#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/grid.hpp"
#include "compidx/normalize.hpp"
#include "compidx/published_tables.hpp"
#include "compidx/text.hpp"

namespace compidx {

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

/// Minimum number of countries with both values present for a correlation cell.
inline constexpr std::size_t kMinCorrelationOverlap = 3;

/// Pearson R over the rows where both columns are present. Empty when the
/// overlap is below kMinCorrelationOverlap or either side is constant on it.
inline std::optional<double> pearson(std::span<const std::optional<double>> a,
                                     std::span<const std::optional<double>> b) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        if (a[i] && b[i]) pairs.emplace_back(*a[i], *b[i]);
    if (pairs.size() < kMinCorrelationOverlap) return std::nullopt;

    const double n = static_cast<double>(pairs.size());
    double ma = 0.0, mb = 0.0;
    for (const auto& [x, y] : pairs) {
        ma += x;
        mb += y;
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (const auto& [x, y] : pairs) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Pairwise-complete Pearson correlation between the columns of `values`.
/// The diagonal is 1; unavailable cells are empty.
inline MaybeGrid correlation_matrix(const MaybeGrid& values) {
    const std::size_t k = values.cols();
    MaybeGrid r(k, k);
    std::vector<std::vector<std::optional<double>>> cols;
    for (std::size_t j = 0; j < k; ++j) cols.push_back(values.column(j));
    for (std::size_t a = 0; a < k; ++a) {
        r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            r(a, b) = pearson(cols[a], cols[b]);
            r(b, a) = r(a, b);
        }
    }
    return r;
}

inline MaybeGrid correlation_matrix(const DataMatrix& m) { return correlation_matrix(m.values); }
inline MaybeGrid correlation_matrix(const ConvertedMatrix& m) {
    return correlation_matrix(m.values);
}

// ---------------------------------------------------------------------------
// Ranges and implied extremes
// ---------------------------------------------------------------------------

struct ValueRange {
    double min = 0.0;
    double max = 0.0;
};

/// Min and max of the present converted values per indicator; empty for an all-missing column.
inline std::vector<std::optional<ValueRange>> range_table(const ConvertedMatrix& conv) {
    std::vector<std::optional<ValueRange>> out;
    for (std::size_t j = 0; j < conv.indicators.size(); ++j) {
        std::optional<ValueRange> r;
        for (std::size_t i = 0; i < conv.countries.size(); ++i) {
            const auto& v = conv.values(i, j);
            if (!v) continue;
            if (!r) {
                r = ValueRange{*v, *v};
            } else {
                r->min = std::min(r->min, *v);
                r->max = std::max(r->max, *v);
            }
        }
        out.push_back(r);
    }
    return out;
}

struct ImpliedExtremesRow {
    std::string id;
    double implied_raw_min = 0.0;
    double implied_raw_max = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct ImpliedExtremesReport {
    std::vector<ImpliedExtremesRow> rows;

    [[nodiscard]] std::size_t pass_count() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.passed; }));
    }
    [[nodiscard]] bool all_passed() const { return pass_count() == rows.size(); }
};

/// Relative tolerance (in standard deviations) absorbing 3-decimal table rounding.
inline constexpr double kImpliedMinTolerance = 0.01;

/// Reconstructs raw extremes from a (mean, sd) table and a converted-range
/// table: raw = mean + converted * sd. Raw values are nonnegative, so an
/// indicator passes iff its implied minimum is >= -0.01 sd.
inline ImpliedExtremesReport implied_extremes_check(std::span<const PublishedStatsRow> stats,
                                                    std::span<const PublishedRangeRow> ranges) {
    if (stats.size() != ranges.size())
        throw Error(ErrorKind::argument, "statistics and range tables list different indicators");
    ImpliedExtremesReport report;
    for (const auto& s : stats) {
        const auto it = std::find_if(ranges.begin(), ranges.end(),
                                     [&](const PublishedRangeRow& r) { return r.id == s.id; });
        if (it == ranges.end())
            throw Error(ErrorKind::argument,
                        "indicator '" + s.id + "' has no row in the converted range table");
        ImpliedExtremesRow row;
        row.id = s.id;
        row.implied_raw_min = s.mean + it->conv_min * s.std_dev;
        row.implied_raw_max = s.mean + it->conv_max * s.std_dev;
        row.tolerance = kImpliedMinTolerance * s.std_dev;
        row.passed = row.implied_raw_min >= -row.tolerance;
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

struct HistogramBin {
    double lower_edge = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [min, max]; all bins are right-open except the last.
/// A zero-width range yields a single bin holding every value.
inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bin_count) {
    if (values.empty()) throw Error(ErrorKind::argument, "histogram of an empty sample");
    if (bin_count < 1) throw Error(ErrorKind::argument, "histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi) return {{lo, values.size()}};

    const double width = (hi - lo) / static_cast<double>(bin_count);
    std::vector<HistogramBin> bins(bin_count);
    for (std::size_t b = 0; b < bin_count; ++b) bins[b].lower_edge = lo + width * static_cast<double>(b);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bin_count));
        if (b >= bin_count) b = bin_count - 1;
        ++bins[b].count;
    }
    return bins;
}

inline std::string histogram_csv(std::span<const HistogramBin> bins) {
    std::string out = "lower_edge,count\n";
    for (const auto& b : bins) out += text::format_exact(b.lower_edge) + "," + std::to_string(b.count) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Consistency report
// ---------------------------------------------------------------------------

enum class FlagKind { high_skew, substitute_pair, complement_pair, asymmetric_range, degenerate };

inline const char* to_string(FlagKind k) {
    switch (k) {
        case FlagKind::high_skew: return "high_skew";
        case FlagKind::substitute_pair: return "substitute_pair";
        case FlagKind::complement_pair: return "complement_pair";
        case FlagKind::asymmetric_range: return "asymmetric_range";
        case FlagKind::degenerate: return "degenerate";
    }
    return "?";
}

struct Flag {
    FlagKind kind = FlagKind::degenerate;
    std::string subject;
    std::string detail;
    /// R, skewness or max/min ratio, depending on kind.
    std::optional<double> value;
};

struct Thresholds {
    double corr = 0.9;
    double skew = 2.0;
    double range_ratio = 3.0;
};

inline const std::string kTemporalConsistencyNote =
    "consistency through time: not assessed; requires multi-year input, the panel holds a single "
    "cross-section";

struct DiagnosticsReport {
    std::vector<IndicatorSpec> indicators;
    std::vector<ColumnStats> summary;
    /// indicators x indicators; empty when no country-level data was supplied.
    MaybeGrid correlation;
    std::vector<std::optional<ValueRange>> ranges;
    std::vector<Flag> flags;
    std::optional<ImpliedExtremesReport> implied_extremes;
    std::string temporal_consistency = kTemporalConsistencyNote;

    [[nodiscard]] std::size_t count(FlagKind k) const {
        return static_cast<std::size_t>(
            std::count_if(flags.begin(), flags.end(), [k](const Flag& f) { return f.kind == k; }));
    }
};

inline std::vector<Flag> correlation_flags(std::span<const IndicatorSpec> indicators,
                                           const MaybeGrid& corr, const Thresholds& t) {
    std::vector<Flag> out;
    for (std::size_t a = 0; a < corr.rows(); ++a) {
        for (std::size_t b = a + 1; b < corr.cols(); ++b) {
            const auto& r = corr(a, b);
            if (!r) continue;
            const std::string subject = indicators[a].id + "/" + indicators[b].id;
            if (*r >= t.corr)
                out.push_back({FlagKind::substitute_pair, subject,
                               "R = " + text::format_fixed(*r, 3) + ": possible double counting", *r});
            else if (*r <= -t.corr)
                out.push_back({FlagKind::complement_pair, subject,
                               "R = " + text::format_fixed(*r, 3) + ": indicators cancel out", *r});
        }
    }
    return out;
}

inline std::vector<Flag> skew_flags(std::span<const ColumnStats> summary, const Thresholds& t) {
    std::vector<Flag> out;
    for (const auto& s : summary) {
        if (s.skewness && std::abs(*s.skewness) >= t.skew)
            out.push_back({FlagKind::high_skew, s.indicator_id,
                           "skewness " + text::format_fixed(*s.skewness, 3), *s.skewness});
    }
    return out;
}

/// Flags ranges whose upper excursion dominates the lower one: |max| / |min| >= ratio.
inline std::vector<Flag> range_flags(std::span<const IndicatorSpec> indicators,
                                     std::span<const std::optional<ValueRange>> ranges,
                                     const Thresholds& t) {
    std::vector<Flag> out;
    for (std::size_t j = 0; j < ranges.size(); ++j) {
        if (!ranges[j]) continue;
        const double lo = std::abs(ranges[j]->min);
        const double hi = std::abs(ranges[j]->max);
        const double ratio = lo > 0.0 ? hi / lo
                                      : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ratio >= t.range_ratio)
            out.push_back({FlagKind::asymmetric_range, indicators[j].id,
                           "range " + text::format_fixed(ranges[j]->min, 3) + " .. " +
                               text::format_fixed(ranges[j]->max, 3) + ", |max|/|min| = " +
                               text::format_fixed(ratio, 2),
                           ratio});
    }
    return out;
}

/// Consistency diagnostics of a converted panel: raw-column summary,
/// correlations of the converted columns, converted ranges and flags.
inline DiagnosticsReport consistency_check(const ConvertedMatrix& conv,
                                           const Thresholds& thresholds = {}) {
    DiagnosticsReport rep;
    rep.indicators = conv.indicators;
    for (std::size_t j = 0; j < conv.indicators.size(); ++j) {
        const auto& s = j < conv.per_indicator_stats.size() ? conv.per_indicator_stats[j]
                                                             : std::optional<ColumnStats>{};
        if (!s) {
            rep.flags.push_back({FlagKind::degenerate, conv.indicators[j].id,
                                 "fewer than 2 present raw values", std::nullopt});
            continue;
        }
        if (s->std_dev == 0.0)
            rep.flags.push_back({FlagKind::degenerate, conv.indicators[j].id,
                                 "zero standard deviation", std::nullopt});
        rep.summary.push_back(*s);
    }
    rep.correlation = correlation_matrix(conv.values);
    rep.ranges = range_table(conv);

    auto add = [&rep](std::vector<Flag> more) {
        rep.flags.insert(rep.flags.end(), more.begin(), more.end());
    };
    add(skew_flags(rep.summary, thresholds));
    add(correlation_flags(rep.indicators, rep.correlation, thresholds));
    add(range_flags(rep.indicators, rep.ranges, thresholds));
    return rep;
}

/// The same diagnostics built from published summary tables alone: no
/// correlations, but skew and range flags plus the implied-extremes check.
inline DiagnosticsReport published_tables_report(std::span<const PublishedStatsRow> stats,
                                                 std::span<const PublishedRangeRow> ranges,
                                                 const Thresholds& thresholds = {}) {
    DiagnosticsReport rep;
    rep.implied_extremes = implied_extremes_check(stats, ranges);
    for (const auto& s : stats) {
        rep.indicators.push_back({s.id, s.name, s.domain, "", Direction::higher_is_better});
        ColumnStats cs;
        cs.indicator_id = s.id;
        cs.mean = s.mean;
        cs.median = s.median;
        cs.std_dev = s.std_dev;
        cs.skewness = s.skewness;
        rep.summary.push_back(cs);
        const auto it = std::find_if(ranges.begin(), ranges.end(),
                                     [&](const PublishedRangeRow& r) { return r.id == s.id; });
        rep.ranges.emplace_back(ValueRange{it->conv_min, it->conv_max});
    }
    auto skew = skew_flags(rep.summary, thresholds);
    auto asym = range_flags(rep.indicators, rep.ranges, thresholds);
    rep.flags.insert(rep.flags.end(), skew.begin(), skew.end());
    rep.flags.insert(rep.flags.end(), asym.begin(), asym.end());
    return rep;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// "name: mean, median, sd, skewness" with 2/2/2/3 decimals and no leading zero.
inline std::string format_stats_row(std::string_view name, const ColumnStats& s) {
    return std::string(name) + ": " + text::format_compact(s.mean, 2) + ", " +
           text::format_compact(s.median, 2) + ", " + text::format_compact(s.std_dev, 2) + ", " +
           (s.skewness ? text::format_compact(*s.skewness, 3) : std::string("undefined"));
}

/// "name: min, max" with 3 decimals and no leading zero.
inline std::string format_range_row(std::string_view name, const ValueRange& r) {
    return std::string(name) + ": " + text::format_compact(r.min, 3) + ", " +
           text::format_compact(r.max, 3);
}

inline std::string diagnostics_to_text(const DiagnosticsReport& rep) {
    std::string out;
    const auto name_of = [&](std::string_view id) -> std::string {
        for (const auto& s : rep.indicators)
            if (s.id == id) return s.name.empty() ? s.id : s.name;
        return std::string(id);
    };

    out += "Summary statistics (mean, median, standard deviation, skewness)\n";
    for (const auto& s : rep.summary) out += "  " + format_stats_row(name_of(s.indicator_id), s) + "\n";

    if (!rep.correlation.empty()) {
        out += "\nCorrelation matrix (Pearson R, pairwise complete)\n";
        std::size_t w = 0;
        for (const auto& s : rep.indicators) w = std::max(w, s.id.size());
        w += 2;
        out += text::pad_right("", w);
        for (const auto& s : rep.indicators) out += text::pad_left(s.id.substr(0, 8), 9);
        out += '\n';
        for (std::size_t a = 0; a < rep.correlation.rows(); ++a) {
            out += text::pad_right(rep.indicators[a].id, w);
            for (std::size_t b = 0; b < rep.correlation.cols(); ++b) {
                const auto& r = rep.correlation(a, b);
                out += text::pad_left(r ? text::format_fixed(*r, 3) : std::string("n/a"), 9);
            }
            out += '\n';
        }
    }

    out += "\nRanges of the converted values (minimum, maximum)\n";
    for (std::size_t j = 0; j < rep.ranges.size(); ++j) {
        const auto name = name_of(rep.indicators[j].id);
        out += "  " + (rep.ranges[j] ? format_range_row(name, *rep.ranges[j]) : name + ": n/a") + "\n";
    }

    if (rep.implied_extremes) {
        const auto& ie = *rep.implied_extremes;
        out += "\nImplied raw extremes (mean + converted * sd; pass iff min >= -0.01 sd)\n";
        for (const auto& r : ie.rows) {
            out += "  " + text::pad_right(r.id, 18) + " min " +
                   text::pad_left(text::format_fixed(r.implied_raw_min, 3), 12) + "  max " +
                   text::pad_left(text::format_fixed(r.implied_raw_max, 3), 12) + "  tol " +
                   text::pad_left(text::format_fixed(r.tolerance, 3), 9) + "  " +
                   (r.passed ? "pass" : "FAIL") + "\n";
        }
        out += "  " + std::to_string(ie.pass_count()) + "/" + std::to_string(ie.rows.size()) +
               " passed\n";
    }

    out += "\nFlags\n";
    if (rep.flags.empty()) out += "  none\n";
    for (const auto& f : rep.flags)
        out += "  " + text::pad_right(to_string(f.kind), 18) + text::pad_right(f.subject, 30) +
               f.detail + "\n";
    out += "\n" + rep.temporal_consistency + "\n";
    return out;
}

inline nlohmann::json diagnostics_to_json(const DiagnosticsReport& rep) {
    using nlohmann::json;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["indicators"] = json::array();
    for (const auto& s : rep.indicators)
        j["indicators"].push_back({{"id", s.id}, {"name", s.name}, {"domain", to_string(s.domain)}});
    j["summary"] = json::array();
    for (const auto& s : rep.summary)
        j["summary"].push_back({{"id", s.indicator_id},
                                {"n", s.n},
                                {"mean", s.mean},
                                {"median", s.median},
                                {"std_dev", s.std_dev},
                                {"skewness", opt(s.skewness)}});
    j["correlation"] = json::array();
    for (std::size_t a = 0; a < rep.correlation.rows(); ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < rep.correlation.cols(); ++b) row.push_back(opt(rep.correlation(a, b)));
        j["correlation"].push_back(row);
    }
    j["ranges"] = json::array();
    for (std::size_t k = 0; k < rep.ranges.size(); ++k) {
        const auto& r = rep.ranges[k];
        j["ranges"].push_back({{"id", rep.indicators[k].id},
                               {"min", r ? json(r->min) : json(nullptr)},
                               {"max", r ? json(r->max) : json(nullptr)}});
    }
    j["flags"] = json::array();
    for (const auto& f : rep.flags)
        j["flags"].push_back({{"kind", to_string(f.kind)},
                              {"subject", f.subject},
                              {"detail", f.detail},
                              {"value", f.value && std::isfinite(*f.value) ? json(*f.value) : json(nullptr)}});
    if (rep.implied_extremes) {
        json ie = json::array();
        for (const auto& r : rep.implied_extremes->rows)
            ie.push_back({{"id", r.id},
                          {"implied_raw_min", r.implied_raw_min},
                          {"implied_raw_max", r.implied_raw_max},
                          {"tolerance", r.tolerance},
                          {"passed", r.passed}});
        j["implied_extremes"] = {{"rows", ie},
                                 {"passed", rep.implied_extremes->pass_count()},
                                 {"total", rep.implied_extremes->rows.size()}};
    }
    j["temporal_consistency"] = rep.temporal_consistency;
    return j;
}

}  // namespace compidx
