#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/error.hpp"
#include "compidx/grid.hpp"
#include "compidx/text.hpp"

namespace compidx {

// ---------------------------------------------------------------------------
// Indicator metadata
// ---------------------------------------------------------------------------

enum class Domain { precondition, resource, output };

inline constexpr std::array<Domain, 3> kDomains = {Domain::precondition, Domain::resource,
                                                   Domain::output};

inline const char* to_string(Domain d) {
    switch (d) {
        case Domain::precondition: return "precondition";
        case Domain::resource: return "resource";
        case Domain::output: return "output";
    }
    return "?";
}

inline Domain parse_domain(std::string_view s) {
    s = text::trim(s);
    if (s == "precondition" || s == "preconditions") return Domain::precondition;
    if (s == "resource" || s == "resources") return Domain::resource;
    if (s == "output" || s == "outputs") return Domain::output;
    throw Error(ErrorKind::schema, "unknown domain '" + std::string(s) + "'");
}

enum class Direction { higher_is_better };

struct IndicatorSpec {
    std::string id;
    std::string name;
    Domain domain = Domain::precondition;
    std::string units;
    Direction direction = Direction::higher_is_better;

    friend bool operator==(const IndicatorSpec&, const IndicatorSpec&) = default;
};

/// Throws unless ids are nonempty and unique.
inline void validate_specs(std::span<const IndicatorSpec> specs) {
    if (specs.empty()) throw Error(ErrorKind::argument, "indicator list is empty");
    std::set<std::string, std::less<>> seen;
    for (const auto& s : specs) {
        if (s.id.empty()) throw Error(ErrorKind::validation, "indicator with empty id");
        if (!seen.insert(s.id).second)
            throw Error(ErrorKind::validation, "duplicate indicator id '" + s.id + "'");
    }
}

/// The eight indicators of the S&T capacity index, grouped 2/3/3 by domain.
inline std::vector<IndicatorSpec> reference_indicator_specs() {
    return {
        {"enrolment", "gross tertiary science enrolment ratio", Domain::precondition, "percent"},
        {"gdp_pc_indicator", "per capita GDP", Domain::precondition, "US dollars"},
        {"scientists", "scientists and engineers per million inhabitants", Domain::resource,
         "per million inhabitants"},
        {"institutions", "institutions per million inhabitants", Domain::resource,
         "per million inhabitants"},
        {"rd_expenditure", "R&D expenditure as a percentage of GDP", Domain::resource,
         "percent of GDP"},
        {"coauthorship", "Coauthorship Index", Domain::output, "index"},
        {"patents", "patents per million inhabitants", Domain::output, "per million inhabitants"},
        {"articles", "S&T journal articles", Domain::output, "articles"},
    };
}

/// Accepts either a top-level array of indicator objects or {"indicators": [...]}.
inline std::vector<IndicatorSpec> parse_indicator_specs_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::schema, std::string("indicator specs: ") + e.what());
    }
    const nlohmann::json* list = &doc;
    if (doc.is_object() && doc.contains("indicators")) list = &doc["indicators"];
    if (!list->is_array()) throw Error(ErrorKind::schema, "indicator specs must be a JSON array");

    std::vector<IndicatorSpec> specs;
    for (const auto& item : *list) {
        if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
            !item.contains("domain") || !item["domain"].is_string())
            throw Error(ErrorKind::schema, "indicator spec needs string fields 'id' and 'domain'");
        IndicatorSpec s;
        s.id = item["id"].get<std::string>();
        s.name = item.value("name", s.id);
        s.domain = parse_domain(item["domain"].get<std::string>());
        s.units = item.value("units", "");
        if (item.contains("direction") && item["direction"] != "higher_is_better")
            throw Error(ErrorKind::schema, "indicator '" + s.id +
                                               "': only direction 'higher_is_better' is supported");
        specs.push_back(std::move(s));
    }
    validate_specs(specs);
    return specs;
}

// ---------------------------------------------------------------------------
// Country panel
// ---------------------------------------------------------------------------

struct CountryRecord {
    std::string code;
    std::string name;
    std::optional<double> population;
    std::optional<double> gdp_per_capita;
    bool excluded = false;
    std::string exclusion_reason;

    friend bool operator==(const CountryRecord&, const CountryRecord&) = default;
};

inline bool is_country_code(std::string_view code) {
    return code.size() == 3 &&
           std::all_of(code.begin(), code.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

/// Countries x indicators panel of raw values. Missing cells are empty optionals.
struct DataMatrix {
    std::vector<CountryRecord> countries;
    std::vector<IndicatorSpec> indicators;
    MaybeGrid values;
    /// Countries removed by apply_exclusions, kept for reporting.
    std::vector<CountryRecord> excluded;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t country_count() const { return countries.size(); }
    [[nodiscard]] std::size_t indicator_count() const { return indicators.size(); }

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

    [[nodiscard]] std::optional<std::size_t> find_indicator(std::string_view id) const {
        for (std::size_t j = 0; j < indicators.size(); ++j)
            if (indicators[j].id == id) return j;
        return std::nullopt;
    }

    /// Same panel restricted to the given rows and columns (bookkeeping lists are kept).
    [[nodiscard]] DataMatrix select(std::span<const std::size_t> rows,
                                    std::span<const std::size_t> cols) const {
        DataMatrix out;
        for (auto r : rows) out.countries.push_back(countries[r]);
        for (auto c : cols) out.indicators.push_back(indicators[c]);
        out.values = values.select(rows, cols);
        out.excluded = excluded;
        out.warnings = warnings;
        return out;
    }
};

namespace detail {
inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}
}  // namespace detail

/// Validates and assembles a panel built in memory.
inline DataMatrix make_matrix(std::vector<CountryRecord> countries,
                              std::vector<IndicatorSpec> indicators, MaybeGrid values) {
    validate_specs(indicators);
    if (values.rows() != countries.size() || values.cols() != indicators.size())
        throw Error(ErrorKind::argument, "grid dimensions do not match country/indicator lists");
    std::set<std::string, std::less<>> codes;
    for (std::size_t i = 0; i < countries.size(); ++i) {
        const auto& c = countries[i];
        if (!is_country_code(c.code))
            throw Error(ErrorKind::validation,
                        "country code '" + c.code + "' is not 3 uppercase letters");
        if (!codes.insert(c.code).second)
            throw Error(ErrorKind::validation, "duplicate country code '" + c.code + "'");
        if ((c.population && *c.population < 0) || (c.gdp_per_capita && *c.gdp_per_capita < 0))
            throw Error(ErrorKind::validation, "country '" + c.code + "' has negative metadata");
        for (std::size_t j = 0; j < indicators.size(); ++j) {
            const auto& v = values(i, j);
            if (v && (*v < 0 || !std::isfinite(*v)))
                throw Error(ErrorKind::validation,
                            "country '" + c.code + "', indicator '" + indicators[j].id +
                                "': raw values must be finite and nonnegative");
        }
    }
    DataMatrix m;
    m.countries = std::move(countries);
    m.indicators = std::move(indicators);
    m.values = std::move(values);
    return m;
}

inline constexpr std::array<std::string_view, 4> kMetadataColumns = {"code", "name", "population",
                                                                     "gdp_per_capita"};

namespace detail {

struct ParsedTable {
    std::vector<CountryRecord> countries;
    MaybeGrid values;
    std::vector<std::string> comments;  // leading "#" lines, without the marker
};

/// Shared reader for raw panels and converted-value exports. Converted
/// exports carry negative values, hence allow_negative.
inline ParsedTable parse_panel_csv(std::string_view csv_text, std::span<const IndicatorSpec> specs,
                                   bool allow_negative) {
    validate_specs(specs);
    const auto lines = text::split_lines(csv_text);
    std::size_t li = 0;
    ParsedTable out;
    while (li < lines.size() && (text::trim(lines[li]).empty() || lines[li].starts_with("#"))) {
        if (lines[li].starts_with("#")) out.comments.emplace_back(text::trim(lines[li].substr(1)));
        ++li;
    }
    if (li == lines.size()) throw Error(ErrorKind::schema, "missing header row");

    auto header = text::split_csv(lines[li]);
    for (auto& h : header) h = std::string(text::trim(h));
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    for (std::size_t k = 0; k < kMetadataColumns.size(); ++k) {
        if (k >= header.size() || header[k] != kMetadataColumns[k])
            throw Error(ErrorKind::schema, "header column " + std::to_string(k + 1) +
                                               " must be '" + std::string(kMetadataColumns[k]) +
                                               "'");
    }
    // indicator column -> position in specs
    std::vector<std::size_t> column_to_spec;
    std::set<std::string, std::less<>> seen;
    for (std::size_t k = kMetadataColumns.size(); k < header.size(); ++k) {
        const auto it = std::find_if(specs.begin(), specs.end(),
                                     [&](const IndicatorSpec& s) { return s.id == header[k]; });
        if (it == specs.end())
            throw Error(ErrorKind::schema, "unknown column '" + header[k] + "' in header");
        if (!seen.insert(header[k]).second)
            throw Error(ErrorKind::schema, "duplicate column '" + header[k] + "' in header");
        column_to_spec.push_back(static_cast<std::size_t>(it - specs.begin()));
    }
    for (const auto& s : specs)
        if (!seen.contains(s.id))
            throw Error(ErrorKind::schema, "missing column '" + s.id + "' in header");

    std::vector<std::vector<std::optional<double>>> rows;
    std::set<std::string, std::less<>> codes;
    for (++li; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (text::trim(lines[li]).empty()) continue;
        const auto where = [&](std::string_view column) {
            return "line " + std::to_string(line_no) + ", column '" + std::string(column) + "'";
        };
        auto fields = text::split_csv(lines[li]);
        if (fields.size() != header.size())
            throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, found " +
                                               std::to_string(fields.size()));
        CountryRecord rec;
        rec.code = std::string(text::trim(fields[0]));
        rec.name = std::string(text::trim(fields[1]));
        if (!is_country_code(rec.code))
            throw Error(ErrorKind::validation,
                        where("code") + ": '" + rec.code + "' is not 3 uppercase letters");
        if (!codes.insert(rec.code).second)
            throw Error(ErrorKind::validation,
                        where("code") + ": duplicate country code '" + rec.code + "'");

        const auto number = [&](std::size_t k, bool may_be_negative) -> std::optional<double> {
            if (text::trim(fields[k]).empty()) return std::nullopt;
            const auto v = text::parse_number(fields[k]);
            if (!v)
                throw Error(ErrorKind::validation,
                            where(header[k]) + ": '" + fields[k] + "' is not a number");
            if (*v < 0 && !may_be_negative)
                throw Error(ErrorKind::validation,
                            where(header[k]) + ": negative value " + fields[k] +
                                "; raw indicator values must be positive or zero");
            return v;
        };
        rec.population = number(2, false);
        rec.gdp_per_capita = number(3, false);
        std::vector<std::optional<double>> row(specs.size());
        for (std::size_t k = kMetadataColumns.size(); k < header.size(); ++k)
            row[column_to_spec[k - kMetadataColumns.size()]] = number(k, allow_negative);
        out.countries.push_back(std::move(rec));
        rows.push_back(std::move(row));
    }

    out.values = MaybeGrid(rows.size(), specs.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < specs.size(); ++j) out.values(i, j) = rows[i][j];
    return out;
}

}  // namespace detail

/// Parses a country panel. Indicator columns follow the four metadata columns
/// in any order; the matrix keeps the order of `specs`.
inline DataMatrix load_dataset(std::string_view csv_text, std::span<const IndicatorSpec> specs) {
    auto parsed = detail::parse_panel_csv(csv_text, specs, false);
    DataMatrix m;
    m.countries = std::move(parsed.countries);
    m.indicators.assign(specs.begin(), specs.end());
    m.values = std::move(parsed.values);
    return m;
}

/// Writes a panel in the ingestion schema; present values use the shortest
/// exact representation so a reload reproduces every cell.
inline std::string write_dataset_csv(const DataMatrix& m,
                                     std::span<const std::string> comment_lines = {}) {
    std::string out;
    for (const auto& c : comment_lines) out += "# " + c + "\n";
    for (std::size_t k = 0; k < kMetadataColumns.size(); ++k) {
        if (k) out += ',';
        out += kMetadataColumns[k];
    }
    for (const auto& s : m.indicators) out += "," + s.id;
    out += '\n';
    const auto cell = [](const std::optional<double>& v) {
        return v ? text::format_exact(*v) : std::string();
    };
    for (std::size_t i = 0; i < m.countries.size(); ++i) {
        const auto& c = m.countries[i];
        out += c.code + "," + text::csv_escape(c.name) + "," + cell(c.population) + "," +
               cell(c.gdp_per_capita);
        for (std::size_t j = 0; j < m.indicators.size(); ++j) out += "," + cell(m.values(i, j));
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exclusions
// ---------------------------------------------------------------------------

struct ExclusionEntry {
    std::string code;
    std::string reason;
};

/// One "CODE,reason" pair per line; blank lines and "#" comments are skipped.
inline std::vector<ExclusionEntry> parse_exclusion_list(std::string_view list_text) {
    std::vector<ExclusionEntry> out;
    const auto lines = text::split_lines(list_text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        ExclusionEntry e;
        e.code = std::string(text::trim(line.substr(0, comma)));
        if (comma != std::string_view::npos) e.reason = std::string(text::trim(line.substr(comma + 1)));
        if (!is_country_code(e.code))
            throw Error(ErrorKind::validation, "exclusion list line " + std::to_string(i + 1) +
                                                   ": '" + e.code +
                                                   "' is not 3 uppercase letters");
        out.push_back(std::move(e));
    }
    return out;
}

/// Drops listed countries. Unknown codes produce a warning, not an error.
inline DataMatrix apply_exclusions(const DataMatrix& matrix,
                                   std::span<const ExclusionEntry> exclusions) {
    std::map<std::string, std::string, std::less<>> reasons;
    DataMatrix result;
    result.excluded = matrix.excluded;
    result.warnings = matrix.warnings;
    for (const auto& e : exclusions) {
        if (!matrix.find_country(e.code)) {
            result.warnings.push_back("exclusion list: unknown country code '" + e.code + "'");
            continue;
        }
        reasons.emplace(e.code, e.reason);
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < matrix.countries.size(); ++i) {
        const auto it = reasons.find(matrix.countries[i].code);
        if (it == reasons.end()) {
            keep.push_back(i);
        } else {
            CountryRecord rec = matrix.countries[i];
            rec.excluded = true;
            rec.exclusion_reason = it->second;
            result.excluded.push_back(std::move(rec));
        }
    }
    const auto cols = detail::iota_indices(matrix.indicator_count());
    for (auto r : keep) result.countries.push_back(matrix.countries[r]);
    result.indicators = matrix.indicators;
    result.values = matrix.values.select(keep, cols);
    return result;
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

struct CoverageGroup {
    std::size_t indicator_count = 0;
    std::size_t country_count = 0;
    /// Unweighted mean over group members with GDP metadata; empty if none have it.
    std::optional<double> avg_gdp_per_capita;
    double world_population_share_pct = 0.0;
    double world_gdp_share_pct = 0.0;
};

struct CoverageReport {
    std::size_t min_indicators = 0;
    std::size_t total_countries = 0;
    /// Ordered from full coverage down to zero; groups with no countries are
    /// kept for counts 1..K so the table layout is stable.
    std::vector<CoverageGroup> groups;
    std::vector<std::string> retained;
    std::vector<std::pair<std::string, std::size_t>> dropped;
    /// Countries without population or GDP metadata; they add nothing to the share columns.
    std::vector<std::string> missing_metadata;
};

struct CoverageResult {
    DataMatrix matrix;
    CoverageReport report;
};

/// Keeps the countries with at least `min_indicators` present values and
/// summarises every input country by coverage count. World totals for the
/// share columns are taken over the whole input panel.
inline CoverageResult coverage_filter(const DataMatrix& matrix, std::size_t min_indicators) {
    const std::size_t k = matrix.indicator_count();
    if (min_indicators < 1 || min_indicators > k)
        throw Error(ErrorKind::argument, "min_indicators must be in [1, " + std::to_string(k) +
                                             "], got " + std::to_string(min_indicators));

    double world_pop = 0.0;
    double world_gdp = 0.0;
    CoverageReport report;
    report.min_indicators = min_indicators;
    report.total_countries = matrix.country_count();
    for (const auto& c : matrix.countries) {
        if (c.population) world_pop += *c.population;
        if (c.population && c.gdp_per_capita) world_gdp += *c.population * *c.gdp_per_capita;
        if (!c.population || !c.gdp_per_capita) report.missing_metadata.push_back(c.code);
    }

    struct Acc {
        std::size_t n = 0;
        std::size_t n_gdp = 0;
        double gdp_pc_sum = 0.0;
        double pop = 0.0;
        double gdp = 0.0;
    };
    std::vector<Acc> acc(k + 1);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < matrix.country_count(); ++i) {
        const auto& c = matrix.countries[i];
        const std::size_t cov = matrix.coverage(i);
        auto& a = acc[cov];
        ++a.n;
        if (c.gdp_per_capita) {
            ++a.n_gdp;
            a.gdp_pc_sum += *c.gdp_per_capita;
        }
        if (c.population) a.pop += *c.population;
        if (c.population && c.gdp_per_capita) a.gdp += *c.population * *c.gdp_per_capita;
        if (cov >= min_indicators) {
            keep.push_back(i);
            report.retained.push_back(c.code);
        } else {
            report.dropped.emplace_back(c.code, cov);
        }
    }
    for (std::size_t cov = k + 1; cov-- > 0;) {
        const auto& a = acc[cov];
        if (cov == 0 && a.n == 0) continue;
        CoverageGroup g;
        g.indicator_count = cov;
        g.country_count = a.n;
        if (a.n_gdp > 0) g.avg_gdp_per_capita = a.gdp_pc_sum / static_cast<double>(a.n_gdp);
        g.world_population_share_pct = world_pop > 0 ? 100.0 * a.pop / world_pop : 0.0;
        g.world_gdp_share_pct = world_gdp > 0 ? 100.0 * a.gdp / world_gdp : 0.0;
        report.groups.push_back(g);
    }

    CoverageResult result;
    result.matrix = matrix.select(keep, detail::iota_indices(k));
    result.report = std::move(report);
    return result;
}

/// Human-readable coverage table, one column per coverage group.
inline std::string coverage_table_text(const CoverageReport& r) {
    std::string out;
    const std::size_t label_w = 32;
    const std::size_t col_w = 10;
    const auto row = [&](std::string_view label, auto cell) {
        out += text::pad_right(label, label_w);
        for (const auto& g : r.groups) out += text::pad_left(cell(g), col_w);
        out += '\n';
    };
    row("number of indicators", [](const CoverageGroup& g) { return std::to_string(g.indicator_count); });
    row("number of countries", [](const CoverageGroup& g) { return std::to_string(g.country_count); });
    row("average per capita GDP ($)", [](const CoverageGroup& g) {
        return g.avg_gdp_per_capita ? text::format_fixed(*g.avg_gdp_per_capita, 0) : std::string("n/a");
    });
    row("share in world population (%)", [](const CoverageGroup& g) {
        return text::format_fixed(g.world_population_share_pct, 1);
    });
    row("share in world GDP (%)", [](const CoverageGroup& g) {
        return text::format_fixed(g.world_gdp_share_pct, 1);
    });
    out += "retained " + std::to_string(r.retained.size()) + " of " +
           std::to_string(r.total_countries) + " countries (min_indicators=" +
           std::to_string(r.min_indicators) + ")\n";
    if (!r.missing_metadata.empty()) {
        out += "no population/GDP metadata:";
        for (const auto& c : r.missing_metadata) out += " " + c;
        out += '\n';
    }
    return out;
}

inline std::string coverage_table_csv(const CoverageReport& r) {
    std::string out = "indicator_count,country_count,avg_gdp_per_capita,world_population_share_pct,world_gdp_share_pct\n";
    for (const auto& g : r.groups) {
        out += std::to_string(g.indicator_count) + "," + std::to_string(g.country_count) + "," +
               (g.avg_gdp_per_capita ? text::format_exact(*g.avg_gdp_per_capita) : "") + "," +
               text::format_exact(g.world_population_share_pct) + "," +
               text::format_exact(g.world_gdp_share_pct) + "\n";
    }
    return out;
}

inline nlohmann::json coverage_to_json(const CoverageReport& r) {
    nlohmann::json j;
    j["min_indicators"] = r.min_indicators;
    j["total_countries"] = r.total_countries;
    j["groups"] = nlohmann::json::array();
    for (const auto& g : r.groups) {
        j["groups"].push_back({{"indicator_count", g.indicator_count},
                               {"country_count", g.country_count},
                               {"avg_gdp_per_capita", g.avg_gdp_per_capita
                                                          ? nlohmann::json(*g.avg_gdp_per_capita)
                                                          : nlohmann::json(nullptr)},
                               {"world_population_share_pct", g.world_population_share_pct},
                               {"world_gdp_share_pct", g.world_gdp_share_pct}});
    }
    j["retained"] = r.retained;
    j["dropped"] = nlohmann::json::array();
    for (const auto& [code, cov] : r.dropped) j["dropped"].push_back({{"code", code}, {"coverage", cov}});
    j["missing_metadata"] = r.missing_metadata;
    return j;
}

}  // namespace compidx
