#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/text.hpp"

// Summary tables published for the reference S&T capacity index: raw-column
// statistics and the range of the z-converted values. The raw country data
// behind them is not available, so these tables are the ground truth the
// diagnostics cross-check against. Copies live in data/ as CSV files.
namespace compidx {

struct PublishedStatsRow {
    std::string id;
    std::string name;
    Domain domain = Domain::precondition;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
};

struct PublishedRangeRow {
    std::string id;
    double conv_min = 0.0;
    double conv_max = 0.0;
};

inline constexpr std::string_view kPublishedStatsCsv =
    "id,name,domain,mean,median,std_dev,skewness\n"
    "enrolment,gross tertiary science enrolment ratio,precondition,9.54,9.75,6.17,.742\n"
    "gdp_pc_indicator,per capita GDP,precondition,13193,9409,9648,.470\n"
    "scientists,scientists and engineers per million inhabitants,resource,1461,1320,1286,.718\n"
    "institutions,institutions per million inhabitants,resource,8.52,3.54,14.58,3.910\n"
    "rd_expenditure,R&D expenditure as a percentage of GDP,resource,1.04,.73,.87,1.045\n"
    "coauthorship,Coauthorship Index,output,437,167,652,2.550\n"
    "patents,patents per million inhabitants,output,31.16,1.34,56.36,2.215\n"
    "articles,S&T journal articles,output,218.18,92.70,273.19,1.269\n";

inline constexpr std::string_view kPublishedRangesCsv =
    "id,conv_min,conv_max\n"
    "enrolment,-1.497,2.893\n"
    "gdp_pc_indicator,-1.280,2.273\n"
    "scientists,-1.132,2.825\n"
    "institutions,-.576,6.495\n"
    "rd_expenditure,-1.182,3.208\n"
    "coauthorship,-0.652,4.337\n"
    "patents,-0.554,4.025\n"
    "articles,-0.781,2.737\n";

namespace detail {

inline std::vector<std::vector<std::string>> read_table(std::string_view csv,
                                                        std::vector<std::string_view> header,
                                                        std::string_view what) {
    const auto lines = text::split_lines(csv);
    if (lines.empty()) throw Error(ErrorKind::schema, std::string(what) + ": empty table");
    const auto cols = text::split_csv(lines[0]);
    if (cols.size() != header.size())
        throw Error(ErrorKind::schema, std::string(what) + ": unexpected header");
    for (std::size_t k = 0; k < header.size(); ++k)
        if (text::trim(cols[k]) != header[k])
            throw Error(ErrorKind::schema, std::string(what) + ": header column " +
                                               std::to_string(k + 1) + " must be '" +
                                               std::string(header[k]) + "'");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        auto f = text::split_csv(lines[i]);
        if (f.size() != header.size())
            throw Error(ErrorKind::schema, std::string(what) + ": line " + std::to_string(i + 1) +
                                               " has " + std::to_string(f.size()) + " fields");
        rows.push_back(std::move(f));
    }
    return rows;
}

inline double table_number(const std::string& field, std::string_view what, std::size_t row) {
    const auto v = text::parse_number(field);
    if (!v)
        throw Error(ErrorKind::validation, std::string(what) + ": row " + std::to_string(row + 1) +
                                               ": '" + field + "' is not a number");
    return *v;
}

}  // namespace detail

inline std::vector<PublishedStatsRow> parse_stats_table_csv(std::string_view csv) {
    constexpr std::string_view what = "summary statistics table";
    std::vector<PublishedStatsRow> out;
    const auto rows = detail::read_table(
        csv, {"id", "name", "domain", "mean", "median", "std_dev", "skewness"}, what);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out.push_back({std::string(text::trim(r[0])), std::string(text::trim(r[1])),
                       parse_domain(r[2]), detail::table_number(r[3], what, i),
                       detail::table_number(r[4], what, i), detail::table_number(r[5], what, i),
                       detail::table_number(r[6], what, i)});
    }
    return out;
}

inline std::vector<PublishedRangeRow> parse_ranges_table_csv(std::string_view csv) {
    constexpr std::string_view what = "converted ranges table";
    std::vector<PublishedRangeRow> out;
    const auto rows = detail::read_table(csv, {"id", "conv_min", "conv_max"}, what);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out.push_back({std::string(text::trim(r[0])), detail::table_number(r[1], what, i),
                       detail::table_number(r[2], what, i)});
    }
    return out;
}

inline std::vector<PublishedStatsRow> published_stats_table() {
    return parse_stats_table_csv(kPublishedStatsCsv);
}

inline std::vector<PublishedRangeRow> published_ranges_table() {
    return parse_ranges_table_csv(kPublishedRangesCsv);
}

}  // namespace compidx
