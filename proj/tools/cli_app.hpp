#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "compidx/compidx.hpp"

namespace compidx::cli {

enum class Format { text, csv, json };

struct RunConfig {
    std::string command;
    std::string data_path;
    std::string specs_path;
    std::string exclusions_path;
    std::string weights_path;
    std::string bounds_path;
    std::string converted_path;
    std::string method = "zscore";
    std::size_t min_indicators = 8;
    std::string missing;  // empty: take the weight file's policy, else renormalize
    std::string format = "text";
    std::string out_dir;
    bool paper_tables = false;
    std::string stats_table_path;
    std::string ranges_table_path;
    bool sample_stats = false;
    double corr_threshold = 0.9;
    double skew_threshold = 2.0;
    std::size_t bins = 10;
    std::string drop_country;
    std::string drop_indicator;
    std::string weights_b_path;
    std::string reference_path;
};

struct Artifact {
    std::string stem;
    std::string ext;
    std::string content;
};

/// Everything read from disk, parsed before any computation starts.
struct Inputs {
    std::vector<IndicatorSpec> specs;
    std::optional<DataMatrix> panel;  // after exclusions, before coverage filtering
    std::optional<ConvertedMatrix> converted_input;
    std::optional<CoverageResult> coverage;
    PipelineConfig pipeline;
    std::optional<WeightScheme> scheme_b;
    std::vector<RankedEntity> reference;
    std::optional<std::vector<PublishedStatsRow>> stats_table;
    std::optional<std::vector<PublishedRangeRow>> ranges_table;
};

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    return Format::text;
}

inline std::vector<std::string> header_lines(const RunConfig& cfg, const Inputs& in) {
    const auto scheme = effective_scheme(in.pipeline, in.specs);
    const auto or_default = [](const std::string& p, const char* d) { return p.empty() ? std::string(d) : p; };
    std::vector<std::string> lines;
    lines.push_back("compidx " + cfg.command);
    lines.push_back("data=" + or_default(cfg.converted_path.empty() ? cfg.data_path : cfg.converted_path, "none") +
                    " specs=" + or_default(cfg.specs_path, "reference") +
                    " exclusions=" + or_default(cfg.exclusions_path, "none") +
                    " weights=" + or_default(cfg.weights_path, "equal") +
                    " bounds=" + or_default(cfg.bounds_path, "none"));
    lines.push_back(std::string("method=") + to_string(in.pipeline.method) +
                    " dispersion=" + to_string(in.pipeline.dispersion) + " scheme=" + scheme.name() +
                    " missing_policy=" + to_string(scheme.missing_policy()) +
                    " min_indicators=" + std::to_string(cfg.min_indicators));
    lines.push_back("bands=" + std::string(kBandConvention));
    return lines;
}

inline nlohmann::json header_json(const RunConfig& cfg, const Inputs& in) {
    const auto scheme = effective_scheme(in.pipeline, in.specs);
    return {{"command", cfg.command},
            {"data", cfg.converted_path.empty() ? cfg.data_path : cfg.converted_path},
            {"specs", cfg.specs_path.empty() ? "reference" : cfg.specs_path},
            {"exclusions", cfg.exclusions_path},
            {"weights", cfg.weights_path.empty() ? "equal" : cfg.weights_path},
            {"bounds", cfg.bounds_path},
            {"method", to_string(in.pipeline.method)},
            {"dispersion", to_string(in.pipeline.dispersion)},
            {"scheme", scheme.name()},
            {"missing_policy", to_string(scheme.missing_policy())},
            {"min_indicators", cfg.min_indicators},
            {"bands", kBandConvention}};
}

inline std::string text_header(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += "# " + l + "\n";
    return out + "\n";
}

inline Inputs load_inputs(const RunConfig& cfg) {
    Inputs in;
    in.specs = cfg.specs_path.empty() ? reference_indicator_specs()
                                      : parse_indicator_specs_json(text::read_file(cfg.specs_path));
    in.pipeline.method = parse_method(cfg.method);
    in.pipeline.dispersion = cfg.sample_stats ? Dispersion::sample : Dispersion::population;
    if (!cfg.bounds_path.empty()) in.pipeline.bounds = parse_bounds_json(text::read_file(cfg.bounds_path));
    if (in.pipeline.method == Method::min_max && cfg.bounds_path.empty() &&
        (!cfg.data_path.empty() && cfg.converted_path.empty()))
        throw Error(ErrorKind::argument, "--method minmax requires --bounds");

    if (!cfg.weights_path.empty()) {
        auto scheme = parse_weight_scheme_json(text::read_file(cfg.weights_path), in.specs);
        if (!cfg.missing.empty()) scheme = scheme.with_policy(parse_missing_policy(cfg.missing));
        in.pipeline.missing_policy = scheme.missing_policy();
        for (const auto& s : in.specs)
            if (!scheme.weight(s.id))
                throw Error(ErrorKind::argument, cfg.weights_path + ": no weight for indicator '" + s.id + "'");
        if (scheme.ids().size() != in.specs.size())
            throw Error(ErrorKind::argument, cfg.weights_path + ": weights name indicators not in the specs");
        in.pipeline.scheme = std::move(scheme);
    } else if (!cfg.missing.empty()) {
        in.pipeline.missing_policy = parse_missing_policy(cfg.missing);
    }
    if (!cfg.weights_b_path.empty()) {
        auto b = parse_weight_scheme_json(text::read_file(cfg.weights_b_path), in.specs);
        if (!cfg.missing.empty()) b = b.with_policy(parse_missing_policy(cfg.missing));
        if (b.ids().size() != in.specs.size())
            throw Error(ErrorKind::argument, cfg.weights_b_path + ": weights must cover exactly the specs' indicators");
        in.scheme_b = std::move(b);
    }
    if (!cfg.reference_path.empty()) {
        const auto lines = text::split_lines(text::read_file(cfg.reference_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto f = text::split_csv(lines[i]);
            if (f.size() != 2) throw Error(ErrorKind::schema, "reference file line " + std::to_string(i + 1) + ": expected code,value");
            if (i == 0 && !text::parse_number(f[1])) continue;  // header row
            const auto v = text::parse_number(f[1]);
            if (!v) throw Error(ErrorKind::validation, "reference file line " + std::to_string(i + 1) + ": '" + f[1] + "' is not a number");
            in.reference.push_back({std::string(text::trim(f[0])), *v});
        }
    }

    if (cfg.paper_tables) {
        in.stats_table = published_stats_table();
        in.ranges_table = published_ranges_table();
    }
    if (!cfg.stats_table_path.empty()) in.stats_table = parse_stats_table_csv(text::read_file(cfg.stats_table_path));
    if (!cfg.ranges_table_path.empty()) in.ranges_table = parse_ranges_table_csv(text::read_file(cfg.ranges_table_path));
    if (in.stats_table.has_value() != in.ranges_table.has_value())
        throw Error(ErrorKind::argument, "published statistics and range tables must be given together");

    if (!cfg.converted_path.empty()) {
        in.converted_input = read_converted_csv(text::read_file(cfg.converted_path), in.specs);
    } else if (!cfg.data_path.empty()) {
        const auto raw_text = text::read_file(cfg.data_path);
        std::vector<ExclusionEntry> exclusions;
        if (!cfg.exclusions_path.empty()) exclusions = parse_exclusion_list(text::read_file(cfg.exclusions_path));
        DataMatrix raw;
        try {
            raw = load_dataset(raw_text, in.specs);
        } catch (const Error& e) {
            throw Error(e.kind(), cfg.data_path + ": " + e.message());
        }
        in.panel = apply_exclusions(raw, exclusions);
        in.coverage = coverage_filter(*in.panel, cfg.min_indicators);
    }
    return in;
}

// ---------------------------------------------------------------------------
// Artifact builders
// ---------------------------------------------------------------------------

inline std::string converted_text(const ConvertedMatrix& conv) {
    std::string out = text::pad_right("code", 6);
    for (const auto& s : conv.indicators) out += text::pad_left(s.id.substr(0, 10), 11);
    out += '\n';
    for (std::size_t i = 0; i < conv.countries.size(); ++i) {
        out += text::pad_right(conv.countries[i].code, 6);
        for (std::size_t j = 0; j < conv.indicators.size(); ++j) {
            const auto& v = conv.values(i, j);
            out += text::pad_left(v ? text::format_fixed(*v, 3) : std::string("."), 11);
        }
        out += '\n';
    }
    if (conv.method == Method::min_max)
        out += "values clamped into [0, 1]: " + std::to_string(conv.total_clamps()) + "\n";
    return out;
}

inline nlohmann::json converted_json(const ConvertedMatrix& conv) {
    using nlohmann::json;
    json j{{"method", to_string(conv.method)}};
    j["indicators"] = json::array();
    for (const auto& s : conv.indicators) j["indicators"].push_back(s.id);
    j["rows"] = json::array();
    for (std::size_t i = 0; i < conv.countries.size(); ++i) {
        json vals = json::array();
        for (std::size_t jx = 0; jx < conv.indicators.size(); ++jx) {
            const auto& v = conv.values(i, jx);
            vals.push_back(v ? json(*v) : json(nullptr));
        }
        j["rows"].push_back({{"code", conv.countries[i].code}, {"values", vals}});
    }
    if (conv.method == Method::min_max) j["clamp_counts"] = conv.clamp_counts;
    return j;
}

inline std::string composites_text(const std::vector<CompositeResult>& rs) {
    std::string out = "code  " + text::pad_left("score", 9) + text::pad_left("coverage", 10) +
                      text::pad_left("precond", 10) + text::pad_left("resource", 10) +
                      text::pad_left("output", 10) + "\n";
    const auto cell = [](const std::optional<double>& v) {
        return text::pad_left(v ? text::format_fixed(*v, 3) : std::string("n/a"), 10);
    };
    for (const auto& r : rs) {
        out += r.code + "  " + text::pad_left(r.score ? text::format_fixed(*r.score, 3) : "n/a", 9) +
               text::pad_left(std::to_string(r.coverage), 10) + cell(r.domain_scores[0]) +
               cell(r.domain_scores[1]) + cell(r.domain_scores[2]) + "\n";
        if (!r.score) out += "      (no indicator present; not scored)\n";
    }
    return out;
}

inline std::vector<Artifact> diagnostics_csv(const std::string& prefix, const DiagnosticsReport& rep,
                                             const std::string& hdr) {
    std::vector<Artifact> out;
    const auto opt = [](const std::optional<double>& v) { return v ? text::format_exact(*v) : std::string(); };
    std::string summary = hdr + "id,n,mean,median,std_dev,skewness\n";
    for (const auto& s : rep.summary)
        summary += s.indicator_id + "," + std::to_string(s.n) + "," + text::format_exact(s.mean) + "," +
                   text::format_exact(s.median) + "," + text::format_exact(s.std_dev) + "," + opt(s.skewness) + "\n";
    out.push_back({prefix + "summary", "csv", summary});
    if (!rep.correlation.empty()) {
        std::string corr = hdr + "id";
        for (const auto& s : rep.indicators) corr += "," + s.id;
        corr += '\n';
        for (std::size_t a = 0; a < rep.correlation.rows(); ++a) {
            corr += rep.indicators[a].id;
            for (std::size_t b = 0; b < rep.correlation.cols(); ++b) corr += "," + opt(rep.correlation(a, b));
            corr += '\n';
        }
        out.push_back({prefix + "correlation", "csv", corr});
    }
    std::string ranges = hdr + "id,min,max\n";
    for (std::size_t j = 0; j < rep.ranges.size(); ++j)
        ranges += rep.indicators[j].id + "," + (rep.ranges[j] ? text::format_exact(rep.ranges[j]->min) : "") + "," +
                  (rep.ranges[j] ? text::format_exact(rep.ranges[j]->max) : "") + "\n";
    out.push_back({prefix + "ranges", "csv", ranges});
    std::string flags = hdr + "kind,subject,value,detail\n";
    for (const auto& f : rep.flags)
        flags += std::string(to_string(f.kind)) + "," + f.subject + "," + opt(f.value) + "," + text::csv_escape(f.detail) + "\n";
    out.push_back({prefix + "flags", "csv", flags});
    if (rep.implied_extremes) {
        std::string ie = hdr + "id,implied_raw_min,implied_raw_max,tolerance,passed\n";
        for (const auto& r : rep.implied_extremes->rows)
            ie += r.id + "," + text::format_exact(r.implied_raw_min) + "," + text::format_exact(r.implied_raw_max) +
                  "," + text::format_exact(r.tolerance) + "," + (r.passed ? "true" : "false") + "\n";
        out.push_back({prefix + "implied_extremes", "csv", ie});
    }
    return out;
}

inline std::vector<Artifact> render_diagnostics(Format fmt, const std::string& stem, const DiagnosticsReport& rep,
                                                const RunConfig& cfg, const Inputs& in) {
    const auto lines = header_lines(cfg, in);
    switch (fmt) {
        case Format::text: return {{stem, "txt", text_header(lines) + diagnostics_to_text(rep)}};
        case Format::json: {
            nlohmann::json j{{"config", header_json(cfg, in)}, {"diagnostics", diagnostics_to_json(rep)}};
            return {{stem, "json", j.dump(2) + "\n"}};
        }
        case Format::csv: {
            std::string hdr;
            for (const auto& l : lines) hdr += "# " + l + "\n";
            return diagnostics_csv(stem + "_", rep, hdr);
        }
    }
    return {};
}

inline std::vector<Artifact> render_coverage(Format fmt, const RunConfig& cfg, const Inputs& in) {
    const auto& cov = in.coverage->report;
    const auto lines = header_lines(cfg, in);
    std::string notes;
    for (const auto& c : in.panel->excluded) notes += "excluded " + c.code + ": " + c.exclusion_reason + "\n";
    for (const auto& w : in.panel->warnings) notes += "warning: " + w + "\n";
    switch (fmt) {
        case Format::text:
            return {{"coverage", "txt", text_header(lines) + coverage_table_text(cov) + notes}};
        case Format::csv: {
            std::string hdr;
            for (const auto& l : lines) hdr += "# " + l + "\n";
            return {{"coverage", "csv", hdr + coverage_table_csv(cov)}};
        }
        case Format::json: {
            nlohmann::json j{{"config", header_json(cfg, in)}, {"coverage", coverage_to_json(cov)}};
            j["excluded"] = nlohmann::json::array();
            for (const auto& c : in.panel->excluded)
                j["excluded"].push_back({{"code", c.code}, {"reason", c.exclusion_reason}});
            j["warnings"] = in.panel->warnings;
            return {{"coverage", "json", j.dump(2) + "\n"}};
        }
    }
    return {};
}

inline std::vector<Artifact> render_converted(Format fmt, const ConvertedMatrix& conv, const RunConfig& cfg,
                                              const Inputs& in) {
    const auto lines = header_lines(cfg, in);
    switch (fmt) {
        case Format::text: return {{"converted", "txt", text_header(lines) + converted_text(conv)}};
        case Format::csv: return {{"converted", "csv", write_converted_csv(conv, lines)}};
        case Format::json:
            return {{"converted", "json",
                     nlohmann::json{{"config", header_json(cfg, in)}, {"converted", converted_json(conv)}}.dump(2) + "\n"}};
    }
    return {};
}

inline std::vector<Artifact> render_composites(Format fmt, const std::vector<CompositeResult>& rs,
                                               const RunConfig& cfg, const Inputs& in) {
    const auto lines = header_lines(cfg, in);
    switch (fmt) {
        case Format::text: return {{"index", "txt", text_header(lines) + composites_text(rs)}};
        case Format::csv: return {{"index", "csv", composites_csv(rs, lines)}};
        case Format::json:
            return {{"index", "json",
                     nlohmann::json{{"config", header_json(cfg, in)}, {"index", composites_to_json(rs)}}.dump(2) + "\n"}};
    }
    return {};
}

inline std::vector<Artifact> render_classification(Format fmt, const std::vector<Classification>& rows,
                                                   const std::vector<CountryRecord>& countries,
                                                   const RunConfig& cfg, const Inputs& in) {
    const auto lines = header_lines(cfg, in);
    switch (fmt) {
        case Format::text:
            return {{"rank", "txt", text_header(lines) + classifications_text(rows, countries)}};
        case Format::csv: return {{"rank", "csv", classifications_csv(rows, countries, lines)}};
        case Format::json:
            return {{"rank", "json",
                     nlohmann::json{{"config", header_json(cfg, in)}, {"rank", classifications_to_json(rows)}}.dump(2) + "\n"}};
    }
    return {};
}

inline std::vector<Artifact> render_sensitivity(Format fmt, const std::vector<SensitivityReport>& reps,
                                                const RunConfig& cfg, const Inputs& in) {
    const auto lines = header_lines(cfg, in);
    switch (fmt) {
        case Format::text: {
            std::string body = text_header(lines);
            for (const auto& r : reps) body += sensitivity_to_text(r);
            return {{"sensitivity", "txt", body}};
        }
        case Format::json: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : reps) arr.push_back(sensitivity_to_json(r));
            return {{"sensitivity", "json", nlohmann::json{{"config", header_json(cfg, in)}, {"reports", arr}}.dump(2) + "\n"}};
        }
        case Format::csv: {
            std::string hdr;
            for (const auto& l : lines) hdr += "# " + l + "\n";
            std::string summary = hdr + "kind,subject,spearman,max_rank_shift,compared,dropped\n";
            std::string shifts = hdr + "kind,subject,code,old_rank,new_rank,shift\n";
            for (const auto& r : reps) {
                std::string dropped;
                for (const auto& d : r.dropped) dropped += (dropped.empty() ? "" : " ") + d;
                summary += std::string(to_string(r.kind)) + "," + text::csv_escape(r.subject) + "," +
                           text::format_exact(r.spearman) + "," + std::to_string(r.max_rank_shift) + "," +
                           std::to_string(r.entries.size()) + "," + dropped + "\n";
                for (const auto& s : r.shifted)
                    shifts += std::string(to_string(r.kind)) + "," + text::csv_escape(r.subject) + "," + s.code + "," +
                              std::to_string(s.old_rank) + "," + std::to_string(s.new_rank) + "," +
                              std::to_string(s.shift()) + "\n";
            }
            return {{"sensitivity", "csv", summary}, {"sensitivity_shifts", "csv", shifts}};
        }
    }
    return {};
}

/// Plot data: per-group income histograms and per-indicator converted-value histograms.
inline std::vector<Artifact> render_histograms(const Inputs& in, const ConvertedMatrix& conv,
                                               const std::vector<CompositeResult>& composites,
                                               std::size_t bins, const std::vector<std::string>& lines) {
    std::string hdr;
    for (const auto& l : lines) hdr += "# " + l + "\n";
    std::vector<Artifact> out;
    const auto& panel = *in.panel;
    std::map<std::size_t, std::vector<double>, std::greater<>> income;
    for (std::size_t i = 0; i < panel.country_count(); ++i)
        if (panel.countries[i].gdp_per_capita) income[panel.coverage(i)].push_back(*panel.countries[i].gdp_per_capita);
    for (const auto& [cov, xs] : income)
        out.push_back({"hist_income_coverage" + std::to_string(cov), "csv",
                       hdr + "# gdp_per_capita of countries with " + std::to_string(cov) + " indicators\n" +
                           histogram_csv(histogram(xs, bins))});
    for (std::size_t j = 0; j < conv.indicators.size(); ++j) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < conv.countries.size(); ++i)
            if (conv.values(i, j)) xs.push_back(*conv.values(i, j));
        if (xs.empty()) continue;
        out.push_back({"hist_converted_" + conv.indicators[j].id, "csv", hdr + histogram_csv(histogram(xs, bins))});
    }
    std::vector<double> scores;
    for (const auto& r : composites)
        if (r.score) scores.push_back(*r.score);
    if (!scores.empty())
        out.push_back({"hist_composite", "csv", hdr + histogram_csv(histogram(scores, bins))});
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline void require_panel(const Inputs& in, const std::string& command) {
    if (!in.panel) throw Error(ErrorKind::argument, command + " requires --data");
}

inline ConvertedMatrix convert_panel(const Inputs& in) {
    const auto& m = in.coverage->matrix;
    return in.pipeline.method == Method::z_score ? z_convert(m, in.pipeline.dispersion)
                                                 : minmax_convert(m, in.pipeline.bounds);
}

inline std::vector<Artifact> execute(const RunConfig& cfg, const Inputs& in, std::ostream& err) {
    const Format fmt = parse_format(cfg.format);
    const Thresholds thresholds{cfg.corr_threshold, cfg.skew_threshold, 3.0};
    const std::string& cmd = cfg.command;
    std::vector<Artifact> out;
    const auto append = [&out](std::vector<Artifact> more) {
        for (auto& a : more) out.push_back(std::move(a));
    };

    if (cmd == "ingest") {
        require_panel(in, cmd);
        append(render_coverage(fmt, cfg, in));
    } else if (cmd == "diagnose") {
        if (!in.panel && !in.stats_table)
            throw Error(ErrorKind::argument, "diagnose requires --data or --paper-tables");
        if (in.panel) {
            const auto conv = convert_panel(in);
            append(render_diagnostics(fmt, "diagnostics", consistency_check(conv, thresholds), cfg, in));
        }
        if (in.stats_table) {
            const auto rep = published_tables_report(*in.stats_table, *in.ranges_table, thresholds);
            append(render_diagnostics(fmt, "published_tables", rep, cfg, in));
        }
    } else if (cmd == "convert") {
        require_panel(in, cmd);
        const auto conv = convert_panel(in);
        if (conv.total_clamps() > 0)
            err << "warning: " << conv.total_clamps() << " value(s) fell outside the bounds and were clamped\n";
        append(render_converted(fmt, conv, cfg, in));
    } else if (cmd == "index" || cmd == "rank") {
        ConvertedMatrix conv;
        std::vector<CountryRecord> countries;
        if (in.converted_input) {
            conv = *in.converted_input;
        } else {
            require_panel(in, cmd);
            conv = convert_panel(in);
        }
        countries = conv.countries;
        const auto rs = aggregate(conv, effective_scheme(in.pipeline, conv.indicators));
        for (const auto& r : rs)
            if (!r.score) err << "warning: " << r.code << " has no indicator present and is not scored\n";
        if (cmd == "index")
            append(render_composites(fmt, rs, cfg, in));
        else
            append(render_classification(fmt, classify(rs), countries, cfg, in));
    } else if (cmd == "sensitivity") {
        require_panel(in, cmd);
        const auto& m = in.coverage->matrix;
        std::vector<SensitivityReport> reps;
        const bool targeted = !cfg.drop_country.empty() || !cfg.drop_indicator.empty() || in.scheme_b ||
                              !in.reference.empty();
        if (!cfg.drop_country.empty()) reps.push_back(leave_one_country_out(m, cfg.drop_country, in.pipeline));
        if (!cfg.drop_indicator.empty()) reps.push_back(leave_one_indicator_out(m, cfg.drop_indicator, in.pipeline));
        if (in.scheme_b) {
            const auto base = run_pipeline(m, in.pipeline);
            reps.push_back(compare_weights(base.converted, base.scheme, *in.scheme_b));
        }
        if (!in.reference.empty()) {
            const auto base = run_pipeline(m, in.pipeline);
            reps.push_back(compare_with_reference(base.composites, in.reference, cfg.reference_path));
        }
        if (!targeted) {
            for (const auto& c : m.countries) reps.push_back(leave_one_country_out(m, c.code, in.pipeline));
            for (const auto& s : m.indicators) reps.push_back(leave_one_indicator_out(m, s.id, in.pipeline));
        }
        append(render_sensitivity(fmt, reps, cfg, in));
    } else if (cmd == "report") {
        require_panel(in, cmd);
        const auto conv = convert_panel(in);
        const auto rs = aggregate(conv, effective_scheme(in.pipeline, conv.indicators));
        append(render_coverage(fmt, cfg, in));
        append(render_converted(fmt, conv, cfg, in));
        append(render_diagnostics(fmt, "diagnostics", consistency_check(conv, thresholds), cfg, in));
        if (in.stats_table)
            append(render_diagnostics(fmt, "published_tables",
                                      published_tables_report(*in.stats_table, *in.ranges_table, thresholds), cfg, in));
        append(render_composites(fmt, rs, cfg, in));
        append(render_classification(fmt, classify(rs), conv.countries, cfg, in));
        append(render_histograms(in, conv, rs, cfg.bins, header_lines(cfg, in)));
    }
    return out;
}

inline void emit(const std::vector<Artifact>& artifacts, const std::string& out_dir, std::ostream& out) {
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (const auto& a : artifacts) {
            const auto path = std::filesystem::path(out_dir) / (a.stem + "." + a.ext);
            std::ofstream f(path, std::ios::binary);
            if (!f) throw Error(ErrorKind::validation, "cannot write '" + path.string() + "'");
            f << a.content;
        }
        return;
    }
    if (artifacts.size() == 1) {
        out << artifacts.front().content;
        return;
    }
    for (std::size_t k = 0; k < artifacts.size(); ++k) {
        if (k) out << '\n';
        out << "==> " << artifacts[k].stem << "." << artifacts[k].ext << " <==\n" << artifacts[k].content;
    }
}

/// Parses arguments, runs one subcommand. Returns 0 on success, 1 on a
/// validation error, 2 on a computation error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Composite indicator index construction", "compidx"};
    app.require_subcommand(1);
    RunConfig cfg;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ingest", "validate the panel and print the coverage table"},
        {"diagnose", "summary statistics, correlations, ranges and consistency flags"},
        {"convert", "write the standardized matrix"},
        {"index", "write composite scores"},
        {"rank", "write ranks and classification bands"},
        {"sensitivity", "leave-one-out and weight-comparison rank robustness"},
        {"report", "all of the above plus histogram plot data"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--data", cfg.data_path, "panel CSV");
        sub->add_option("--specs", cfg.specs_path, "indicator specs JSON (default: reference indicators)");
        sub->add_option("--exclusions", cfg.exclusions_path, "CODE,reason list of countries to exclude");
        sub->add_option("--weights", cfg.weights_path, "weight scheme JSON (default: equal weights)");
        sub->add_option("--bounds", cfg.bounds_path, "min-max bounds JSON");
        sub->add_option("--method", cfg.method, "conversion method")->check(CLI::IsMember({"zscore", "minmax"}));
        sub->add_option("--min-indicators", cfg.min_indicators, "coverage cutoff")->capture_default_str();
        sub->add_option("--missing", cfg.missing, "missing-data policy")
            ->check(CLI::IsMember({"renormalize", "zerofill"}));
        sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"text", "csv", "json"}));
        sub->add_option("--out", cfg.out_dir, "write artifacts into this directory instead of stdout");
        sub->add_flag("--sample-stats", cfg.sample_stats, "use n-1 standard deviation and adjusted skewness");
        if (name == "diagnose" || name == "report") {
            sub->add_flag("--paper-tables", cfg.paper_tables, "cross-check the bundled published summary tables");
            sub->add_option("--stats-table", cfg.stats_table_path, "published summary statistics CSV");
            sub->add_option("--ranges-table", cfg.ranges_table_path, "published converted ranges CSV");
            sub->add_option("--corr-threshold", cfg.corr_threshold, "|R| flag threshold")->capture_default_str();
            sub->add_option("--skew-threshold", cfg.skew_threshold, "|skewness| flag threshold")->capture_default_str();
        }
        if (name == "index" || name == "rank")
            sub->add_option("--converted", cfg.converted_path, "converted CSV written by 'convert --format csv'");
        if (name == "report") sub->add_option("--bins", cfg.bins, "histogram bin count")->capture_default_str();
        if (name == "sensitivity") {
            sub->add_option("--drop-country", cfg.drop_country, "leave this country out");
            sub->add_option("--drop-indicator", cfg.drop_indicator, "leave this indicator out");
            sub->add_option("--weights-b", cfg.weights_b_path, "second weight scheme to compare against --weights");
            sub->add_option("--reference", cfg.reference_path, "code,value CSV of an external comparison variable");
        }
        sub->callback([&cfg, n = name] { cfg.command = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;
    }

    Inputs in;
    try {
        in = load_inputs(cfg);
    } catch (const Error& e) {
        err << "compidx: " << e.what() << "\n";
        return e.is_input_error() ? 1 : 2;
    }
    try {
        emit(execute(cfg, in, err), cfg.out_dir, out);
    } catch (const Error& e) {
        err << "compidx: " << e.what() << "\n";
        return e.is_input_error() ? 1 : 2;
    } catch (const std::exception& e) {
        err << "compidx: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace compidx::cli
