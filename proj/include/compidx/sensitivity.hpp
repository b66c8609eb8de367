#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/aggregate.hpp"
#include "compidx/classify.hpp"
#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/normalize.hpp"
#include "compidx/text.hpp"

namespace compidx {

// ---------------------------------------------------------------------------
// Rank correlation
// ---------------------------------------------------------------------------

/// Ascending ranks, tied values sharing the mean of their positions.
inline std::vector<double> mid_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t pos = 0;
    while (pos < order.size()) {
        std::size_t end = pos + 1;
        while (end < order.size() && values[order[end]] == values[order[pos]]) ++end;
        const double mid = 0.5 * static_cast<double>(pos + 1 + end);  // mean of pos+1 .. end
        for (std::size_t k = pos; k < end; ++k) ranks[order[k]] = mid;
        pos = end;
    }
    return ranks;
}

/// Spearman's rho between two rankings of the same entities (matched by
/// position). Values may be ranks or scores; only their order matters.
/// Tie-free inputs use 1 - 6 sum(d^2) / (n (n^2 - 1)); otherwise Pearson R of the mid-ranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::argument, "spearman: rankings cover different entity counts");
    if (a.size() < 2) throw Error(ErrorKind::argument, "spearman: need at least 2 entities");
    const auto ra = mid_ranks(a);
    const auto rb = mid_ranks(b);
    const auto tie_free = [](const std::vector<double>& r) {
        return std::all_of(r.begin(), r.end(), [](double x) { return x == std::floor(x); }) &&
               std::set<double>(r.begin(), r.end()).size() == r.size();
    };
    const double n = static_cast<double>(a.size());
    if (tie_free(ra) && tie_free(rb)) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
        return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    }
    const double mean = (n + 1.0) / 2.0;  // mid-ranks always average to (n+1)/2
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0)
        throw Error(ErrorKind::degenerate, "spearman: a ranking with every entity tied");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct RankedEntity {
    std::string code;
    double value = 0.0;
};

/// Spearman's rho between two rankings keyed by entity code. Both must cover the same set.
inline double spearman(std::span<const RankedEntity> a, std::span<const RankedEntity> b) {
    std::map<std::string, double, std::less<>> bm;
    for (const auto& e : b) bm[e.code] = e.value;
    if (bm.size() != a.size() || b.size() != a.size())
        throw Error(ErrorKind::argument, "spearman: rankings cover different entity sets");
    std::vector<double> va, vb;
    for (const auto& e : a) {
        const auto it = bm.find(e.code);
        if (it == bm.end())
            throw Error(ErrorKind::argument, "spearman: '" + e.code + "' missing from second ranking");
        va.push_back(e.value);
        vb.push_back(it->second);
    }
    return spearman(va, vb);
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineConfig {
    Method method = Method::z_score;
    Dispersion dispersion = Dispersion::population;
    BoundsMap bounds;  // min-max only
    /// Defaults to equal weights under `missing_policy` when empty.
    std::optional<WeightScheme> scheme;
    MissingPolicy missing_policy = MissingPolicy::renormalize;
};

struct PipelineResult {
    ConvertedMatrix converted;
    WeightScheme scheme;
    std::vector<CompositeResult> composites;
};

inline WeightScheme effective_scheme(const PipelineConfig& config,
                                     std::span<const IndicatorSpec> indicators) {
    if (!config.scheme) return equal_weight_scheme(indicators, config.missing_policy);
    std::vector<std::string> ids;
    for (const auto& s : indicators) ids.push_back(s.id);
    if (config.scheme->ids().size() == ids.size()) return *config.scheme;
    return config.scheme->restricted_to(ids);
}

/// Conversion followed by aggregation, recomputed from scratch.
inline PipelineResult run_pipeline(const DataMatrix& matrix, const PipelineConfig& config) {
    PipelineResult r;
    r.converted = config.method == Method::z_score ? z_convert(matrix, config.dispersion)
                                                   : minmax_convert(matrix, config.bounds);
    r.scheme = effective_scheme(config, matrix.indicators);
    r.composites = aggregate(r.converted, r.scheme);
    return r;
}

// ---------------------------------------------------------------------------
// Sensitivity reports
// ---------------------------------------------------------------------------

enum class SensitivityKind { leave_country_out, leave_indicator_out, weight_comparison, external_reference };

inline const char* to_string(SensitivityKind k) {
    switch (k) {
        case SensitivityKind::leave_country_out: return "leave_country_out";
        case SensitivityKind::leave_indicator_out: return "leave_indicator_out";
        case SensitivityKind::weight_comparison: return "weight_comparison";
        case SensitivityKind::external_reference: return "external_reference";
    }
    return "?";
}

struct RankShift {
    std::string code;
    double old_score = 0.0;
    double new_score = 0.0;
    std::size_t old_rank = 0;
    std::size_t new_rank = 0;

    [[nodiscard]] long shift() const {
        return static_cast<long>(new_rank) - static_cast<long>(old_rank);
    }
};

struct SensitivityReport {
    SensitivityKind kind = SensitivityKind::leave_country_out;
    std::string subject;
    double spearman = 1.0;
    std::size_t max_rank_shift = 0;
    /// Every country scored on both sides, in baseline order.
    std::vector<RankShift> entries;
    /// Entries whose rank changed, sorted by |shift| descending then code.
    std::vector<RankShift> shifted;
    /// Countries scored in the baseline that lost their score in the variant.
    std::vector<std::string> dropped;
};

/// Compares two score sets over the countries scored in both, re-ranking each side over that set.
inline SensitivityReport compare_scores(SensitivityKind kind, std::string subject,
                                        std::span<const CompositeResult> baseline,
                                        std::span<const CompositeResult> variant,
                                        std::string_view removed_code = {}) {
    std::map<std::string, double, std::less<>> vm;
    for (const auto& r : variant)
        if (r.score) vm[r.code] = *r.score;

    SensitivityReport rep;
    rep.kind = kind;
    rep.subject = std::move(subject);
    std::vector<double> old_scores, new_scores;
    for (const auto& r : baseline) {
        if (!r.score || r.code == removed_code) continue;
        const auto it = vm.find(r.code);
        if (it == vm.end()) {
            rep.dropped.push_back(r.code);
            continue;
        }
        rep.entries.push_back({r.code, *r.score, it->second, 0, 0});
        old_scores.push_back(*r.score);
        new_scores.push_back(it->second);
    }
    if (rep.entries.size() < 2)
        throw Error(ErrorKind::insufficient_data, "fewer than 2 countries scored in both rankings");

    const auto old_ranks = competition_ranks(old_scores);
    const auto new_ranks = competition_ranks(new_scores);
    for (std::size_t k = 0; k < rep.entries.size(); ++k) {
        rep.entries[k].old_rank = old_ranks[k];
        rep.entries[k].new_rank = new_ranks[k];
        const auto s = static_cast<std::size_t>(std::labs(rep.entries[k].shift()));
        rep.max_rank_shift = std::max(rep.max_rank_shift, s);
        if (s > 0) rep.shifted.push_back(rep.entries[k]);
    }
    std::sort(rep.shifted.begin(), rep.shifted.end(), [](const RankShift& a, const RankShift& b) {
        const auto sa = std::labs(a.shift()), sb = std::labs(b.shift());
        return sa != sb ? sa > sb : a.code < b.code;
    });
    rep.spearman = spearman(old_scores, new_scores);
    return rep;
}

/// Re-runs the pipeline without one country.
inline SensitivityReport leave_one_country_out(const DataMatrix& matrix, std::string_view code,
                                               const PipelineConfig& config) {
    const auto row = matrix.find_country(code);
    if (!row) throw Error(ErrorKind::argument, "unknown country '" + std::string(code) + "'");
    if (matrix.country_count() < 4)
        throw Error(ErrorKind::argument, "leave-one-country-out needs at least 3 remaining countries");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < matrix.country_count(); ++i)
        if (i != *row) keep.push_back(i);
    const auto reduced = matrix.select(keep, detail::iota_indices(matrix.indicator_count()));
    const auto base = run_pipeline(matrix, config);
    const auto variant = run_pipeline(reduced, config);
    return compare_scores(SensitivityKind::leave_country_out, std::string(code), base.composites,
                          variant.composites, code);
}

/// Re-runs the pipeline without one indicator; the weight scheme is
/// restricted to the remaining indicators and renormalized.
inline SensitivityReport leave_one_indicator_out(const DataMatrix& matrix, std::string_view id,
                                                 const PipelineConfig& config) {
    const auto col = matrix.find_indicator(id);
    if (!col) throw Error(ErrorKind::argument, "unknown indicator '" + std::string(id) + "'");
    if (matrix.indicator_count() < 2)
        throw Error(ErrorKind::argument, "leave-one-indicator-out needs at least 2 indicators");
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < matrix.indicator_count(); ++j)
        if (j != *col) cols.push_back(j);
    const auto reduced = matrix.select(detail::iota_indices(matrix.country_count()), cols);
    const auto base = run_pipeline(matrix, config);
    const auto variant = run_pipeline(reduced, config);
    return compare_scores(SensitivityKind::leave_indicator_out, std::string(id), base.composites,
                          variant.composites);
}

/// Ranks the same converted panel under two weight schemes.
inline SensitivityReport compare_weights(const ConvertedMatrix& converted, const WeightScheme& a,
                                         const WeightScheme& b) {
    const auto ra = aggregate(converted, a);
    const auto rb = aggregate(converted, b);
    return compare_scores(SensitivityKind::weight_comparison, a.name() + " vs " + b.name(), ra, rb);
}

/// Rank agreement between composite scores and an external per-country variable.
inline SensitivityReport compare_with_reference(std::span<const CompositeResult> composites,
                                                std::span<const RankedEntity> reference,
                                                std::string label) {
    std::vector<CompositeResult> ref;
    for (const auto& e : reference) {
        CompositeResult r;
        r.code = e.code;
        r.score = e.value;
        ref.push_back(std::move(r));
    }
    return compare_scores(SensitivityKind::external_reference, std::move(label), composites, ref);
}

inline nlohmann::json sensitivity_to_json(const SensitivityReport& rep) {
    using nlohmann::json;
    const auto shift_json = [](const RankShift& s) {
        return json{{"code", s.code},         {"old_rank", s.old_rank},   {"new_rank", s.new_rank},
                    {"shift", s.shift()},     {"old_score", s.old_score}, {"new_score", s.new_score}};
    };
    json j{{"kind", to_string(rep.kind)},
           {"subject", rep.subject},
           {"spearman", rep.spearman},
           {"max_rank_shift", rep.max_rank_shift},
           {"dropped", rep.dropped}};
    j["shifted"] = json::array();
    for (const auto& s : rep.shifted) j["shifted"].push_back(shift_json(s));
    return j;
}

inline std::string sensitivity_to_text(const SensitivityReport& rep) {
    std::string out = std::string(to_string(rep.kind)) + ": " + rep.subject + "\n";
    out += "  spearman " + text::format_fixed(rep.spearman, 4) + ", max rank shift " +
           std::to_string(rep.max_rank_shift) + ", " + std::to_string(rep.entries.size()) +
           " countries compared\n";
    if (!rep.dropped.empty()) {
        out += "  lost score:";
        for (const auto& c : rep.dropped) out += " " + c;
        out += '\n';
    }
    for (const auto& s : rep.shifted) {
        const auto shift = s.shift();
        out += "    " + s.code + "  " + text::pad_left(std::to_string(s.old_rank), 4) + " -> " +
               text::pad_left(std::to_string(s.new_rank), 4) + "  (" + (shift > 0 ? "+" : "") +
               std::to_string(shift) + ")\n";
    }
    return out;
}

}  // namespace compidx
