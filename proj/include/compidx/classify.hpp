#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/aggregate.hpp"
#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/text.hpp"

namespace compidx {

enum class Band { advanced, proficient, developing, lagging };

inline const char* to_string(Band b) {
    switch (b) {
        case Band::advanced: return "advanced";
        case Band::proficient: return "proficient";
        case Band::developing: return "developing";
        case Band::lagging: return "lagging";
    }
    return "?";
}

/// Recorded in every artifact header that carries bands.
inline constexpr std::string_view kBandConvention =
    "mean+/-1 population sd of scores, lower edge inclusive: advanced >= mu+s > proficient >= mu "
    "> developing >= mu-s > lagging; edges absorb 1e-9 s of rounding";

struct Classification {
    std::string code;
    std::size_t rank = 0;
    Band band = Band::lagging;
    double score = 0.0;
};

/// Scores within kEdgeTolerance * sd below an edge count as on it, so a
/// score that sits exactly on an edge (e.g. both scores when n = 2) keeps
/// its band when every score goes through the same positive affine map.
inline constexpr double kEdgeTolerance = 1e-9;

struct BandCutoffs {
    double mean = 0.0;
    double std_dev = 0.0;

    [[nodiscard]] Band band_of(double score) const {
        const double tol = kEdgeTolerance * std_dev;
        if (score >= mean + std_dev - tol) return Band::advanced;
        if (score >= mean - tol) return Band::proficient;
        if (score >= mean - std_dev - tol) return Band::developing;
        return Band::lagging;
    }
};

/// Mean and population sd of the scores.
inline BandCutoffs band_cutoffs(std::span<const double> scores) {
    if (scores.size() < 2)
        throw Error(ErrorKind::insufficient_data, "classification needs at least 2 scored countries");
    const double n = static_cast<double>(scores.size());
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*lo == *hi) throw Error(ErrorKind::degenerate, "all composite scores are equal; no bands");
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    return {mean, std::sqrt(ss / n)};
}

/// Competition ranks by descending score: 1 + number of strictly higher scores.
inline std::vector<std::size_t> competition_ranks(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::size_t> ranks(scores.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (pos > 0 && scores[order[pos]] == scores[order[pos - 1]])
            ranks[order[pos]] = ranks[order[pos - 1]];
        else
            ranks[order[pos]] = pos + 1;
    }
    return ranks;
}

/// Ranks and bands every scored country. Output is ordered by rank, ties by code.
inline std::vector<Classification> classify(std::span<const CompositeResult> results) {
    std::vector<const CompositeResult*> scored;
    for (const auto& r : results)
        if (r.score) scored.push_back(&r);
    std::vector<double> scores;
    for (const auto* r : scored) scores.push_back(*r->score);
    const auto cut = band_cutoffs(scores);
    const auto ranks = competition_ranks(scores);

    std::vector<Classification> out;
    for (std::size_t k = 0; k < scored.size(); ++k)
        out.push_back({scored[k]->code, ranks[k], cut.band_of(scores[k]), scores[k]});
    std::sort(out.begin(), out.end(), [](const Classification& a, const Classification& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.code < b.code;
    });
    return out;
}

/// CSV `rank,code,name,score,band`; names are looked up in `countries`.
inline std::string classifications_csv(std::span<const Classification> rows,
                                       std::span<const CountryRecord> countries,
                                       std::span<const std::string> comment_lines = {}) {
    std::string out;
    for (const auto& c : comment_lines) out += "# " + c + "\n";
    out += "rank,code,name,score,band\n";
    for (const auto& r : rows) {
        std::string name;
        for (const auto& c : countries)
            if (c.code == r.code) name = c.name;
        out += std::to_string(r.rank) + "," + r.code + "," + text::csv_escape(name) + "," +
               text::format_exact(r.score) + "," + to_string(r.band) + "\n";
    }
    return out;
}

inline std::string classifications_text(std::span<const Classification> rows,
                                        std::span<const CountryRecord> countries) {
    std::string out = text::pad_left("rank", 5) + "  code  " + text::pad_right("name", 28) +
                      text::pad_left("score", 9) + "  band\n";
    for (const auto& r : rows) {
        std::string name;
        for (const auto& c : countries)
            if (c.code == r.code) name = c.name;
        out += text::pad_left(std::to_string(r.rank), 5) + "  " + r.code + "   " +
               text::pad_right(name.substr(0, 27), 28) +
               text::pad_left(text::format_fixed(r.score, 3), 9) + "  " + to_string(r.band) + "\n";
    }
    return out;
}

inline nlohmann::json classifications_to_json(std::span<const Classification> rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"rank", r.rank}, {"code", r.code}, {"score", r.score}, {"band", to_string(r.band)}});
    return arr;
}

}  // namespace compidx
