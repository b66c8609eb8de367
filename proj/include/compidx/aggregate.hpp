#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "compidx/dataset.hpp"
#include "compidx/error.hpp"
#include "compidx/normalize.hpp"
#include "compidx/text.hpp"

namespace compidx {

/// How a missing converted value enters the weighted mean.
enum class MissingPolicy {
    renormalize,  // divide by the weight of the present indicators only
    zero_fill,    // treat missing as 0 and divide by the full weight
};

inline const char* to_string(MissingPolicy p) {
    return p == MissingPolicy::renormalize ? "renormalize" : "zerofill";
}

inline MissingPolicy parse_missing_policy(std::string_view s) {
    if (s == "renormalize") return MissingPolicy::renormalize;
    if (s == "zerofill" || s == "zero_fill") return MissingPolicy::zero_fill;
    throw Error(ErrorKind::argument, "unknown missing-data policy '" + std::string(s) + "'");
}

/// Named indicator weights, stored normalized to sum 1.
class WeightScheme {
public:
    WeightScheme() = default;

    WeightScheme(std::string name, const std::vector<std::pair<std::string, double>>& weights,
                 MissingPolicy policy = MissingPolicy::renormalize)
        : name_(std::move(name)), policy_(policy) {
        double total = 0.0;
        for (const auto& [id, w] : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw Error(ErrorKind::argument,
                            "weight for '" + id + "' must be finite and nonnegative");
            for (const auto& existing : ids_)
                if (existing == id)
                    throw Error(ErrorKind::argument, "indicator '" + id + "' weighted twice");
            ids_.push_back(id);
            total += w;
        }
        if (!(total > 0.0))
            throw Error(ErrorKind::argument, "weight scheme '" + name_ + "' has no positive weight");
        for (const auto& [id, w] : weights) weights_.push_back(w / total);
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] MissingPolicy missing_policy() const noexcept { return policy_; }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] std::optional<double> weight(std::string_view id) const {
        for (std::size_t k = 0; k < ids_.size(); ++k)
            if (ids_[k] == id) return weights_[k];
        return std::nullopt;
    }

    [[nodiscard]] WeightScheme with_policy(MissingPolicy p) const {
        WeightScheme copy = *this;
        copy.policy_ = p;
        return copy;
    }

    /// The scheme restricted to `keep`, renormalized. Throws if nothing positive remains.
    [[nodiscard]] WeightScheme restricted_to(std::span<const std::string> keep) const {
        std::vector<std::pair<std::string, double>> w;
        for (const auto& id : keep) {
            const auto v = weight(id);
            if (!v) throw Error(ErrorKind::argument, "scheme '" + name_ + "' has no weight for '" + id + "'");
            w.emplace_back(id, *v);
        }
        return WeightScheme(name_, w, policy_);
    }

private:
    std::string name_;
    std::vector<std::string> ids_;
    std::vector<double> weights_;
    MissingPolicy policy_ = MissingPolicy::renormalize;
};

inline WeightScheme equal_weight_scheme(std::span<const IndicatorSpec> specs,
                                        MissingPolicy policy = MissingPolicy::renormalize) {
    std::vector<std::pair<std::string, double>> w;
    for (const auto& s : specs) w.emplace_back(s.id, 1.0);
    return WeightScheme("equal", w, policy);
}

/// Each indicator gets its domain's weight split evenly across the domain's
/// indicators, so domains contribute in the given proportions.
inline WeightScheme domain_weighted_scheme(const std::map<Domain, double>& domain_weights,
                                           std::span<const IndicatorSpec> specs,
                                           MissingPolicy policy = MissingPolicy::renormalize,
                                           std::string name = "domain") {
    std::map<Domain, std::size_t> sizes;
    for (const auto& s : specs) ++sizes[s.domain];
    bool any_positive = false;
    for (const auto& [d, w] : domain_weights) {
        if (!(w >= 0.0))
            throw Error(ErrorKind::argument, std::string("domain weight for '") + to_string(d) +
                                                 "' must be nonnegative");
        if (w > 0.0) {
            any_positive = true;
            if (sizes[d] == 0)
                throw Error(ErrorKind::argument, std::string("domain '") + to_string(d) +
                                                     "' is weighted but has no indicators");
        }
    }
    if (!any_positive) throw Error(ErrorKind::argument, "no domain has a positive weight");
    std::vector<std::pair<std::string, double>> w;
    for (const auto& s : specs) {
        const auto it = domain_weights.find(s.domain);
        const double dw = it == domain_weights.end() ? 0.0 : it->second;
        w.emplace_back(s.id, dw / static_cast<double>(sizes[s.domain]));
    }
    return WeightScheme(std::move(name), w, policy);
}

/// {"name": ..., "weights": {id: w, ...}, "missing_policy": "renormalize"|"zero_fill"}.
/// Weights keep the order of `specs` when given, otherwise document order.
inline WeightScheme parse_weight_scheme_json(std::string_view json_text,
                                             std::span<const IndicatorSpec> specs = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::schema, std::string("weight scheme: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("weights") || !doc["weights"].is_object())
        throw Error(ErrorKind::schema, "weight scheme needs a 'weights' object");
    const std::string name = doc.value("name", "custom");
    const MissingPolicy policy = parse_missing_policy(doc.value("missing_policy", "renormalize"));
    const auto& wj = doc["weights"];
    for (const auto& [id, v] : wj.items())
        if (!v.is_number())
            throw Error(ErrorKind::schema, "weight for '" + id + "' is not a number");
    std::vector<std::pair<std::string, double>> w;
    if (specs.empty()) {
        for (const auto& [id, v] : wj.items()) w.emplace_back(id, v.get<double>());
    } else {
        for (const auto& s : specs)
            if (wj.contains(s.id)) w.emplace_back(s.id, wj[s.id].get<double>());
        for (const auto& [id, v] : wj.items()) {
            bool known = false;
            for (const auto& s : specs) known = known || s.id == id;
            if (!known) w.emplace_back(id, v.get<double>());
        }
    }
    return WeightScheme(name, w, policy);
}

struct CompositeResult {
    std::string code;
    std::optional<double> score;
    std::size_t coverage = 0;
    /// Indexed by Domain.
    std::array<std::optional<double>, 3> domain_scores{};

    [[nodiscard]] const std::optional<double>& domain_score(Domain d) const {
        return domain_scores[static_cast<std::size_t>(d)];
    }
};

namespace detail {

/// Weighted mean over `columns` of one row under the scheme's missing policy.
inline std::optional<double> weighted_row(std::span<const std::optional<double>> row,
                                          std::span<const std::size_t> columns,
                                          std::span<const double> weights, MissingPolicy policy) {
    double num = 0.0;
    double present_weight = 0.0;
    double total_weight = 0.0;
    bool any_present = false;
    for (auto j : columns) {
        total_weight += weights[j];
        if (!row[j]) continue;
        any_present = true;
        num += weights[j] * *row[j];
        present_weight += weights[j];
    }
    if (!any_present) return std::nullopt;
    const double den = policy == MissingPolicy::renormalize ? present_weight : total_weight;
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

}  // namespace detail

/// Weighted linear composite per country, plus the same rule applied within
/// each domain. Countries without any present value get no score.
inline std::vector<CompositeResult> aggregate(const ConvertedMatrix& conv, const WeightScheme& scheme) {
    const std::size_t k = conv.indicators.size();
    if (scheme.ids().size() != k)
        throw Error(ErrorKind::argument, "weight scheme '" + scheme.name() + "' covers " +
                                             std::to_string(scheme.ids().size()) +
                                             " indicators, matrix has " + std::to_string(k));
    std::vector<double> weights(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto w = scheme.weight(conv.indicators[j].id);
        if (!w)
            throw Error(ErrorKind::argument, "weight scheme '" + scheme.name() +
                                                 "' has no weight for '" + conv.indicators[j].id + "'");
        weights[j] = *w;
    }
    const auto all = detail::iota_indices(k);
    std::array<std::vector<std::size_t>, 3> by_domain;
    for (std::size_t j = 0; j < k; ++j)
        by_domain[static_cast<std::size_t>(conv.indicators[j].domain)].push_back(j);

    std::vector<CompositeResult> out;
    out.reserve(conv.countries.size());
    for (std::size_t i = 0; i < conv.countries.size(); ++i) {
        const auto row = conv.values.row(i);
        CompositeResult r;
        r.code = conv.countries[i].code;
        r.coverage = conv.coverage(i);
        r.score = detail::weighted_row(row, all, weights, scheme.missing_policy());
        for (std::size_t d = 0; d < 3; ++d)
            if (!by_domain[d].empty())
                r.domain_scores[d] = detail::weighted_row(row, by_domain[d], weights, scheme.missing_policy());
        out.push_back(std::move(r));
    }
    return out;
}

/// CSV `code,score,coverage,precondition,resource,output`; absent scores are empty cells.
inline std::string composites_csv(std::span<const CompositeResult> results,
                                  std::span<const std::string> comment_lines = {}) {
    std::string out;
    for (const auto& c : comment_lines) out += "# " + c + "\n";
    out += "code,score,coverage,precondition,resource,output\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? text::format_exact(*v) : std::string();
    };
    for (const auto& r : results) {
        out += r.code + "," + cell(r.score) + "," + std::to_string(r.coverage);
        for (const auto& d : r.domain_scores) out += "," + cell(d);
        out += '\n';
    }
    return out;
}

inline nlohmann::json composites_to_json(std::span<const CompositeResult> results) {
    using nlohmann::json;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json arr = json::array();
    for (const auto& r : results)
        arr.push_back({{"code", r.code},
                       {"score", opt(r.score)},
                       {"coverage", r.coverage},
                       {"precondition", opt(r.domain_scores[0])},
                       {"resource", opt(r.domain_scores[1])},
                       {"output", opt(r.domain_scores[2])}});
    return arr;
}

}  // namespace compidx
