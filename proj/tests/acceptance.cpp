// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "compidx/compidx.hpp"
#include "fixtures.hpp"

using namespace compidx;

namespace {

struct Check {
    bool ok = true;
    std::string why;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Check ac1_implied_extremes() {
    Check c;
    const auto stats = published_stats_table();
    const auto ranges = published_ranges_table();
    const auto t0 = Clock::now();
    const auto rep = implied_extremes_check(stats, ranges);
    const double elapsed = ms_since(t0);
    c.expect(rep.rows.size() == 8, "expected 8 indicator rows");
    c.expect(rep.pass_count() == 8, std::to_string(rep.pass_count()) + "/8 passed");
    for (const auto& r : rep.rows) {
        if (r.id == "patents") {
            c.expect(std::abs(r.implied_raw_min - (31.16 - 0.554 * 56.36)) < 1e-9, "patents implied min");
            c.expect(std::abs(r.tolerance - 0.5636) < 1e-12, "patents tolerance");
        }
        c.expect(r.implied_raw_min >= -r.tolerance, r.id + " below tolerance");
    }
    c.expect(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " ms");
    return c;
}

Check ac2_normalization() {
    Check c;
    std::mt19937_64 rng(2002);
    std::uniform_int_distribution<std::size_t> size(3, 200);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ua(0.01, 100.0), ub(-1000.0, 1000.0);
    const auto t0 = Clock::now();
    for (int t = 0; t < 1000 && c.ok; ++t) {
        const std::size_t n = size(rng);
        // raw values are nonnegative by contract, so b is drawn from [-a min(X), 1000]
        const double scale = std::exp(ua(rng) / 15.0 - 2.0), shape = 0.1 + ua(rng) / 100.0;
        std::vector<double> xs(n);
        for (auto& x : xs) x = scale * std::exp(shape * nd(rng));
        const double a = ua(rng);
        const double lo = -a * *std::min_element(xs.begin(), xs.end());
        const double b = lo + (1000.0 - lo) * (ub(rng) + 1000.0) / 2000.0;
        std::vector<fixtures::Row> rows(n), rows_affine(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = {xs[i]};
            rows_affine[i] = {std::max(0.0, a * xs[i] + b)};
        }
        const auto z = z_convert(fixtures::panel(rows));
        const auto za = z_convert(fixtures::panel(rows_affine));
        double mean = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += *z.values(i, 0);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) ss += (*z.values(i, 0) - mean) * (*z.values(i, 0) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        c.expect(std::abs(mean) < 1e-9, "column mean " + std::to_string(mean));
        c.expect(std::abs(sd - 1.0) < 1e-9, "column sd " + std::to_string(sd));
        for (std::size_t i = 0; i < n; ++i)
            c.expect(std::abs(*z.values(i, 0) - *za.values(i, 0)) < 1e-9, "affine invariance");
    }
    const double elapsed = ms_since(t0);
    c.expect(elapsed < 1000.0, "runtime " + std::to_string(elapsed) + " ms");
    return c;
}

// Independent brute-force composite: z-scores from scratch, equal weights,
// renormalized (divide by present count) or zero-filled (divide by K).
std::vector<std::optional<double>> oracle_composite(const DataMatrix& m, bool zero_fill) {
    const std::size_t n = m.country_count(), k = m.indicator_count();
    std::vector<std::optional<double>> out(n);
    std::vector<double> mu(k), sigma(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> present;
        for (std::size_t i = 0; i < n; ++i)
            if (m.values(i, j)) present.push_back(*m.values(i, j));
        double s = 0;
        for (double x : present) s += x;
        mu[j] = s / static_cast<double>(present.size());
        double v = 0;
        for (double x : present) v += (x - mu[j]) * (x - mu[j]);
        sigma[j] = std::sqrt(v / static_cast<double>(present.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0;
        std::size_t present = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (!m.values(i, j)) continue;
            total += (*m.values(i, j) - mu[j]) / sigma[j];
            ++present;
        }
        if (present == 0) continue;
        out[i] = total / static_cast<double>(zero_fill ? k : present);
    }
    return out;
}

Check ac3_oracle_equivalence() {
    Check c;
    const auto m = fixtures::five_by_eight();
    std::size_t missing = 0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 8; ++j) missing += m.values(i, j) ? 0 : 1;
    c.expect(m.country_count() == 5 && m.indicator_count() == 8 && missing == 2, "fixture shape");
    for (auto policy : {MissingPolicy::renormalize, MissingPolicy::zero_fill}) {
        PipelineConfig cfg;
        cfg.missing_policy = policy;
        const auto got = run_pipeline(m, cfg).composites;
        const auto want = oracle_composite(m, policy == MissingPolicy::zero_fill);
        for (std::size_t i = 0; i < 5; ++i)
            c.expect(got[i].score && std::abs(*got[i].score - *want[i]) <= 1e-12,
                     std::string(to_string(policy)) + ": " + m.countries[i].code);
        const std::vector<std::string> header = {"method=zscore missing_policy=" + std::string(to_string(policy))};
        const auto csv1 = composites_csv(got, header);
        const auto csv2 = composites_csv(run_pipeline(m, cfg).composites, header);
        c.expect(csv1 == csv2, "CSV differs between runs");
    }
    return c;
}

Check ac4_minmax_bounds() {
    Check c;
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200 && c.ok; ++t) {
        const auto m = fixtures::random_panel(rng, 4 + rng() % 40, 1 + rng() % 8);
        BoundsMap bounds;
        for (std::size_t j = 0; j < m.indicator_count(); ++j) {
            double lo = 1e9, hi = -1e9;
            for (std::size_t i = 0; i < m.country_count(); ++i) {
                lo = std::min(lo, *m.values(i, j));
                hi = std::max(hi, *m.values(i, j));
            }
            // bounds that sometimes cut into the data and sometimes enclose it
            const double span = hi - lo;
            const double bmin = lo + (u(rng) - 0.5) * span;
            const double bmax = std::max(bmin + 1e-3 * span + 1e-9, hi + (u(rng) - 0.5) * span);
            bounds[m.indicators[j].id] = {bmin, bmax};
        }
        const auto conv = minmax_convert(m, bounds);
        for (std::size_t j = 0; j < m.indicator_count(); ++j) {
            const auto& b = bounds.at(m.indicators[j].id);
            std::size_t outside = 0;
            for (std::size_t i = 0; i < m.country_count(); ++i) {
                const double x = *m.values(i, j), y = *conv.values(i, j);
                if (x < b.min || x > b.max) ++outside;
                c.expect(y >= 0.0 && y <= 1.0, "converted value outside [0, 1]");
            }
            c.expect(conv.clamp_counts[j] == outside, "clamp count differs from direct scan");
        }
        PipelineConfig cfg;
        cfg.method = Method::min_max;
        cfg.bounds = bounds;
        const auto rep = leave_one_country_out(m, m.countries[rng() % m.country_count()].code, cfg);
        for (const auto& e : rep.entries) c.expect(e.old_score == e.new_score, "score changed for " + e.code);
    }
    return c;
}

Check ac5_relative_index() {
    Check c;
    std::mt19937_64 rng(5005);
    for (int t = 0; t < 100 && c.ok; ++t) {
        const std::size_t n = 5 + rng() % 30, k = 1 + rng() % 6;
        auto m = fixtures::random_panel(rng, n, k);
        for (std::size_t j = 0; j < k; ++j)
            if (rng() % 4 == 0) m.values(rng() % n, j).reset();
        const auto full = z_convert(m);
        const std::size_t drop = rng() % n;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n; ++i)
            if (i != drop) keep.push_back(i);
        const auto reduced = z_convert(m.select(keep, detail::iota_indices(k)));
        for (std::size_t j = 0; j < k; ++j) {
            if (!m.values(drop, j)) continue;
            for (std::size_t r = 0; r < keep.size(); ++r) {
                const auto& before = full.values(keep[r], j);
                if (!before) continue;
                c.expect(*before != *reduced.values(r, j), "value unchanged after removing a country");
            }
        }
    }

    // a country sitting exactly at every column mean: integer data keeps the means exact
    for (int t = 0; t < 100 && c.ok; ++t) {
        const std::size_t n = 4 + rng() % 20, k = 1 + rng() % 6;
        std::vector<fixtures::Row> rows(n + 1, fixtures::Row(k));
        for (std::size_t j = 0; j < k; ++j) {
            double sum = 0;
            for (std::size_t i = 0; i < n; ++i) {
                rows[i][j] = static_cast<double>(rng() % 1000);
                sum += *rows[i][j];
            }
            // nudge the last value so the sum is a multiple of n
            const double fix = std::fmod(sum, static_cast<double>(n));
            *rows[n - 1][j] += static_cast<double>(n) - fix;
            rows[n][j] = (sum + static_cast<double>(n) - fix) / static_cast<double>(n);
        }
        const auto m = fixtures::panel(rows);
        std::vector<std::size_t> keep(n);
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        const auto with = z_convert(m);
        const auto without = z_convert(m.select(keep, detail::iota_indices(k)));
        for (std::size_t j = 0; j < k; ++j)
            c.expect(with.per_indicator_stats[j]->mean == without.per_indicator_stats[j]->mean,
                     "column mean moved after removing the mean country");
    }
    return c;
}

Check ac6_rank_band_invariance() {
    Check c;
    std::mt19937_64 rng(6006);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ua(0.1, 10.0), ub(-5.0, 5.0);
    const auto as_results = [](const std::vector<double>& s) {
        std::vector<CompositeResult> out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            CompositeResult r;
            r.code = fixtures::code_for(i);
            r.score = s[i];
            out.push_back(r);
        }
        return out;
    };
    for (int t = 0; t < 300 && c.ok; ++t) {
        const std::size_t n = 2 + rng() % 60;
        std::vector<double> s(n), aff(n), mono(n);
        const double a = ua(rng), b = ub(rng);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = nd(rng);
            aff[i] = a * s[i] + b;
            mono[i] = std::exp(s[i]) + s[i] * s[i] * s[i];
        }
        const auto base = classify(as_results(s));
        const auto ca = classify(as_results(aff));
        const auto cm = classify(as_results(mono));
        for (std::size_t r = 0; r < n; ++r) {
            c.expect(base[r].code == ca[r].code && base[r].band == ca[r].band, "band changed under affine map");
            c.expect(base[r].code == cm[r].code && base[r].rank == cm[r].rank, "rank changed under monotone map");
        }
        auto m = fixtures::random_panel(rng, 3 + rng() % 30, 1 + rng() % 8);
        const auto conv = z_convert(m);
        std::vector<std::pair<std::string, double>> w, w7;
        for (const auto& spec : m.indicators) {
            const double x = 0.05 + std::abs(nd(rng));
            w.emplace_back(spec.id, x);
            w7.emplace_back(spec.id, 7.0 * x);
        }
        const auto rep = compare_weights(conv, WeightScheme("w", w), WeightScheme("7w", w7));
        c.expect(rep.spearman == 1.0 && rep.max_rank_shift == 0, "compare_weights(w, 7w) not identical");
    }
    const std::vector<double> x = {1, 2, 3}, y = {2, 1, 3};
    c.expect(spearman(x, y) == 0.5, "spearman((1,2,3),(2,1,3)) != 0.5");
    return c;
}

Check ac7_diagnostics() {
    Check c;
    std::mt19937_64 rng(7007);
    for (int t = 0; t < 100 && c.ok; ++t) {
        auto m = fixtures::random_panel(rng, 3 + rng() % 40, 2 + rng() % 8);
        for (std::size_t j = 0; j < m.indicator_count(); ++j)
            if (rng() % 3 == 0) m.values(rng() % m.country_count(), j).reset();
        const auto r = correlation_matrix(m);
        for (std::size_t a = 0; a < r.rows(); ++a) {
            c.expect(r(a, a) && *r(a, a) == 1.0, "diagonal is not 1");
            for (std::size_t b = 0; b < r.cols(); ++b) c.expect(r(a, b) == r(b, a), "correlation not symmetric");
        }
    }

    auto m = fixtures::random_panel(rng, 20, 3);
    for (std::size_t i = 0; i < 20; ++i) m.values(i, 2) = m.values(i, 0);
    const auto rep = consistency_check(z_convert(m));
    bool dup_flagged = false;
    for (const auto& f : rep.flags)
        if (f.kind == FlagKind::substitute_pair && f.subject == "ind0/ind2")
            dup_flagged = f.value && std::abs(*f.value - 1.0) < 1e-12;
    c.expect(dup_flagged, "duplicate column pair not flagged with R = 1");

    const auto pub = published_tables_report(published_stats_table(), published_ranges_table());
    std::set<std::string> skewed;
    for (const auto& f : pub.flags)
        if (f.kind == FlagKind::high_skew) skewed.insert(f.subject);
    c.expect(skewed == std::set<std::string>{"institutions", "coauthorship", "patents"},
             "high_skew flags do not match the three published skews >= 2");
    return c;
}

// Synthetic panel mirroring the published coverage table: 184 retained-pool
// countries in groups of 8..1 present indicators plus 31 sparse countries
// that the exclusion list removes.
struct CoverageFixture {
    DataMatrix panel;
    std::vector<ExclusionEntry> exclusions;
};

inline constexpr std::size_t kGroupSizes[8] = {66, 17, 37, 22, 4, 5, 32, 1};  // coverage 8..1
inline constexpr double kPopShare[7] = {78.74, 4.82, 10.82, 3.72, 0.52, 0.52, 0.86};
inline constexpr double kGdpShare[7] = {91.44, 1.84, 3.84, 1.54, 0.94, 0.14, 0.26};
inline constexpr double kAvgGdpPc[7] = {13193, 2827, 5117, 2614, 17684, 8287, 3763};

CoverageFixture coverage_fixture(std::mt19937_64& rng) {
    const auto specs = reference_indicator_specs();
    const double world_pop = 6.0e9, world_gdp = 4.0e13;
    std::vector<CountryRecord> countries;
    std::vector<fixtures::Row> rows;
    std::uniform_real_distribution<double> val(0.1, 100.0);
    std::vector<std::size_t> cols(8);
    std::iota(cols.begin(), cols.end(), std::size_t{0});

    const auto add_row = [&](std::size_t present) {
        fixtures::Row row(8);
        std::shuffle(cols.begin(), cols.end(), rng);
        for (std::size_t k = 0; k < present; ++k) row[cols[k]] = val(rng);
        rows.push_back(row);
    };

    for (std::size_t g = 0; g < 8; ++g) {
        const std::size_t n = kGroupSizes[g], present = 8 - g;
        if (g == 7) {
            countries.push_back({fixtures::code_for(countries.size()), "sparse", std::nullopt, std::nullopt});
            add_row(present);
            continue;
        }
        // one large country and n-1 equal small ones hitting the group's
        // population share, GDP share and unweighted mean per capita GDP
        const double P = kPopShare[g] / 100.0 * world_pop, G = kGdpShare[g] / 100.0 * world_gdp;
        const double A = kAvgGdpPc[g], nn = static_cast<double>(n);
        const double L = 0.95 * P, s = (P - L) / (nn - 1.0);
        const double y = (L * nn * A - G) / ((nn - 1.0) * (L - s));
        const double x = nn * A - (nn - 1.0) * y;
        for (std::size_t i = 0; i < n; ++i) {
            countries.push_back({fixtures::code_for(countries.size()), "country", i == 0 ? L : s, i == 0 ? x : y});
            add_row(present);
        }
    }
    CoverageFixture f;
    for (std::size_t e = 0; e < 31; ++e) {
        const auto code = fixtures::code_for(countries.size());
        countries.push_back({code, "excluded", 1.0e5, 500.0});
        add_row(rng() % 4);
        f.exclusions.push_back({code, "incomplete records"});
    }
    MaybeGrid grid(rows.size(), 8);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 8; ++j) grid(i, j) = rows[i][j];
    f.panel = make_matrix(std::move(countries), specs, std::move(grid));
    return f;
}

Check ac8_coverage_filter() {
    Check c;
    std::mt19937_64 rng(8008);
    const auto f = coverage_fixture(rng);
    c.expect(f.panel.country_count() == 215 && f.exclusions.size() == 31, "fixture shape");
    const auto kept = apply_exclusions(f.panel, f.exclusions);
    const auto res = coverage_filter(kept, 1);
    const auto& groups = res.report.groups;
    c.expect(groups.size() == 8, "expected 8 coverage groups, got " + std::to_string(groups.size()));
    std::size_t total = 0;
    for (std::size_t g = 0; g < groups.size() && g < 8; ++g) {
        c.expect(groups[g].indicator_count == 8 - g, "group order");
        c.expect(groups[g].country_count == kGroupSizes[g],
                 "group " + std::to_string(8 - g) + ": " + std::to_string(groups[g].country_count) + " countries");
        total += groups[g].country_count;
        if (g < 7) {
            c.expect(std::abs(groups[g].world_population_share_pct - kPopShare[g]) < 1e-6, "population share");
            c.expect(std::abs(groups[g].world_gdp_share_pct - kGdpShare[g]) < 1e-6, "GDP share");
            c.expect(groups[g].avg_gdp_per_capita && std::abs(*groups[g].avg_gdp_per_capita - kAvgGdpPc[g]) < 1e-6,
                     "average per capita GDP");
        }
    }
    c.expect(total == 184, "group counts sum to " + std::to_string(total));
    c.expect(res.report.missing_metadata.size() == 1, "one country without metadata");
    c.expect(coverage_filter(kept, 8).matrix.country_count() == 66, "min_indicators=8 keeps 66");
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"AC1 published-table implied extremes (8/8, < 1 ms)", ac1_implied_extremes},
        {"AC2 z-score normalization properties (1000 columns, < 1 s)", ac2_normalization},
        {"AC3 5x8 fixture vs brute-force oracle, both missing policies", ac3_oracle_equivalence},
        {"AC4 min-max bounds, clamp counts, leave-one-out stability", ac4_minmax_bounds},
        {"AC5 relative-index property", ac5_relative_index},
        {"AC6 rank and band invariance", ac6_rank_band_invariance},
        {"AC7 correlation and skew diagnostics", ac7_diagnostics},
        {"AC8 coverage filter on a 215-country synthetic panel", ac8_coverage_filter},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.why = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %s%s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.ok ? "" : " -- ", c.why.c_str());
        failures += c.ok ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
