// Load a panel, keep countries with at least 7 of 8 indicators, standardize,
// aggregate with equal weights and print the classification.
#include <iostream>
#include <string>

#include "compidx/compidx.hpp"

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : SAMPLES_DIR;
    try {
        const auto specs = compidx::parse_indicator_specs_json(compidx::text::read_file(dir + "/specs.json"));
        const auto raw = compidx::load_dataset(compidx::text::read_file(dir + "/panel.csv"), specs);
        const auto exclusions = compidx::parse_exclusion_list(compidx::text::read_file(dir + "/exclusions.txt"));
        const auto kept = compidx::apply_exclusions(raw, exclusions);
        const auto cov = compidx::coverage_filter(kept, 7);
        std::cout << compidx::coverage_table_text(cov.report) << '\n';

        const auto conv = compidx::z_convert(cov.matrix);
        const auto scores = compidx::aggregate(conv, compidx::equal_weight_scheme(specs));
        const auto ranked = compidx::classify(scores);
        std::cout << compidx::classifications_text(ranked, conv.countries);
    } catch (const compidx::Error& e) {
        std::cerr << e.what() << '\n';
        return e.is_input_error() ? 1 : 2;
    }
    return 0;
}
