#pragma once
// Run configuration with layered sources: defaults < config file <
// environment (FEG_*) < command-line flags.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feg/corpus.hpp"
#include "feg/metrics.hpp"

namespace feg {

enum class GroupBy { none, top_domain };

struct RunConfig {
    std::string corpus;
    std::string concepts;
    std::string embeddings;
    std::string out = "out";
    std::string report;  // optional path for the ingest report JSON
    CohortParams cohort;
    Mode mode = Mode::strict;
    GroupBy group_by = GroupBy::none;
    unsigned threads = 1;
    std::vector<std::string> analyses{"series", "deciles", "deltas", "words", "regress"};
    std::vector<std::string> words{"software", "tool", "device", "review", "guideline", "tutorial",
                                   "new", "novel", "innovative", "theory", "metric", "hypothesis"};
    bool dedup_tokens = false;
    bool use_abstract = false;
    int domain_depth = 5;
    std::optional<int> corpus_end_year;  // defaults to the latest year in the corpus
    std::optional<int> regress_split;    // phase boundary year for the longitudinal regressions

    int window() const { return cohort.window_years; }

    // Keys match the long command-line flags without the leading "--".
    static const std::vector<std::string>& keys();

    // Throws UsageError on unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    // "key = value" lines; '#' starts a comment.
    void load_file(const std::string& path);

    // Reads <prefix><KEY> for every key, KEY upper-cased with '-' -> '_'.
    void apply_env(std::string_view prefix = "FEG_");

    // validate() also checks that the input paths exist.
    void validate() const;
    void validate_settings() const;
};

std::string env_name(std::string_view prefix, std::string_view key);

}  // namespace feg
