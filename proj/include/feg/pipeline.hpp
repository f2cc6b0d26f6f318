#pragma once
// End-to-end analyses over a loaded corpus.
//
// Work is partitioned over focal papers; every per-paper result lands in a
// slot indexed by cohort position and reductions run in id order, so the
// thread count never shows up in the outputs.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "feg/config.hpp"
#include "feg/corpus.hpp"
#include "feg/distances.hpp"
#include "feg/domains.hpp"
#include "feg/metrics.hpp"
#include "feg/report.hpp"
#include "feg/stats.hpp"

namespace feg {

struct SeriesRow {
    std::string group;  // "all" unless grouped by domain
    int year = 0;
    std::size_t n_papers = 0;
    double F = 0.0;
    double E = 0.0;
    double G = 0.0;
    std::optional<double> D;
    std::optional<double> ij_over_k;
};

struct DecileRow {
    int decile = 0;
    std::size_t n = 0;
    double D = 0.0;
    double F = 0.0;
    double E = 0.0;
    double G = 0.0;
};

struct CorrelationRow {
    std::string index;  // F, E or G against D
    std::size_t n = 0;
    std::optional<double> r;
};

struct DeltaRow {
    std::string citation_type;
    std::string metric;
    std::optional<double> M;
    std::optional<double> M_rest;
    std::optional<double> delta;
    double weight = 0.0;       // citations in the group (borderline counts half)
    double weight_rest = 0.0;
};

struct CrossDomainRow {
    std::string citation_type;
    std::string mode;  // original | top
    std::optional<double> pct_cross;
    std::optional<double> pct_cross_rest;
    std::optional<double> delta;
};

struct WordRatioRow {
    std::string index;
    std::string word;
    double prevalence_lower = 0.0;
    double prevalence_upper = 0.0;
    std::optional<double> ratio;
};

struct WordBinRow {
    std::string index;
    std::string word;
    stats::BinPrevalence bin;
};

struct RegressionTable {
    std::string model;
    std::string response;
    stats::OlsResult fit;
};

struct DistanceRow {
    PaperIndex paper = 0;
    DistanceResult semantic_within;
    DistanceResult reference_within;
    DistanceResult venue_within;
    std::optional<double> cited_reference_distance;
    std::optional<double> cited_semantic_distance;
};

// One classified citation citer -> focal with its comparison metrics.
struct CitationObservation {
    PaperIndex citing = 0;
    PaperIndex focal = 0;
    CitationClass cls;
    std::optional<double> disruption_with_k;
    std::optional<double> disruption_no_k;
    std::optional<bool> cross_original;
    std::optional<bool> cross_top;
    std::optional<double> semantic_title;
    std::optional<double> semantic_abstract;
    std::optional<double> reference_paper;
    std::optional<double> reference_venue;
};

class Session {
public:
    explicit Session(RunConfig config);
    // Test hook: analyse an already loaded corpus.
    Session(RunConfig config, std::shared_ptr<const CorpusStore> corpus, std::shared_ptr<const ConceptTree> concepts = nullptr,
            std::shared_ptr<const EmbeddingSet> embeddings = nullptr);

    const RunConfig& config() const { return config_; }

    const CorpusStore& corpus();
    // nullptr when no concept data is available (neither sidecar nor inline).
    const ConceptTree* concepts();
    // nullptr when no embedding directory is configured.
    const EmbeddingSet* embeddings();

    const std::vector<PaperIndex>& cohort();
    // Parallel to cohort().
    const std::vector<PaperMetrics>& metrics();

    // Indexed by PaperIndex; empty sets for dangling ids.
    const std::vector<DomainSet>& original_domains();
    const std::vector<DomainSet>& top_domains();

    std::vector<SeriesRow> longitudinal();
    std::vector<DecileRow> decile_profile();
    std::vector<CorrelationRow> decile_correlations();
    const std::vector<CitationObservation>& citation_observations();
    std::vector<DeltaRow> citation_type_deltas();
    std::vector<CrossDomainRow> cross_domain_rates();
    std::vector<WordRatioRow> word_ratios();
    std::vector<WordBinRow> word_bins();
    std::vector<DistanceRow> paper_distances();
    std::vector<RegressionTable> regressions();

    // Runs a named analysis and writes its files into the sink. Names:
    // ingest, feg, disruption, domains, distances, series, deciles, deltas,
    // words, regress, report (all configured analyses).
    void run(std::string_view analysis, report::OutputSink& sink);

    static const std::vector<std::string>& analysis_names();

private:
    // What a paper's centroid is taken over.
    enum class Source { references, venues, title, abstract };
    using TableKey = std::pair<const EmbeddingStore*, Source>;

    // Per-paper centroids under one store, indexed by PaperIndex.
    struct CentroidTable {
        std::size_t dim = 0;
        std::vector<double> data;
        std::vector<char> found;
        std::optional<std::span<const double>> get(PaperIndex p) const {
            if (!found[p]) return std::nullopt;
            return std::span<const double>(data.data() + p * dim, dim);
        }
    };

    const EmbeddingStore* store_for(EmbeddingNamespace ns, int year);
    int series_end_year();
    // Builds any missing tables; call outside parallel regions.
    void prepare_centroids(const std::set<TableKey>& keys);
    std::optional<double> centroid_distance(const EmbeddingStore* store, Source src, PaperIndex a, PaperIndex b) const;

    RunConfig config_;
    std::shared_ptr<const CorpusStore> corpus_;
    std::shared_ptr<const ConceptTree> concepts_;
    bool concepts_loaded_ = false;
    std::shared_ptr<const EmbeddingSet> embeddings_;
    bool embeddings_loaded_ = false;
    std::optional<std::vector<PaperIndex>> cohort_;
    std::optional<std::vector<PaperMetrics>> metrics_;
    std::optional<std::vector<DomainSet>> original_domains_;
    std::optional<std::vector<DomainSet>> top_domains_;
    std::optional<std::vector<CitationObservation>> observations_;
    std::map<TableKey, CentroidTable> centroids_;
};

// Table renderers shared by the CLI outputs and the golden tests.
report::CsvTable feg_table(const CorpusStore& store, const std::vector<PaperMetrics>& metrics, Mode mode, int window);
report::CsvTable disruption_table(const CorpusStore& store, const std::vector<PaperMetrics>& metrics);
report::CsvTable series_table(const std::vector<SeriesRow>& rows);
report::CsvTable decile_table(const std::vector<DecileRow>& rows);
report::CsvTable correlation_table(const std::vector<CorrelationRow>& rows);
report::CsvTable delta_table(const std::vector<DeltaRow>& rows);
report::CsvTable cross_domain_table(const std::vector<CrossDomainRow>& rows);
report::CsvTable regression_table(const std::vector<RegressionTable>& tables);
report::CsvTable regression_summary_table(const std::vector<RegressionTable>& tables);

// One chart per index (F, E, G) with one series per group.
report::LineChart series_chart(const std::vector<SeriesRow>& rows, std::string_view index);
report::LineChart decile_chart(const std::vector<DecileRow>& rows);

}  // namespace feg
