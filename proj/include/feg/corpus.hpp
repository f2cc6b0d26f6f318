#pragma once
// Immutable citation corpus.
//
// Every id seen during ingest (records and dangling reference targets) is
// assigned a dense index in lexicographic id order, so any list sorted by
// index is also sorted by id. Forward adjacency (refs) and reverse adjacency
// are stored as CSR arrays. Dangling ids keep their place in refs and are
// never focal papers; citers() reports nothing for them, while cited_by()
// lists every record citing any id.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <absl/container/flat_hash_map.h>

namespace feg {

using PaperIndex = std::uint32_t;

struct ConceptAssignment {
    std::string concept_id;
    int level = 0;
    double score = 0.0;
    std::vector<std::string> parents;
};

struct PaperRecord {
    std::string paper_id;
    int pub_year = 0;
    std::vector<ConceptAssignment> concepts;
    std::vector<std::string> title_tokens;
    std::optional<std::vector<std::string>> abstract_tokens;
    std::optional<std::string> venue_id;
};

struct IngestReport {
    std::size_t records = 0;
    std::size_t edges = 0;
    std::size_t self_refs_dropped = 0;
    std::size_t duplicate_refs_dropped = 0;
    std::size_t dangling = 0;      // reference edges whose target has no record
    std::size_t dangling_ids = 0;  // distinct such targets
    int min_year = 0;
    int max_year = 0;

    std::string to_json() const;
};

struct CohortParams {
    int min_refs = 1;
    int min_citations = 5;
    int window_years = 5;
    int year_min = 1945;
    int year_max = 2019;

    void validate() const;
};

class CorpusStore {
public:
    // Parses newline-delimited JSON records. Throws DataError on malformed
    // input (with 1-based line number) or duplicate ids.
    static CorpusStore ingest(std::istream& in);
    static CorpusStore ingest_file(const std::string& path);
    static CorpusStore ingest_string(std::string_view ndjson);

    std::size_t node_count() const { return ids_.size(); }
    std::size_t paper_count() const { return papers_.size(); }

    // Known (non-dangling) papers in id order.
    std::span<const PaperIndex> papers() const { return papers_; }

    std::optional<PaperIndex> find(std::string_view id) const;
    // Throws NotFoundError unless `id` names a record in the corpus.
    PaperIndex paper_index(std::string_view id) const;

    bool is_known(PaperIndex p) const { return record_slot_[p] >= 0; }
    const std::string& id(PaperIndex p) const { return ids_[p]; }
    int year(PaperIndex p) const { return years_[p]; }
    const PaperRecord& record(PaperIndex p) const;

    std::span<const PaperIndex> refs(PaperIndex p) const {
        return {ref_targets_.data() + ref_offsets_[p], ref_targets_.data() + ref_offsets_[p + 1]};
    }
    // Citers of a corpus record; empty for dangling ids.
    std::span<const PaperIndex> citers(PaperIndex p) const {
        if (record_slot_[p] < 0) return {};
        return cited_by(p);
    }
    std::span<const PaperIndex> cited_by(PaperIndex p) const {
        return {citer_sources_.data() + citer_offsets_[p], citer_sources_.data() + citer_offsets_[p + 1]};
    }
    bool cites(PaperIndex citing, PaperIndex cited) const;

    const IngestReport& report() const { return report_; }
    int min_year() const { return report_.min_year; }
    int max_year() const { return report_.max_year; }

    // Citers q of p with year(p) <= year(q) <= year(p) + window, id order.
    std::vector<PaperIndex> citations_in_window(PaperIndex p, int window) const;
    std::size_t count_citations_in_window(PaperIndex p, int window) const;

    std::vector<PaperIndex> select_cohort(const CohortParams& params) const;

    // Canonical text form: one JSON object per known paper in id order with
    // sorted refs and citers. Two ingests of the same input serialize to
    // identical bytes.
    std::string serialize() const;

private:
    std::vector<std::string> ids_;
    absl::flat_hash_map<std::string, PaperIndex> index_;
    std::vector<int> years_;
    std::vector<std::int32_t> record_slot_;
    std::vector<PaperRecord> records_;
    std::vector<PaperIndex> papers_;
    std::vector<std::uint64_t> ref_offsets_;
    std::vector<PaperIndex> ref_targets_;
    std::vector<std::uint64_t> citer_offsets_;
    std::vector<PaperIndex> citer_sources_;
    IngestReport report_;
};

}  // namespace feg
