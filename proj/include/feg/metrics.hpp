#pragma once
// Citation classification (foundational / extensional / generalizational),
// paper-level F/E/G aggregation and the disruption family.
//
// Overlap sets are structural: e_i is counted against every known citer of
// the focal paper regardless of year; windows only decide which citations
// are classified.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "feg/corpus.hpp"

namespace feg {

enum class Mode { strict, relaxed };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct OverlapCounts {
    std::uint32_t e_i = 0;  // other citers of the focal paper also cited
    std::uint32_t e_j = 0;  // references of the focal paper also cited

    friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

enum class CitationKind { foundational, extensional, generalizational, borderline };

std::string_view to_string(CitationKind kind);

struct CitationClass {
    CitationKind kind = CitationKind::generalizational;
    double c_f = 0.0;
    double c_e = 0.0;
    double c_g = 1.0;

    static CitationClass of(CitationKind kind);
    friend bool operator==(const CitationClass&, const CitationClass&) = default;
};

struct RelaxedClass {
    CitationClass cls;
    bool relaxed_general = false;  // the below-average condition fired
    bool inapplicable = false;     // focal has no references; strict rule used
};

struct FegIndex {
    double F = 0.0;
    double E = 0.0;
    double G = 0.0;
    std::size_t N = 0;
    std::size_t n_foundational = 0;
    std::size_t n_extensional = 0;
    std::size_t n_generalizational = 0;
    std::size_t n_borderline = 0;
    std::size_t relaxed_inapplicable = 0;
};

struct DisruptionTerms {
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    std::uint64_t k = 0;
    std::uint64_t i0 = 0;
    std::uint64_t i1 = 0;

    friend bool operator==(const DisruptionTerms&, const DisruptionTerms&) = default;
};

enum class DisruptionVariant { with_k, no_k };

// Size of the merge intersection of two ascending index lists.
std::uint32_t intersection_size(std::span<const PaperIndex> a, std::span<const PaperIndex> b);

// Throws NotFoundError if citing does not cite focal.
OverlapCounts overlap_counts(const CorpusStore& store, PaperIndex citing, PaperIndex focal);

// Same counts without the edge check; defined for any pair.
OverlapCounts overlap_counts_unchecked(const CorpusStore& store, PaperIndex citing, PaperIndex focal);

CitationClass classify_strict(OverlapCounts c);

RelaxedClass classify_relaxed(const CorpusStore& store, PaperIndex citing, PaperIndex focal);

CitationClass classify(const CorpusStore& store, PaperIndex citing, PaperIndex focal, Mode mode);

// Classifies every in-window citer of `focal`. Zero-citation papers report
// all three indices as zero with N = 0.
FegIndex feg_index(const CorpusStore& store, PaperIndex focal, int window, Mode mode);

DisruptionTerms disruption_terms(const CorpusStore& store, PaperIndex focal, int window);

std::optional<double> disruption_value(const DisruptionTerms& t, DisruptionVariant variant);

// (i, j, k) for the citation citing -> cited, counted over papers published
// within [year(citing), year(citing) + window]. i0/i1 are left at zero.
DisruptionTerms citation_disruption_terms(const CorpusStore& store, PaperIndex citing, PaperIndex cited, int window);

std::optional<double> citation_disruption(const CorpusStore& store, PaperIndex citing, PaperIndex cited, int window);

std::optional<double> ij_over_k(const DisruptionTerms& t);

// Per-paper dump row.
struct PaperMetrics {
    PaperIndex paper = 0;
    std::size_t n_refs = 0;
    std::size_t n_cites_window = 0;
    FegIndex feg;
    DisruptionTerms terms;
    std::optional<double> d_with_k;
    std::optional<double> d_no_k;
    std::optional<double> ij_over_k;
};

PaperMetrics paper_metrics(const CorpusStore& store, PaperIndex focal, int window, Mode mode);

}  // namespace feg
