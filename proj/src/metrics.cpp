#include "feg/metrics.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "feg/error.hpp"

namespace feg {

namespace {

// Epoch-stamped membership marks, one buffer per thread.
class Marker {
public:
    void begin(std::size_t size) {
        if (stamp_.size() < size) stamp_.resize(size, 0);
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
    }
    // Returns true if p was not yet marked in this epoch.
    bool mark(PaperIndex p) {
        if (stamp_[p] == epoch_) return false;
        stamp_[p] = epoch_;
        return true;
    }
    bool marked(PaperIndex p) const { return stamp_[p] == epoch_; }

private:
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
};

Marker& thread_marker() {
    thread_local Marker marker;
    return marker;
}

void require_known(const CorpusStore& store, PaperIndex p) {
    if (p >= store.node_count() || !store.is_known(p)) throw NotFoundError("paper index is not a corpus record");
}

void require_edge(const CorpusStore& store, PaperIndex citing, PaperIndex cited) {
    require_known(store, citing);
    if (cited >= store.node_count() || !store.cites(citing, cited))
        throw NotFoundError("no citation edge '" + store.id(citing) + "' -> '" +
                            (cited < store.node_count() ? store.id(cited) : std::string("?")) + "'");
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::strict ? "strict" : "relaxed"; }

Mode parse_mode(std::string_view text) {
    if (text == "strict") return Mode::strict;
    if (text == "relaxed") return Mode::relaxed;
    throw UsageError("mode must be 'strict' or 'relaxed', got '" + std::string(text) + "'");
}

std::string_view to_string(CitationKind kind) {
    switch (kind) {
        case CitationKind::foundational: return "foundational";
        case CitationKind::extensional: return "extensional";
        case CitationKind::generalizational: return "generalizational";
        case CitationKind::borderline: return "borderline";
    }
    return "?";
}

CitationClass CitationClass::of(CitationKind kind) {
    switch (kind) {
        case CitationKind::foundational: return {kind, 1.0, 0.0, 0.0};
        case CitationKind::extensional: return {kind, 0.0, 1.0, 0.0};
        case CitationKind::generalizational: return {kind, 0.0, 0.0, 1.0};
        case CitationKind::borderline: return {kind, 0.5, 0.5, 0.0};
    }
    throw InvariantError("unknown citation kind");
}

std::uint32_t intersection_size(std::span<const PaperIndex> a, std::span<const PaperIndex> b) {
    if (a.size() > b.size()) std::swap(a, b);
    std::uint32_t n = 0;
    // Galloping pays off once one side is much longer than the other.
    if (a.size() * 16 < b.size()) {
        auto lo = b.begin();
        for (PaperIndex x : a) {
            lo = std::lower_bound(lo, b.end(), x);
            if (lo == b.end()) break;
            if (*lo == x) ++n;
        }
        return n;
    }
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

OverlapCounts overlap_counts_unchecked(const CorpusStore& store, PaperIndex citing, PaperIndex focal) {
    // citing never appears in its own refs and focal never appears in its own
    // citers or refs, so plain intersections already exclude both.
    const auto citing_refs = store.refs(citing);
    return {intersection_size(citing_refs, store.cited_by(focal)), intersection_size(citing_refs, store.refs(focal))};
}

OverlapCounts overlap_counts(const CorpusStore& store, PaperIndex citing, PaperIndex focal) {
    require_edge(store, citing, focal);
    return overlap_counts_unchecked(store, citing, focal);
}

CitationClass classify_strict(OverlapCounts c) {
    if (c.e_i > c.e_j) return CitationClass::of(CitationKind::foundational);
    if (c.e_j > c.e_i) return CitationClass::of(CitationKind::extensional);
    if (c.e_i == 0) return CitationClass::of(CitationKind::generalizational);
    return CitationClass::of(CitationKind::borderline);
}

RelaxedClass classify_relaxed(const CorpusStore& store, PaperIndex citing, PaperIndex focal) {
    require_edge(store, citing, focal);
    const OverlapCounts xy = overlap_counts_unchecked(store, citing, focal);
    const auto focal_refs = store.refs(focal);
    if (focal_refs.empty()) return {classify_strict(xy), false, true};

    std::uint64_t sum_i = 0;
    std::uint64_t sum_j = 0;
    for (PaperIndex z : focal_refs) {
        const OverlapCounts xz = overlap_counts_unchecked(store, citing, z);
        sum_i += xz.e_i;
        sum_j += xz.e_j;
    }
    // x < sum / N compared exactly as x * N < sum.
    const std::uint64_t n = focal_refs.size();
    if (xy.e_i * n < sum_i && xy.e_j * n < sum_j)
        return {CitationClass::of(CitationKind::generalizational), true, false};
    return {classify_strict(xy), false, false};
}

CitationClass classify(const CorpusStore& store, PaperIndex citing, PaperIndex focal, Mode mode) {
    if (mode == Mode::relaxed) return classify_relaxed(store, citing, focal).cls;
    return classify_strict(overlap_counts(store, citing, focal));
}

FegIndex feg_index(const CorpusStore& store, PaperIndex focal, int window, Mode mode) {
    require_known(store, focal);
    FegIndex out;
    const int lo = store.year(focal);
    const int hi = lo + window;
    for (PaperIndex q : store.citers(focal)) {
        if (store.year(q) < lo || store.year(q) > hi) continue;
        CitationClass cls;
        if (mode == Mode::relaxed) {
            RelaxedClass r = classify_relaxed(store, q, focal);
            if (r.inapplicable) ++out.relaxed_inapplicable;
            cls = r.cls;
        } else {
            cls = classify_strict(overlap_counts_unchecked(store, q, focal));
        }
        switch (cls.kind) {
            case CitationKind::foundational: ++out.n_foundational; break;
            case CitationKind::extensional: ++out.n_extensional; break;
            case CitationKind::generalizational: ++out.n_generalizational; break;
            case CitationKind::borderline: ++out.n_borderline; break;
        }
        ++out.N;
    }
    if (out.N == 0) return out;
    const double n = static_cast<double>(out.N);
    const double half = 0.5 * static_cast<double>(out.n_borderline);
    out.F = (static_cast<double>(out.n_foundational) + half) / n;
    out.E = (static_cast<double>(out.n_extensional) + half) / n;
    out.G = static_cast<double>(out.n_generalizational) / n;
    return out;
}

DisruptionTerms disruption_terms(const CorpusStore& store, PaperIndex focal, int window) {
    require_known(store, focal);
    DisruptionTerms t;
    const int lo = store.year(focal);
    const int hi = lo + window;
    const auto focal_refs = store.refs(focal);
    const auto focal_citers = store.citers(focal);
    auto in_window = [&](PaperIndex q) { return store.year(q) >= lo && store.year(q) <= hi; };

    for (PaperIndex q : focal_citers) {
        if (!in_window(q)) continue;
        const auto q_refs = store.refs(q);
        if (intersection_size(q_refs, focal_refs) > 0) {
            ++t.j;
        } else {
            ++t.i;
            if (intersection_size(q_refs, focal_citers) > 0)
                ++t.i0;
            else
                ++t.i1;
        }
    }

    Marker& seen = thread_marker();
    seen.begin(store.node_count());
    seen.mark(focal);
    for (PaperIndex q : focal_citers) seen.mark(q);
    for (PaperIndex r : focal_refs)
        for (PaperIndex q : store.cited_by(r))
            if (in_window(q) && seen.mark(q)) ++t.k;
    return t;
}

std::optional<double> disruption_value(const DisruptionTerms& t, DisruptionVariant variant) {
    const double i = static_cast<double>(t.i);
    const double j = static_cast<double>(t.j);
    const double k = static_cast<double>(t.k);
    if (variant == DisruptionVariant::with_k) {
        if (t.i + t.j + t.k == 0) return std::nullopt;
        return (i - j) / (i + j + k);
    }
    if (t.i + t.j == 0) return std::nullopt;
    return i / (i + j);
}

DisruptionTerms citation_disruption_terms(const CorpusStore& store, PaperIndex citing, PaperIndex cited, int window) {
    require_edge(store, citing, cited);
    DisruptionTerms t;
    const int lo = store.year(citing);
    const int hi = lo + window;
    auto in_window = [&](PaperIndex q) { return store.year(q) >= lo && store.year(q) <= hi; };
    for (PaperIndex q : store.citers(citing)) {
        if (!in_window(q)) continue;
        if (store.cites(q, cited))
            ++t.j;
        else
            ++t.i;
    }
    const auto citing_citers = store.citers(citing);
    for (PaperIndex q : store.cited_by(cited)) {
        if (q == citing || !in_window(q)) continue;
        if (!std::binary_search(citing_citers.begin(), citing_citers.end(), q)) ++t.k;
    }
    return t;
}

std::optional<double> citation_disruption(const CorpusStore& store, PaperIndex citing, PaperIndex cited, int window) {
    return disruption_value(citation_disruption_terms(store, citing, cited, window), DisruptionVariant::with_k);
}

std::optional<double> ij_over_k(const DisruptionTerms& t) {
    if (t.k == 0) return std::nullopt;
    return static_cast<double>(t.i + t.j) / static_cast<double>(t.k);
}

PaperMetrics paper_metrics(const CorpusStore& store, PaperIndex focal, int window, Mode mode) {
    PaperMetrics m;
    m.paper = focal;
    m.n_refs = store.refs(focal).size();
    m.n_cites_window = store.count_citations_in_window(focal, window);
    m.feg = feg_index(store, focal, window, mode);
    m.terms = disruption_terms(store, focal, window);
    m.d_with_k = disruption_value(m.terms, DisruptionVariant::with_k);
    m.d_no_k = disruption_value(m.terms, DisruptionVariant::no_k);
    m.ij_over_k = ij_over_k(m.terms);
    return m;
}

}  // namespace feg
