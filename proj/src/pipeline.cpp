#include "feg/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include "json.hpp"

#include "feg/error.hpp"
#include "feg/parallel.hpp"

namespace feg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_domains(const DomainSet& d) {
    if (d.empty()) return "none";
    std::string out;
    for (const auto& s : d) out += (out.empty() ? "" : "+") + s;
    return out;
}

std::string join_list(const DomainSet& d) {
    std::string out;
    for (const auto& s : d) out += (out.empty() ? "" : "|") + s;
    return out;
}

std::vector<std::string> ref_ids(const CorpusStore& store, PaperIndex p) {
    std::vector<std::string> out;
    for (PaperIndex q : store.refs(p)) out.push_back(store.id(q));
    return out;
}

std::vector<std::string> ref_venues(const CorpusStore& store, PaperIndex p) {
    std::vector<std::string> out;
    for (PaperIndex q : store.refs(p))
        if (store.is_known(q))
            if (const auto& v = store.record(q).venue_id) out.push_back(*v);
    return out;
}

struct Mean {
    double sum = 0.0;
    std::size_t n = 0;
    void add(std::optional<double> v) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    std::optional<double> value() const {
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

struct WeightedSplit {
    double sum = 0.0, weight = 0.0;
    double sum_rest = 0.0, weight_rest = 0.0;
    void add(double w, double value) {
        sum += w * value;
        weight += w;
        sum_rest += (1.0 - w) * value;
        weight_rest += 1.0 - w;
    }
    std::optional<double> group() const { return weight > 0.0 ? std::optional(sum / weight) : std::nullopt; }
    std::optional<double> rest() const {
        return weight_rest > 0.0 ? std::optional(sum_rest / weight_rest) : std::nullopt;
    }
};

std::optional<double> safe_delta(std::optional<double> m, std::optional<double> rest) {
    if (!m || !rest || !(*rest > 0.0)) return std::nullopt;
    return relative_delta(*m, *rest);
}

constexpr std::array<const char*, 3> kTypes{"foundational", "extensional", "generalizational"};

double type_weight(const CitationClass& c, std::size_t type) {
    switch (type) {
        case 0: return c.c_f;
        case 1: return c.c_e;
        default: return c.c_g;
    }
}

constexpr std::array<const char*, 8> kMetrics{"disruption_with_k", "disruption_no_k", "cross_domain_original",
                                              "cross_domain_top",  "semantic_title",  "semantic_abstract",
                                              "reference_paper",   "reference_venue"};

std::optional<double> metric_value(const CitationObservation& o, std::size_t metric) {
    auto as_rate = [](std::optional<bool> b) -> std::optional<double> {
        if (!b) return std::nullopt;
        return *b ? 1.0 : 0.0;
    };
    switch (metric) {
        case 0: return o.disruption_with_k;
        case 1: return o.disruption_no_k;
        case 2: return as_rate(o.cross_original);
        case 3: return as_rate(o.cross_top);
        case 4: return o.semantic_title;
        case 5: return o.semantic_abstract;
        case 6: return o.reference_paper;
        default: return o.reference_venue;
    }
}

std::vector<std::vector<WeightedSplit>> split_sums(const std::vector<CitationObservation>& obs) {
    std::vector<std::vector<WeightedSplit>> sums(kTypes.size(), std::vector<WeightedSplit>(kMetrics.size()));
    for (const auto& o : obs)
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
            auto v = metric_value(o, m);
            if (!v) continue;
            for (std::size_t t = 0; t < kTypes.size(); ++t) sums[t][m].add(type_weight(o.cls, t), *v);
        }
    return sums;
}

bool contains_word(const std::vector<std::string>& tokens, const std::string& word) {
    for (const auto& t : tokens) {
        if (t.size() != word.size()) continue;
        bool eq = true;
        for (std::size_t i = 0; i < t.size() && eq; ++i)
            eq = std::tolower(static_cast<unsigned char>(t[i])) == std::tolower(static_cast<unsigned char>(word[i]));
        if (eq) return true;
    }
    return false;
}

double index_of(const FegIndex& f, std::string_view which) {
    if (which == "F") return f.F;
    if (which == "E") return f.E;
    return f.G;
}

}  // namespace

Session::Session(RunConfig config) : config_(std::move(config)) { config_.validate(); }

Session::Session(RunConfig config, std::shared_ptr<const CorpusStore> corpus, std::shared_ptr<const ConceptTree> concepts,
                 std::shared_ptr<const EmbeddingSet> embeddings)
    : config_(std::move(config)),
      corpus_(std::move(corpus)),
      concepts_(std::move(concepts)),
      concepts_loaded_(concepts_ != nullptr),
      embeddings_(std::move(embeddings)),
      embeddings_loaded_(embeddings_ != nullptr) {
    config_.validate_settings();
}

const std::vector<std::string>& Session::analysis_names() {
    static const std::vector<std::string> names{"ingest", "feg",    "disruption", "domains", "distances", "series",
                                                "deciles", "deltas", "words",      "regress", "report"};
    return names;
}

const CorpusStore& Session::corpus() {
    if (!corpus_) {
        if (config_.corpus.empty()) throw UsageError("no corpus given (--corpus)");
        corpus_ = std::make_shared<const CorpusStore>(CorpusStore::ingest_file(config_.corpus));
        if (!config_.report.empty()) {
            std::ofstream rep(config_.report);
            if (!rep) throw UsageError("cannot write ingest report '" + config_.report + "'");
            rep << corpus_->report().to_json() << '\n';
        }
    }
    return *corpus_;
}

const ConceptTree* Session::concepts() {
    if (!concepts_loaded_) {
        concepts_loaded_ = true;
        const CorpusStore& store = corpus();
        bool inline_data = false;
        for (PaperIndex p : store.papers())
            if (!store.record(p).concepts.empty()) {
                inline_data = true;
                break;
            }
        if (!config_.concepts.empty() || inline_data) {
            auto tree = config_.concepts.empty() ? ConceptTree{} : ConceptTree::load_file(config_.concepts);
            tree.merge_inline(store);
            tree.finalize();
            concepts_ = std::make_shared<const ConceptTree>(std::move(tree));
        }
    }
    return concepts_.get();
}

const EmbeddingSet* Session::embeddings() {
    if (!embeddings_loaded_) {
        embeddings_loaded_ = true;
        if (!config_.embeddings.empty())
            embeddings_ = std::make_shared<const EmbeddingSet>(EmbeddingSet::load_dir(config_.embeddings));
    }
    return embeddings_.get();
}

const EmbeddingStore* Session::store_for(EmbeddingNamespace ns, int year) {
    const EmbeddingSet* set = embeddings();
    return set ? set->select(ns, year) : nullptr;
}

const std::vector<PaperIndex>& Session::cohort() {
    if (!cohort_) cohort_ = corpus().select_cohort(config_.cohort);
    return *cohort_;
}

const std::vector<PaperMetrics>& Session::metrics() {
    if (!metrics_) {
        const CorpusStore& store = corpus();
        const auto& papers = cohort();
        std::vector<PaperMetrics> out(papers.size());
        parallel_for(papers.size(), config_.threads,
                     [&](std::size_t i) { out[i] = paper_metrics(store, papers[i], config_.window(), config_.mode); });
        metrics_ = std::move(out);
    }
    return *metrics_;
}

const std::vector<DomainSet>& Session::original_domains() {
    if (!original_domains_) {
        const CorpusStore& store = corpus();
        std::vector<DomainSet> out(store.node_count());
        if (const ConceptTree* tree = concepts()) {
            const auto papers = store.papers();
            parallel_for(papers.size(), config_.threads, [&](std::size_t i) {
                out[papers[i]] = feg::original_domains(*tree, store.record(papers[i]).concepts);
            });
        }
        original_domains_ = std::move(out);
    }
    return *original_domains_;
}

const std::vector<DomainSet>& Session::top_domains() {
    if (!top_domains_) {
        const CorpusStore& store = corpus();
        std::vector<DomainSet> out(store.node_count());
        if (const ConceptTree* tree = concepts()) {
            const auto papers = store.papers();
            parallel_for(papers.size(), config_.threads, [&](std::size_t i) {
                out[papers[i]] = feg::top_domains(*tree, store.record(papers[i]).concepts, config_.domain_depth);
            });
        }
        top_domains_ = std::move(out);
    }
    return *top_domains_;
}

int Session::series_end_year() {
    const int end = config_.corpus_end_year.value_or(corpus().max_year());
    return end - config_.window();
}

std::vector<SeriesRow> Session::longitudinal() {
    const auto& papers = cohort();
    const auto& m = metrics();
    if (papers.empty()) throw DataError("empty cohort");
    const std::vector<DomainSet>* groups = nullptr;
    if (config_.group_by == GroupBy::top_domain) {
        if (!concepts()) throw UsageError("--group-by top_domain needs concept data");
        groups = &top_domains();
    }
    const CorpusStore& store = corpus();
    const int last_year = series_end_year();

    struct Acc {
        std::size_t n = 0;
        double f = 0, e = 0, g = 0;
        Mean d, ijk;
    };
    std::map<std::pair<std::string, int>, Acc> acc;
    for (std::size_t i = 0; i < papers.size(); ++i) {
        const int year = store.year(papers[i]);
        if (year > last_year) continue;
        const std::string key = groups ? join_domains((*groups)[papers[i]]) : "all";
        Acc& a = acc[{key, year}];
        ++a.n;
        a.f += m[i].feg.F;
        a.e += m[i].feg.E;
        a.g += m[i].feg.G;
        a.d.add(m[i].d_with_k);
        a.ijk.add(m[i].ij_over_k);
    }
    std::vector<SeriesRow> rows;
    rows.reserve(acc.size());
    for (const auto& [key, a] : acc) {
        const double n = static_cast<double>(a.n);
        rows.push_back({key.first, key.second, a.n, a.f / n, a.e / n, a.g / n, a.d.value(), a.ijk.value()});
    }
    return rows;
}

std::vector<DecileRow> Session::decile_profile() {
    const auto& m = metrics();
    std::vector<const PaperMetrics*> defined;
    for (const auto& pm : m)
        if (pm.d_with_k) defined.push_back(&pm);
    if (defined.size() < 10) throw DataError("decile profile needs at least 10 papers with a defined D");
    std::vector<double> d(defined.size());
    for (std::size_t i = 0; i < defined.size(); ++i) d[i] = *defined[i]->d_with_k;
    const auto bins = stats::quantile_bins(d, 10);
    std::vector<DecileRow> rows(10);
    for (int b = 0; b < 10; ++b) rows[static_cast<std::size_t>(b)].decile = b + 1;
    for (std::size_t i = 0; i < defined.size(); ++i) {
        auto& r = rows[static_cast<std::size_t>(bins[i])];
        ++r.n;
        r.D += d[i];
        r.F += defined[i]->feg.F;
        r.E += defined[i]->feg.E;
        r.G += defined[i]->feg.G;
    }
    for (auto& r : rows) {
        const double n = static_cast<double>(r.n);
        r.D /= n;
        r.F /= n;
        r.E /= n;
        r.G /= n;
    }
    return rows;
}

std::vector<CorrelationRow> Session::decile_correlations() {
    const auto& m = metrics();
    std::vector<double> d, f, e, g;
    for (const auto& pm : m) {
        if (!pm.d_with_k) continue;
        d.push_back(*pm.d_with_k);
        f.push_back(pm.feg.F);
        e.push_back(pm.feg.E);
        g.push_back(pm.feg.G);
    }
    std::vector<CorrelationRow> rows;
    for (auto [name, series] : {std::pair{"F", &f}, std::pair{"E", &e}, std::pair{"G", &g}}) {
        CorrelationRow r{name, d.size(), std::nullopt};
        try {
            if (d.size() >= 2) r.r = stats::pearson(*series, d);
        } catch (const UndefinedError&) {
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void Session::prepare_centroids(const std::set<TableKey>& keys) {
    const CorpusStore& store = corpus();
    const auto papers = store.papers();
    const bool dedup = config_.dedup_tokens;
    for (const auto& key : keys) {
        if (centroids_.count(key)) continue;
        const EmbeddingStore& emb = *key.first;
        CentroidTable table;
        table.dim = emb.dim();
        table.data.assign(store.node_count() * table.dim, 0.0);
        table.found.assign(store.node_count(), 0);
        // Reference and venue centroids reuse one vector lookup per cited
        // node instead of hashing its id again for every citing paper.
        std::vector<const double*> rows;
        if (key.second == Source::references || key.second == Source::venues) {
            rows.assign(store.node_count(), nullptr);
            parallel_for(store.node_count(), config_.threads, [&](std::size_t q) {
                const double* v = nullptr;
                if (key.second == Source::references)
                    v = emb.find(store.id(static_cast<PaperIndex>(q)));
                else if (store.is_known(static_cast<PaperIndex>(q)))
                    if (const auto& venue = store.record(static_cast<PaperIndex>(q)).venue_id) v = emb.find(*venue);
                if (v && std::any_of(v, v + emb.dim(), [](double x) { return x != 0.0; })) rows[q] = v;
            });
        }
        parallel_for(papers.size(), config_.threads, [&](std::size_t i) {
            const PaperIndex p = papers[i];
            const PaperRecord& rec = store.record(p);
            std::optional<std::vector<double>> c;
            switch (key.second) {
                case Source::references:
                case Source::venues: {
                    std::vector<std::span<const double>> vecs;
                    for (PaperIndex q : store.refs(p))
                        if (rows[q]) vecs.emplace_back(rows[q], emb.dim());
                    if (!vecs.empty()) c = centroid(vecs);
                    break;
                }
                case Source::title: c = centroid_of(emb, rec.title_tokens, dedup); break;
                case Source::abstract:
                    if (rec.abstract_tokens) c = centroid_of(emb, *rec.abstract_tokens, dedup);
                    break;
            }
            if (!c) return;
            std::copy(c->begin(), c->end(), table.data.begin() + static_cast<std::ptrdiff_t>(p * table.dim));
            table.found[p] = 1;
        });
        centroids_.emplace(key, std::move(table));
    }
}

std::optional<double> Session::centroid_distance(const EmbeddingStore* store, Source src, PaperIndex a,
                                                 PaperIndex b) const {
    if (!store) return std::nullopt;
    const CentroidTable& table = centroids_.at({store, src});
    auto ca = table.get(a);
    auto cb = table.get(b);
    if (!ca || !cb) return std::nullopt;
    return cosine_distance(*ca, *cb);
}

const std::vector<CitationObservation>& Session::citation_observations() {
    if (observations_) return *observations_;
    const CorpusStore& store = corpus();
    const auto& papers = cohort();
    const bool have_domains = concepts() != nullptr;
    const std::vector<DomainSet>* orig = have_domains ? &original_domains() : nullptr;
    const std::vector<DomainSet>* top = have_domains ? &top_domains() : nullptr;
    const int window = config_.window();

    static constexpr std::pair<EmbeddingNamespace, Source> kSources[] = {
        {EmbeddingNamespace::title_token, Source::title},
        {EmbeddingNamespace::abstract_token, Source::abstract},
        {EmbeddingNamespace::paper, Source::references},
        {EmbeddingNamespace::venue, Source::venues}};
    // Citations per focal paper give each task its own output range.
    std::vector<std::size_t> offsets(papers.size() + 1, 0);
    for (std::size_t idx = 0; idx < papers.size(); ++idx)
        offsets[idx + 1] = offsets[idx] + store.count_citations_in_window(papers[idx], window);

    // Stores by citing year, in kSources order.
    const int first_year = store.report().min_year;
    std::vector<std::array<const EmbeddingStore*, 4>> by_year;
    if (embeddings()) {
        std::vector<char> cited_in(static_cast<std::size_t>(store.report().max_year - first_year + 1), 0);
        for (PaperIndex f : papers)
            for (PaperIndex q : store.citations_in_window(f, window)) cited_in[store.year(q) - first_year] = 1;
        std::set<TableKey> keys;
        by_year.assign(cited_in.size(), {nullptr, nullptr, nullptr, nullptr});
        for (std::size_t y = 0; y < cited_in.size(); ++y) {
            if (!cited_in[y]) continue;
            for (std::size_t s = 0; s < 4; ++s) {
                const auto [ns, src] = kSources[s];
                by_year[y][s] = store_for(ns, first_year + static_cast<int>(y));
                if (by_year[y][s]) keys.insert({by_year[y][s], src});
            }
        }
        prepare_centroids(keys);
    }

    std::vector<CitationObservation> flat(offsets.back());
    parallel_for(papers.size(), config_.threads, [&](std::size_t idx) {
        const PaperIndex f = papers[idx];
        std::size_t at = offsets[idx];
        for (PaperIndex q : store.citations_in_window(f, window)) {
            CitationObservation& o = flat[at++];
            o.citing = q;
            o.focal = f;
            o.cls = classify(store, q, f, config_.mode);
            const auto terms = citation_disruption_terms(store, q, f, window);
            o.disruption_with_k = disruption_value(terms, DisruptionVariant::with_k);
            o.disruption_no_k = disruption_value(terms, DisruptionVariant::no_k);
            if (orig) {
                o.cross_original = is_cross_domain((*orig)[q], (*orig)[f]);
                o.cross_top = is_cross_domain((*top)[q], (*top)[f]);
            }
            if (!by_year.empty()) {
                const auto& stores = by_year[store.year(q) - first_year];
                o.semantic_title = centroid_distance(stores[0], Source::title, q, f);
                o.semantic_abstract = centroid_distance(stores[1], Source::abstract, q, f);
                o.reference_paper = centroid_distance(stores[2], Source::references, q, f);
                o.reference_venue = centroid_distance(stores[3], Source::venues, q, f);
            }
        }
    });
    observations_ = std::move(flat);
    return *observations_;
}

std::vector<DeltaRow> Session::citation_type_deltas() {
    const auto sums = split_sums(citation_observations());
    std::vector<DeltaRow> rows;
    for (std::size_t t = 0; t < kTypes.size(); ++t)
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
            const auto& s = sums[t][m];
            DeltaRow r;
            r.citation_type = kTypes[t];
            r.metric = kMetrics[m];
            r.M = s.group();
            r.M_rest = s.rest();
            r.delta = safe_delta(r.M, r.M_rest);
            r.weight = s.weight;
            r.weight_rest = s.weight_rest;
            rows.push_back(std::move(r));
        }
    return rows;
}

std::vector<CrossDomainRow> Session::cross_domain_rates() {
    if (!concepts()) throw UsageError("cross-domain rates need concept data");
    const auto sums = split_sums(citation_observations());
    std::vector<CrossDomainRow> rows;
    for (std::size_t t = 0; t < kTypes.size(); ++t)
        for (auto [mode, metric] : {std::pair{"original", std::size_t{2}}, std::pair{"top", std::size_t{3}}}) {
            const auto& s = sums[t][metric];
            CrossDomainRow r;
            r.citation_type = kTypes[t];
            r.mode = mode;
            auto m = s.group();
            auto rest = s.rest();
            if (m) r.pct_cross = 100.0 * *m;
            if (rest) r.pct_cross_rest = 100.0 * *rest;
            r.delta = safe_delta(m, rest);
            rows.push_back(std::move(r));
        }
    return rows;
}

std::vector<WordRatioRow> Session::word_ratios() {
    const CorpusStore& store = corpus();
    const auto& papers = cohort();
    const auto& m = metrics();
    if (papers.size() < 2) throw DataError("word ratios need at least two cohort papers");
    std::vector<WordRatioRow> rows;
    for (const char* index : {"F", "E", "G"}) {
        std::vector<double> values(papers.size());
        for (std::size_t i = 0; i < papers.size(); ++i) values[i] = index_of(m[i].feg, index);
        for (const auto& word : config_.words) {
            std::unique_ptr<bool[]> flags(new bool[papers.size()]);
            for (std::size_t i = 0; i < papers.size(); ++i)
                flags[i] = contains_word(store.record(papers[i]).title_tokens, word);
            const auto r = stats::prevalence_ratio(std::span<const bool>(flags.get(), papers.size()), values);
            rows.push_back({index, word, r.prevalence_lower, r.prevalence_upper, r.ratio});
        }
    }
    return rows;
}

std::vector<WordBinRow> Session::word_bins() {
    const CorpusStore& store = corpus();
    const auto& papers = cohort();
    const auto& m = metrics();
    if (papers.size() < 10) throw DataError("word deciles need at least ten cohort papers");
    std::vector<WordBinRow> rows;
    for (const char* index : {"F", "E", "G"}) {
        std::vector<double> values(papers.size());
        for (std::size_t i = 0; i < papers.size(); ++i) values[i] = index_of(m[i].feg, index);
        for (const auto& word : config_.words) {
            std::unique_ptr<bool[]> flags(new bool[papers.size()]);
            for (std::size_t i = 0; i < papers.size(); ++i)
                flags[i] = contains_word(store.record(papers[i]).title_tokens, word);
            for (const auto& bin : stats::prevalence_by_bin(std::span<const bool>(flags.get(), papers.size()), values, 10))
                rows.push_back({index, word, bin});
        }
    }
    return rows;
}

std::vector<DistanceRow> Session::paper_distances() {
    if (!embeddings()) throw UsageError("distances need an embedding directory (--embeddings)");
    const CorpusStore& store = corpus();
    const auto& papers = cohort();
    const int window = config_.window();
    const bool dedup = config_.dedup_tokens;
    const EmbeddingSet* set = embeddings();
    {
        std::set<TableKey> keys;
        std::set<int> years;
        for (PaperIndex f : papers)
            for (PaperIndex q : store.citations_in_window(f, window)) years.insert(store.year(q));
        for (int y : years) {
            if (const auto* s = store_for(EmbeddingNamespace::paper, y)) keys.insert({s, Source::references});
            if (const auto* s = store_for(EmbeddingNamespace::title_token, y)) keys.insert({s, Source::title});
        }
        prepare_centroids(keys);
    }
    std::vector<DistanceRow> rows(papers.size());
    parallel_for(papers.size(), config_.threads, [&](std::size_t i) {
        const PaperIndex f = papers[i];
        const PaperRecord& rec = store.record(f);
        const int year = store.year(f);
        DistanceRow& row = rows[i];
        row.paper = f;
        const bool abstract = config_.use_abstract && rec.abstract_tokens.has_value();
        const auto sem_ns = abstract ? EmbeddingNamespace::abstract_token : EmbeddingNamespace::title_token;
        const auto& tokens = abstract ? *rec.abstract_tokens : rec.title_tokens;
        if (const auto* s = set->select(sem_ns, year)) row.semantic_within = within_paper_distance(*s, tokens, dedup);
        if (const auto* s = set->select(EmbeddingNamespace::paper, year))
            row.reference_within = within_paper_distance(*s, ref_ids(store, f));
        if (const auto* s = set->select(EmbeddingNamespace::venue, year))
            row.venue_within = within_paper_distance(*s, ref_venues(store, f));

        Mean ref_mean, sem_mean;
        for (PaperIndex q : store.citations_in_window(f, window)) {
            const int qy = store.year(q);
            ref_mean.add(centroid_distance(set->select(EmbeddingNamespace::paper, qy), Source::references, q, f));
            sem_mean.add(centroid_distance(set->select(EmbeddingNamespace::title_token, qy), Source::title, q, f));
        }
        row.cited_reference_distance = ref_mean.value();
        row.cited_semantic_distance = sem_mean.value();
    });
    return rows;
}

std::vector<RegressionTable> Session::regressions() {
    const CorpusStore& store = corpus();
    const auto& papers = cohort();
    const auto& m = metrics();
    std::vector<RegressionTable> out;

    struct Phase {
        std::string name;
        int from, to;
    };
    std::vector<Phase> phases;
    const auto& c = config_.cohort;
    if (config_.regress_split) {
        phases.push_back({"longitudinal_" + std::to_string(c.year_min) + "_" + std::to_string(*config_.regress_split - 1),
                          c.year_min, *config_.regress_split - 1});
        phases.push_back({"longitudinal_" + std::to_string(*config_.regress_split) + "_" + std::to_string(c.year_max),
                          *config_.regress_split, c.year_max});
    } else {
        phases.push_back({"longitudinal", c.year_min, c.year_max});
    }

    for (const auto& phase : phases) {
        stats::Columns cols;
        for (std::size_t i = 0; i < papers.size(); ++i) {
            const int year = store.year(papers[i]);
            if (year < phase.from || year > phase.to) continue;
            cols["F"].push_back(m[i].feg.F);
            cols["E"].push_back(m[i].feg.E);
            cols["G"].push_back(m[i].feg.G);
            cols["reference_count"].push_back(static_cast<double>(m[i].n_refs));
            cols["citation_count"].push_back(static_cast<double>(m[i].n_cites_window));
            cols["year_since_" + std::to_string(phase.from)].push_back(static_cast<double>(year - phase.from));
        }
        for (const char* response : {"F", "E", "G"}) {
            stats::OlsSpec spec;
            spec.response = response;
            spec.predictors = {"reference_count", "citation_count", "year_since_" + std::to_string(phase.from)};
            spec.log_transform = {"reference_count", "citation_count"};
            out.push_back({phase.name, response, stats::ols_fit(cols, spec)});
        }
    }

    if (const EmbeddingSet* set = embeddings(); set && set->has(EmbeddingNamespace::paper)) {
        const auto dist = paper_distances();
        const bool semantic = set->has(EmbeddingNamespace::title_token);
        stats::Columns cols;
        for (std::size_t i = 0; i < papers.size(); ++i) {
            if (!dist[i].cited_reference_distance) continue;
            if (semantic && !dist[i].cited_semantic_distance) continue;
            cols["F"].push_back(m[i].feg.F);
            cols["E"].push_back(m[i].feg.E);
            cols["G"].push_back(m[i].feg.G);
            cols["cited_reference_distance"].push_back(*dist[i].cited_reference_distance);
            if (semantic) cols["cited_semantic_distance"].push_back(*dist[i].cited_semantic_distance);
            cols["reference_count"].push_back(static_cast<double>(m[i].n_refs));
            cols["citation_count"].push_back(static_cast<double>(m[i].n_cites_window));
            cols["year"].push_back(static_cast<double>(store.year(papers[i])));
        }
        for (const char* response : {"F", "E", "G"}) {
            stats::OlsSpec spec;
            spec.response = response;
            spec.predictors = {"cited_reference_distance"};
            if (semantic) spec.predictors.push_back("cited_semantic_distance");
            spec.predictors.push_back("reference_count");
            spec.predictors.push_back("citation_count");
            spec.log_transform = {"reference_count", "citation_count"};
            spec.standardize = {response, "cited_reference_distance"};
            if (semantic) spec.standardize.push_back("cited_semantic_distance");
            spec.year_fixed_effects = "year";
            out.push_back({"distance", response, stats::ols_fit(cols, spec)});
        }
    }
    return out;
}

report::CsvTable feg_table(const CorpusStore& store, const std::vector<PaperMetrics>& metrics, Mode mode, int window) {
    using report::format_count;
    using report::format_number;
    report::CsvTable t;
    t.header = {"paper_id", "year", "n_refs", "n_cites_window", "F", "E", "G", "D_with_k",
                "D_no_k",   "i",    "j",      "k",              "i0", "i1", "mode", "window"};
    for (const auto& m : metrics)
        t.add_row({store.id(m.paper), std::to_string(store.year(m.paper)), format_count(m.n_refs),
                   format_count(m.n_cites_window), format_number(m.feg.F), format_number(m.feg.E),
                   format_number(m.feg.G), format_number(m.d_with_k), format_number(m.d_no_k), format_count(m.terms.i),
                   format_count(m.terms.j), format_count(m.terms.k), format_count(m.terms.i0), format_count(m.terms.i1),
                   std::string(to_string(mode)), std::to_string(window)});
    return t;
}

report::CsvTable disruption_table(const CorpusStore& store, const std::vector<PaperMetrics>& metrics) {
    using report::format_count;
    using report::format_number;
    report::CsvTable t;
    t.header = {"paper_id", "year", "i", "j", "k", "i0", "i1", "D_with_k", "D_no_k", "ij_over_k"};
    for (const auto& m : metrics)
        t.add_row({store.id(m.paper), std::to_string(store.year(m.paper)), format_count(m.terms.i),
                   format_count(m.terms.j), format_count(m.terms.k), format_count(m.terms.i0), format_count(m.terms.i1),
                   format_number(m.d_with_k), format_number(m.d_no_k), format_number(m.ij_over_k)});
    return t;
}

report::CsvTable series_table(const std::vector<SeriesRow>& rows) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"group", "year", "n_papers", "F", "E", "G", "D", "ij_over_k"};
    for (const auto& r : rows)
        t.add_row({r.group, std::to_string(r.year), report::format_count(r.n_papers), format_number(r.F),
                   format_number(r.E), format_number(r.G), format_number(r.D), format_number(r.ij_over_k)});
    return t;
}

report::CsvTable decile_table(const std::vector<DecileRow>& rows) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"decile", "n_papers", "D", "F", "E", "G"};
    for (const auto& r : rows)
        t.add_row({std::to_string(r.decile), report::format_count(r.n), format_number(r.D), format_number(r.F),
                   format_number(r.E), format_number(r.G)});
    return t;
}

report::CsvTable correlation_table(const std::vector<CorrelationRow>& rows) {
    report::CsvTable t;
    t.header = {"index", "against", "n", "pearson_r"};
    for (const auto& r : rows) t.add_row({r.index, "D", report::format_count(r.n), report::format_number(r.r)});
    return t;
}

report::CsvTable delta_table(const std::vector<DeltaRow>& rows) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"citation_type", "metric", "M", "M_rest", "delta", "weight", "weight_rest"};
    for (const auto& r : rows)
        t.add_row({r.citation_type, r.metric, format_number(r.M), format_number(r.M_rest), format_number(r.delta),
                   format_number(r.weight), format_number(r.weight_rest)});
    return t;
}

report::CsvTable cross_domain_table(const std::vector<CrossDomainRow>& rows) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"citation_type", "mode", "pct_cross", "pct_cross_rest", "delta"};
    for (const auto& r : rows)
        t.add_row({r.citation_type, r.mode, format_number(r.pct_cross), format_number(r.pct_cross_rest),
                   format_number(r.delta)});
    return t;
}

report::CsvTable regression_table(const std::vector<RegressionTable>& tables) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"model", "response", "predictor", "coefficient", "std_error", "stars"};
    for (const auto& tab : tables)
        for (const auto& c : tab.fit.coefficients) {
            // year fixed-effect dummies are absorbed, not reported
            if (c.name.rfind("year=", 0) == 0) continue;
            t.add_row({tab.model, tab.response, c.name, format_number(c.estimate), format_number(c.std_error), c.stars()});
        }
    return t;
}

report::CsvTable regression_summary_table(const std::vector<RegressionTable>& tables) {
    using report::format_number;
    report::CsvTable t;
    t.header = {"model", "response", "n_observations", "r2", "adjusted_r2"};
    for (const auto& tab : tables)
        t.add_row({tab.model, tab.response, report::format_count(tab.fit.n_observations), format_number(tab.fit.r2),
                   format_number(tab.fit.adjusted_r2)});
    return t;
}

report::LineChart series_chart(const std::vector<SeriesRow>& rows, std::string_view index) {
    report::LineChart chart;
    chart.title = "Mean " + std::string(index) + " by publication year";
    chart.x_label = "publication year";
    chart.y_label = std::string(index) + " index";
    std::map<std::string, report::Series> by_group;
    for (const auto& r : rows) {
        auto& s = by_group[r.group];
        s.name = r.group;
        s.x.push_back(r.year);
        s.y.push_back(index == "F" ? r.F : index == "E" ? r.E : r.G);
    }
    for (auto& [name, s] : by_group) chart.series.push_back(std::move(s));
    return chart;
}

report::LineChart decile_chart(const std::vector<DecileRow>& rows) {
    report::LineChart chart;
    chart.title = "F, E, G by disruption decile";
    chart.x_label = "D decile";
    chart.y_label = "mean index";
    report::Series f{"F", {}, {}}, e{"E", {}, {}}, g{"G", {}, {}};
    for (const auto& r : rows) {
        for (auto* s : {&f, &e, &g}) s->x.push_back(r.decile);
        f.y.push_back(r.n ? r.F : kNaN);
        e.y.push_back(r.n ? r.E : kNaN);
        g.y.push_back(r.n ? r.G : kNaN);
    }
    chart.series = {std::move(f), std::move(e), std::move(g)};
    return chart;
}

void Session::run(std::string_view analysis, report::OutputSink& sink) {
    const CorpusStore& store = corpus();
    if (analysis == "ingest") {
        sink.write("ingest_report.json", store.report().to_json() + "\n");
        sink.write("store.jsonl", store.serialize());
    } else if (analysis == "feg") {
        sink.write("feg.csv", feg_table(store, metrics(), config_.mode, config_.window()).to_string());
    } else if (analysis == "disruption") {
        sink.write("disruption.csv", disruption_table(store, metrics()).to_string());
    } else if (analysis == "domains") {
        if (!concepts()) throw UsageError("domains need concept data (--concepts or inline concepts)");
        report::CsvTable t;
        t.header = {"paper_id", "original_domains", "top_domains"};
        const auto& orig = original_domains();
        const auto& top = top_domains();
        for (PaperIndex p : cohort()) t.add_row({store.id(p), join_list(orig[p]), join_list(top[p])});
        sink.write("domains.csv", t.to_string());
        sink.write("cross_domain.csv", cross_domain_table(cross_domain_rates()).to_string());
    } else if (analysis == "distances") {
        const auto rows = paper_distances();
        report::CsvTable t;
        t.header = {"paper_id", "year", "semantic_within", "semantic_n", "reference_within", "reference_n",
                    "venue_within", "venue_n", "cited_reference_distance", "cited_semantic_distance"};
        std::size_t defined[5] = {0, 0, 0, 0, 0};
        for (const auto& r : rows) {
            using report::format_count;
            using report::format_number;
            t.add_row({store.id(r.paper), std::to_string(store.year(r.paper)), format_number(r.semantic_within.value),
                       format_count(r.semantic_within.n_items), format_number(r.reference_within.value),
                       format_count(r.reference_within.n_items), format_number(r.venue_within.value),
                       format_count(r.venue_within.n_items), format_number(r.cited_reference_distance),
                       format_number(r.cited_semantic_distance)});
            defined[0] += r.semantic_within.value.has_value();
            defined[1] += r.reference_within.value.has_value();
            defined[2] += r.venue_within.value.has_value();
            defined[3] += r.cited_reference_distance.has_value();
            defined[4] += r.cited_semantic_distance.has_value();
        }
        sink.write("distances.csv", t.to_string());
        nlohmann::json cov = {{"papers", rows.size()},
                              {"semantic_within_defined", defined[0]},
                              {"reference_within_defined", defined[1]},
                              {"venue_within_defined", defined[2]},
                              {"cited_reference_distance_defined", defined[3]},
                              {"cited_semantic_distance_defined", defined[4]}};
        sink.write("distances_coverage.json", cov.dump(2) + "\n");
    } else if (analysis == "series") {
        const auto rows = longitudinal();
        if (rows.empty()) throw DataError("series has no rows before the truncation year");
        sink.write("series.csv", series_table(rows).to_string());
        for (const char* index : {"F", "E", "G"})
            sink.write(std::string("series_") + index + ".svg", report::render_svg(series_chart(rows, index)));
    } else if (analysis == "deciles") {
        const auto rows = decile_profile();
        sink.write("deciles.csv", decile_table(rows).to_string());
        sink.write("correlations.csv", correlation_table(decile_correlations()).to_string());
        sink.write("deciles.svg", report::render_svg(decile_chart(rows)));
    } else if (analysis == "deltas") {
        sink.write("deltas.csv", delta_table(citation_type_deltas()).to_string());
        if (concepts()) sink.write("cross_domain.csv", cross_domain_table(cross_domain_rates()).to_string());
    } else if (analysis == "words") {
        report::CsvTable ratios;
        ratios.header = {"index", "word", "prevalence_lower", "prevalence_upper", "ratio"};
        for (const auto& r : word_ratios())
            ratios.add_row({r.index, r.word, report::format_number(r.prevalence_lower),
                            report::format_number(r.prevalence_upper), report::format_number(r.ratio)});
        sink.write("words.csv", ratios.to_string());
        report::CsvTable bins;
        bins.header = {"index", "word", "decile", "n", "hits", "prevalence", "ci_low", "ci_high"};
        for (const auto& r : word_bins())
            bins.add_row({r.index, r.word, std::to_string(r.bin.bin + 1), report::format_count(r.bin.n),
                          report::format_count(r.bin.hits), report::format_number(r.bin.prevalence),
                          report::format_number(r.bin.ci_low), report::format_number(r.bin.ci_high)});
        sink.write("words_deciles.csv", bins.to_string());
    } else if (analysis == "regress") {
        const auto tables = regressions();
        sink.write("regress.csv", regression_table(tables).to_string());
        sink.write("regress_summary.csv", regression_summary_table(tables).to_string());
    } else if (analysis == "report") {
        for (const auto& a : config_.analyses) {
            if (a == "report") throw UsageError("'report' cannot list itself among analyses");
            run(a, sink);
        }
    } else {
        throw UsageError("unknown analysis '" + std::string(analysis) + "'");
    }
}

}  // namespace feg
