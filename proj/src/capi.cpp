#include "feg/feg.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "json.hpp"

#include "feg/config.hpp"
#include "feg/corpus.hpp"
#include "feg/distances.hpp"
#include "feg/domains.hpp"
#include "feg/error.hpp"
#include "feg/metrics.hpp"
#include "feg/pipeline.hpp"
#include "feg/stats.hpp"
#include "feg/synth.hpp"

struct feg_corpus {
    std::shared_ptr<const feg::CorpusStore> store;
};

struct feg_concepts {
    feg::ConceptTree tree;
};

struct feg_embeddings {
    feg::EmbeddingSet set;
};

struct feg_config {
    feg::RunConfig config;
};

struct feg_session {
    std::unique_ptr<feg::Session> session;
    std::unique_ptr<feg::report::OutputSink> sink;
};

namespace {

thread_local std::string last_error;

feg_status status_of(feg::ErrorKind kind) { return static_cast<feg_status>(static_cast<int>(kind)); }

template <typename F>
feg_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return FEG_OK;
    } catch (const feg::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return FEG_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return FEG_E_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw feg::UsageError(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

std::vector<std::string> to_ids(const char* const* ids, std::size_t n) {
    if (n > 0) require(ids, "id list");
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(ids[i], "id");
        out.emplace_back(ids[i]);
    }
    return out;
}

const feg::EmbeddingStore& pick_store(const feg_embeddings* e, const char* ns, int year) {
    require(e, "embeddings");
    require(ns, "namespace");
    auto parsed = feg::parse_namespace(ns);
    if (!parsed) throw feg::UsageError("unknown embedding namespace '" + std::string(ns) + "'");
    const auto* store = e->set.select(*parsed, year);
    if (!store) throw feg::NotFoundError("no '" + std::string(ns) + "' embeddings usable for year " + std::to_string(year));
    return *store;
}

void fill(const feg::DistanceResult& r, feg_distance_result* out) {
    out->defined = r.value.has_value();
    out->value = r.value.value_or(0.0);
    out->n_items = r.n_items;
    out->n_missing = r.n_missing;
}

feg::Mode mode_of(feg_mode m) {
    if (m == FEG_MODE_STRICT) return feg::Mode::strict;
    if (m == FEG_MODE_RELAXED) return feg::Mode::relaxed;
    throw feg::UsageError("unknown mode");
}

const feg::CorpusStore& store_of(const feg_corpus* c) {
    require(c, "corpus");
    return *c->store;
}

feg::PaperIndex paper_of(const feg::CorpusStore& store, const char* id) {
    require(id, "paper id");
    return store.paper_index(id);
}

std::string domains_json(const feg::DomainSet& d) { return nlohmann::json(d).dump(); }

}  // namespace

extern "C" {

const char* feg_version(void) { return "1.0.0"; }

const char* feg_last_error(void) { return last_error.c_str(); }

void feg_free_string(char* s) { std::free(s); }

feg_status feg_corpus_open(const char* path, feg_corpus** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto c = std::make_unique<feg_corpus>();
        c->store = std::make_shared<const feg::CorpusStore>(feg::CorpusStore::ingest_file(path));
        *out = c.release();
    });
}

feg_status feg_corpus_from_string(const char* ndjson, size_t len, feg_corpus** out) {
    return guarded([&] {
        require(ndjson, "ndjson");
        require(out, "out");
        *out = nullptr;
        auto c = std::make_unique<feg_corpus>();
        c->store = std::make_shared<const feg::CorpusStore>(feg::CorpusStore::ingest_string({ndjson, len}));
        *out = c.release();
    });
}

void feg_corpus_close(feg_corpus* corpus) { delete corpus; }

feg_status feg_corpus_paper_count(const feg_corpus* corpus, uint64_t* out) {
    return guarded([&] {
        require(out, "out");
        *out = store_of(corpus).paper_count();
    });
}

feg_status feg_corpus_report_json(const feg_corpus* corpus, char** out) {
    return guarded([&] {
        require(out, "out");
        *out = dup_string(store_of(corpus).report().to_json());
    });
}

feg_status feg_corpus_citations_in_window(const feg_corpus* corpus, const char* id, int window, char** out) {
    return guarded([&] {
        require(out, "out");
        const auto& store = store_of(corpus);
        nlohmann::json arr = nlohmann::json::array();
        for (auto q : store.citations_in_window(paper_of(store, id), window)) arr.push_back(store.id(q));
        *out = dup_string(arr.dump());
    });
}

feg_status feg_corpus_serialize(const feg_corpus* corpus, char** out) {
    return guarded([&] {
        require(out, "out");
        *out = dup_string(store_of(corpus).serialize());
    });
}

feg_status feg_overlap_counts(const feg_corpus* corpus, const char* citing, const char* focal, uint64_t* e_i,
                              uint64_t* e_j) {
    return guarded([&] {
        require(e_i, "e_i");
        require(e_j, "e_j");
        const auto& store = store_of(corpus);
        const auto c = feg::overlap_counts(store, paper_of(store, citing), paper_of(store, focal));
        *e_i = c.e_i;
        *e_j = c.e_j;
    });
}

feg_status feg_classify(const feg_corpus* corpus, const char* citing, const char* focal, feg_mode mode,
                        feg_citation_class* out) {
    return guarded([&] {
        require(out, "out");
        const auto& store = store_of(corpus);
        const auto q = paper_of(store, citing);
        const auto f = paper_of(store, focal);
        feg::RelaxedClass r;
        if (mode_of(mode) == feg::Mode::relaxed) {
            r = feg::classify_relaxed(store, q, f);
        } else {
            r.cls = feg::classify_strict(feg::overlap_counts(store, q, f));
        }
        out->kind = static_cast<feg_citation_kind>(static_cast<int>(r.cls.kind));
        out->c_f = r.cls.c_f;
        out->c_e = r.cls.c_e;
        out->c_g = r.cls.c_g;
        out->relaxed_general = r.relaxed_general;
        out->inapplicable = r.inapplicable;
    });
}

feg_status feg_feg_index(const feg_corpus* corpus, const char* focal, int window, feg_mode mode, feg_index_result* out) {
    return guarded([&] {
        require(out, "out");
        if (window < 1) throw feg::UsageError("window must be at least 1");
        const auto& store = store_of(corpus);
        const auto r = feg::feg_index(store, paper_of(store, focal), window, mode_of(mode));
        *out = {r.F, r.E, r.G, r.N, r.n_foundational, r.n_extensional, r.n_generalizational, r.n_borderline};
    });
}

feg_status feg_disruption_terms_of(const feg_corpus* corpus, const char* focal, int window, feg_disruption_terms* out) {
    return guarded([&] {
        require(out, "out");
        if (window < 1) throw feg::UsageError("window must be at least 1");
        const auto& store = store_of(corpus);
        const auto t = feg::disruption_terms(store, paper_of(store, focal), window);
        *out = {t.i, t.j, t.k, t.i0, t.i1};
    });
}

feg_status feg_disruption(const feg_corpus* corpus, const char* focal, int window, feg_variant variant, double* out) {
    return guarded([&] {
        require(out, "out");
        if (window < 1) throw feg::UsageError("window must be at least 1");
        if (variant != FEG_D_WITH_K && variant != FEG_D_NO_K) throw feg::UsageError("unknown disruption variant");
        const auto& store = store_of(corpus);
        const auto t = feg::disruption_terms(store, paper_of(store, focal), window);
        const auto v = feg::disruption_value(
            t, variant == FEG_D_WITH_K ? feg::DisruptionVariant::with_k : feg::DisruptionVariant::no_k);
        if (!v) throw feg::UndefinedError("disruption undefined: empty neighbourhood");
        *out = *v;
    });
}

feg_status feg_citation_disruption(const feg_corpus* corpus, const char* citing, const char* cited, int window,
                                   double* out) {
    return guarded([&] {
        require(out, "out");
        if (window < 1) throw feg::UsageError("window must be at least 1");
        const auto& store = store_of(corpus);
        const auto v = feg::citation_disruption(store, paper_of(store, citing), paper_of(store, cited), window);
        if (!v) throw feg::UndefinedError("citation disruption undefined: empty neighbourhood");
        *out = *v;
    });
}

feg_status feg_ij_over_k(const feg_corpus* corpus, const char* focal, int window, double* out) {
    return guarded([&] {
        require(out, "out");
        if (window < 1) throw feg::UsageError("window must be at least 1");
        const auto& store = store_of(corpus);
        const auto v = feg::ij_over_k(feg::disruption_terms(store, paper_of(store, focal), window));
        if (!v) throw feg::UndefinedError("(i+j)/k undefined: k = 0");
        *out = *v;
    });
}

feg_status feg_concepts_open(const char* path, const feg_corpus* inline_source, feg_concepts** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        if (!path && !inline_source) throw feg::UsageError("need a concept file or a corpus with inline concepts");
        auto c = std::make_unique<feg_concepts>();
        if (path) c->tree = feg::ConceptTree::load_file(path);
        if (inline_source) c->tree.merge_inline(*inline_source->store);
        c->tree.finalize();
        *out = c.release();
    });
}

void feg_concepts_close(feg_concepts* concepts) { delete concepts; }

feg_status feg_original_domains(const feg_concepts* concepts, const feg_corpus* corpus, const char* id, char** out) {
    return guarded([&] {
        require(concepts, "concepts");
        require(out, "out");
        const auto& store = store_of(corpus);
        const auto& rec = store.record(paper_of(store, id));
        *out = dup_string(domains_json(feg::original_domains(concepts->tree, rec.concepts)));
    });
}

feg_status feg_top_domains(const feg_concepts* concepts, const feg_corpus* corpus, const char* id, int depth, char** out) {
    return guarded([&] {
        require(concepts, "concepts");
        require(out, "out");
        if (depth < 0) throw feg::UsageError("depth must be non-negative");
        const auto& store = store_of(corpus);
        const auto& rec = store.record(paper_of(store, id));
        *out = dup_string(domains_json(feg::top_domains(concepts->tree, rec.concepts, depth)));
    });
}

feg_status feg_relative_delta(double group_mean, double rest_mean, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = feg::relative_delta(group_mean, rest_mean);
    });
}

feg_status feg_embeddings_open(const char* dir, feg_embeddings** out) {
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        *out = nullptr;
        auto e = std::make_unique<feg_embeddings>();
        e->set = feg::EmbeddingSet::load_dir(dir);
        *out = e.release();
    });
}

void feg_embeddings_close(feg_embeddings* embeddings) { delete embeddings; }

feg_status feg_within_distance(const feg_embeddings* embeddings, const char* ns, int year, const char* const* ids,
                               size_t n_ids, int dedup, feg_distance_result* out) {
    return guarded([&] {
        require(out, "out");
        const auto& store = pick_store(embeddings, ns, year);
        fill(feg::within_paper_distance(store, to_ids(ids, n_ids), dedup != 0), out);
    });
}

feg_status feg_cross_distance(const feg_embeddings* embeddings, const char* ns, int year, const char* const* ids_a,
                              size_t n_a, const char* const* ids_b, size_t n_b, int dedup, feg_distance_result* out) {
    return guarded([&] {
        require(out, "out");
        const auto& store = pick_store(embeddings, ns, year);
        fill(feg::cross_paper_distance(store, to_ids(ids_a, n_a), to_ids(ids_b, n_b), dedup != 0), out);
    });
}

feg_status feg_cosine_distance(const double* a, const double* b, size_t dim, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        const auto v = feg::cosine_distance({a, dim}, {b, dim});
        if (!v) throw feg::UndefinedError("cosine distance undefined for a zero vector");
        *out = *v;
    });
}

feg_status feg_pearson(const double* x, const double* y, size_t n, double* out) {
    return guarded([&] {
        require(x, "x");
        require(y, "y");
        require(out, "out");
        *out = feg::stats::pearson({x, n}, {y, n});
    });
}

feg_status feg_welch_t(const double* a, size_t n_a, const double* b, size_t n_b, double* t, double* df) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(t, "t");
        require(df, "df");
        const auto r = feg::stats::welch_t({a, n_a}, {b, n_b});
        *t = r.t;
        *df = r.df;
    });
}

feg_status feg_quantile_bins(const double* values, size_t n, int q, int* bins_out) {
    return guarded([&] {
        require(values, "values");
        require(bins_out, "bins_out");
        const auto bins = feg::stats::quantile_bins({values, n}, q);
        std::copy(bins.begin(), bins.end(), bins_out);
    });
}

feg_status feg_config_new(feg_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = new feg_config();
    });
}

void feg_config_free(feg_config* config) { delete config; }

feg_status feg_config_set(feg_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        config->config.set(key, value);
    });
}

feg_status feg_config_get(const feg_config* config, const char* key, char** out) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(out, "out");
        *out = dup_string(config->config.get(key));
    });
}

feg_status feg_config_load_file(feg_config* config, const char* path) {
    return guarded([&] {
        require(config, "config");
        require(path, "path");
        config->config.load_file(path);
    });
}

feg_status feg_config_apply_env(feg_config* config, const char* prefix) {
    return guarded([&] {
        require(config, "config");
        config->config.apply_env(prefix ? prefix : "FEG_");
    });
}

feg_status feg_config_validate(const feg_config* config) {
    return guarded([&] {
        require(config, "config");
        config->config.validate();
    });
}

feg_status feg_config_keys(char** out) {
    return guarded([&] {
        require(out, "out");
        std::string s;
        for (const auto& k : feg::RunConfig::keys()) s += k + "\n";
        *out = dup_string(s);
    });
}

feg_status feg_session_open(const feg_config* config, feg_session** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        auto s = std::make_unique<feg_session>();
        s->session = std::make_unique<feg::Session>(config->config);
        *out = s.release();
    });
}

void feg_session_close(feg_session* session) { delete session; }

feg_status feg_session_run(feg_session* session, const char* analysis) {
    return guarded([&] {
        require(session, "session");
        require(analysis, "analysis");
        if (!session->sink) session->sink = std::make_unique<feg::report::OutputSink>(session->session->config().out);
        session->session->run(analysis, *session->sink);
    });
}

feg_status feg_session_finish(feg_session* session) {
    return guarded([&] {
        require(session, "session");
        if (!session->sink) session->sink = std::make_unique<feg::report::OutputSink>(session->session->config().out);
        session->sink->write_manifest();
    });
}

feg_status feg_synth_generate(const char* kind, uint64_t papers, uint64_t seed, int year_first, int year_last,
                              int era_boundary, int with_embeddings, const char* out_dir) {
    return guarded([&] {
        require(kind, "kind");
        require(out_dir, "out_dir");
        feg::synth::Params p;
        p.kind = feg::synth::parse_kind(kind);
        p.papers = papers;
        p.seed = seed;
        p.year_first = year_first;
        p.year_last = year_last;
        p.era_boundary = era_boundary;
        p.embeddings = with_embeddings != 0;
        feg::synth::write(feg::synth::generate(p), out_dir);
    });
}

}  // extern "C"
