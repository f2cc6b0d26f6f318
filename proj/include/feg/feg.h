/*
 * C interface to the feg library.
 *
 * All handles are opaque. Every function returns an feg_status; on failure
 * feg_last_error() describes the problem for the calling thread. Strings
 * returned through char** out-parameters are owned by the caller and must
 * be released with feg_free_string().
 */
#ifndef FEG_FEG_H
#define FEG_FEG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FEG_API __declspec(dllexport)
#else
#define FEG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum feg_status {
    FEG_OK = 0,
    FEG_E_USAGE = 1,      /* bad argument or configuration */
    FEG_E_DATA = 2,       /* malformed or inconsistent input data */
    FEG_E_INTERNAL = 3,   /* invariant violation inside the library */
    FEG_E_NOT_FOUND = 4,  /* id not present in the corpus */
    FEG_E_UNDEFINED = 5   /* quantity mathematically undefined for this input */
} feg_status;

typedef enum feg_mode { FEG_MODE_STRICT = 0, FEG_MODE_RELAXED = 1 } feg_mode;

typedef enum feg_citation_kind {
    FEG_FOUNDATIONAL = 0,
    FEG_EXTENSIONAL = 1,
    FEG_GENERALIZATIONAL = 2,
    FEG_BORDERLINE = 3
} feg_citation_kind;

typedef enum feg_variant { FEG_D_WITH_K = 0, FEG_D_NO_K = 1 } feg_variant;

typedef struct feg_corpus feg_corpus;
typedef struct feg_concepts feg_concepts;
typedef struct feg_embeddings feg_embeddings;
typedef struct feg_config feg_config;
typedef struct feg_session feg_session;

typedef struct feg_citation_class {
    feg_citation_kind kind;
    double c_f;
    double c_e;
    double c_g;
    int relaxed_general;   /* relaxed mode put the citation in G */
    int inapplicable;      /* relaxed rule could not be evaluated */
} feg_citation_class;

typedef struct feg_index_result {
    double F;
    double E;
    double G;
    uint64_t n;
    uint64_t n_foundational;
    uint64_t n_extensional;
    uint64_t n_generalizational;
    uint64_t n_borderline;
} feg_index_result;

typedef struct feg_disruption_terms {
    uint64_t i;
    uint64_t j;
    uint64_t k;
    uint64_t i0;
    uint64_t i1;
} feg_disruption_terms;

typedef struct feg_distance_result {
    double value;     /* valid only when defined != 0 */
    int defined;
    uint64_t n_items;
    uint64_t n_missing;
} feg_distance_result;

FEG_API const char* feg_version(void);
FEG_API const char* feg_last_error(void);
FEG_API void feg_free_string(char* s);

/* corpus-store */
FEG_API feg_status feg_corpus_open(const char* path, feg_corpus** out);
FEG_API feg_status feg_corpus_from_string(const char* ndjson, size_t len, feg_corpus** out);
FEG_API void feg_corpus_close(feg_corpus* corpus);
FEG_API feg_status feg_corpus_paper_count(const feg_corpus* corpus, uint64_t* out);
FEG_API feg_status feg_corpus_report_json(const feg_corpus* corpus, char** out);
/* JSON array of citing ids within [year, year + window] */
FEG_API feg_status feg_corpus_citations_in_window(const feg_corpus* corpus, const char* id, int window, char** out);
FEG_API feg_status feg_corpus_serialize(const feg_corpus* corpus, char** out);

/* feg-core */
FEG_API feg_status feg_overlap_counts(const feg_corpus* corpus, const char* citing, const char* focal, uint64_t* e_i,
                                      uint64_t* e_j);
FEG_API feg_status feg_classify(const feg_corpus* corpus, const char* citing, const char* focal, feg_mode mode,
                                feg_citation_class* out);
FEG_API feg_status feg_feg_index(const feg_corpus* corpus, const char* focal, int window, feg_mode mode,
                                 feg_index_result* out);
FEG_API feg_status feg_disruption_terms_of(const feg_corpus* corpus, const char* focal, int window,
                                           feg_disruption_terms* out);
/* FEG_E_UNDEFINED when the denominator is zero */
FEG_API feg_status feg_disruption(const feg_corpus* corpus, const char* focal, int window, feg_variant variant,
                                  double* out);
FEG_API feg_status feg_citation_disruption(const feg_corpus* corpus, const char* citing, const char* cited, int window,
                                           double* out);
FEG_API feg_status feg_ij_over_k(const feg_corpus* corpus, const char* focal, int window, double* out);

/* domains */
FEG_API feg_status feg_concepts_open(const char* path, const feg_corpus* inline_source, feg_concepts** out);
FEG_API void feg_concepts_close(feg_concepts* concepts);
/* JSON arrays of level-0 concept ids */
FEG_API feg_status feg_original_domains(const feg_concepts* concepts, const feg_corpus* corpus, const char* id,
                                        char** out);
FEG_API feg_status feg_top_domains(const feg_concepts* concepts, const feg_corpus* corpus, const char* id, int depth,
                                   char** out);
FEG_API feg_status feg_relative_delta(double group_mean, double rest_mean, double* out);

/* distances */
FEG_API feg_status feg_embeddings_open(const char* dir, feg_embeddings** out);
FEG_API void feg_embeddings_close(feg_embeddings* embeddings);
/* ns: title_token | abstract_token | paper | venue; year selects the vintage */
FEG_API feg_status feg_within_distance(const feg_embeddings* embeddings, const char* ns, int year, const char* const* ids,
                                       size_t n_ids, int dedup, feg_distance_result* out);
FEG_API feg_status feg_cross_distance(const feg_embeddings* embeddings, const char* ns, int year, const char* const* ids_a,
                                      size_t n_a, const char* const* ids_b, size_t n_b, int dedup,
                                      feg_distance_result* out);
FEG_API feg_status feg_cosine_distance(const double* a, const double* b, size_t dim, double* out);

/* stats */
FEG_API feg_status feg_pearson(const double* x, const double* y, size_t n, double* out);
FEG_API feg_status feg_welch_t(const double* a, size_t n_a, const double* b, size_t n_b, double* t, double* df);
FEG_API feg_status feg_quantile_bins(const double* values, size_t n, int q, int* bins_out);

/* pipeline */
FEG_API feg_status feg_config_new(feg_config** out);
FEG_API void feg_config_free(feg_config* config);
FEG_API feg_status feg_config_set(feg_config* config, const char* key, const char* value);
FEG_API feg_status feg_config_get(const feg_config* config, const char* key, char** out);
FEG_API feg_status feg_config_load_file(feg_config* config, const char* path);
/* prefix NULL means "FEG_" */
FEG_API feg_status feg_config_apply_env(feg_config* config, const char* prefix);
FEG_API feg_status feg_config_validate(const feg_config* config);
/* newline-separated list of accepted keys */
FEG_API feg_status feg_config_keys(char** out);

FEG_API feg_status feg_session_open(const feg_config* config, feg_session** out);
FEG_API void feg_session_close(feg_session* session);
/* Runs one analysis, writing into the configured output directory. */
FEG_API feg_status feg_session_run(feg_session* session, const char* analysis);
/* Writes manifest.json for everything produced so far. */
FEG_API feg_status feg_session_finish(feg_session* session);

/* synthetic corpora: kind is "archetype" or "two_era" */
FEG_API feg_status feg_synth_generate(const char* kind, uint64_t papers, uint64_t seed, int year_first, int year_last,
                                      int era_boundary, int with_embeddings, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
