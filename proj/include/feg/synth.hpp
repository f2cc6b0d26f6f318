#pragma once
// Deterministic synthetic corpora for tests, benchmarks and demos.
//
// Papers are spread evenly over a year range and belong to one of a few
// domains. Every paper after the first year cites a handful of anchor
// papers from recent years (up to eight back), each through one citing
// archetype:
//
//   extensional      same-domain anchor plus some of the anchor's references
//   foundational     same-domain anchor plus some of the anchor's citers
//   generalizational anchor (usually from another domain) cited on its own
//
// Concept assignments, a concept sidecar and embeddings (paper, venue and
// title-token vectors pointing along a per-domain axis) are generated with
// the same seed. Output depends only on Params, never on the platform's
// <random> distributions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace feg::synth {

enum class Kind {
    archetype,  // fixed archetype mix
    two_era,    // extensional share peaks at era_boundary, generalizational share dips there
};

std::string_view to_string(Kind kind);
Kind parse_kind(std::string_view text);

struct Params {
    Kind kind = Kind::archetype;
    std::size_t papers = 10000;
    std::uint64_t seed = 42;
    int year_first = 1990;
    int year_last = 2019;
    int domains = 5;
    int era_boundary = 2005;
    bool embeddings = true;
    std::size_t dim = 16;

    void validate() const;
};

struct Corpus {
    std::string records;   // NDJSON corpus
    std::string concepts;  // NDJSON concept sidecar
    // file name -> contents, for the embedding directory
    std::map<std::string, std::string> embedding_files;
};

Corpus generate(const Params& params);

// Writes corpus.jsonl, concepts.jsonl and embeddings/*.vec under `dir`.
void write(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace feg::synth
