#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"

#include "feg/corpus.hpp"
#include "feg/error.hpp"

using feg::CorpusStore;
using feg::PaperIndex;

namespace {

std::vector<std::string> ids_of(const CorpusStore& s, std::span<const PaperIndex> list) {
    std::vector<std::string> out;
    for (PaperIndex p : list) out.push_back(s.id(p));
    return out;
}

std::vector<std::string> refs_of(const CorpusStore& s, const std::string& id) {
    return ids_of(s, s.refs(s.paper_index(id)));
}

std::vector<std::string> citers_of(const CorpusStore& s, const std::string& id) {
    return ids_of(s, s.citers(s.paper_index(id)));
}

using V = std::vector<std::string>;

}  // namespace

TEST_CASE("ingest builds both adjacency directions") {
    auto s = CorpusStore::ingest_string(
        R"({"id":"A","year":2000,"refs":[]}
{"id":"B","year":2001,"refs":["A"]}
{"id":"C","year":2002,"refs":["A","B"]}
)");
    CHECK(s.paper_count() == 3);
    CHECK(citers_of(s, "A") == V{"B", "C"});
    CHECK(citers_of(s, "B") == V{"C"});
    CHECK(citers_of(s, "C").empty());
    CHECK(s.report().edges == 3);
}

TEST_CASE("self references are dropped and counted") {
    auto s = CorpusStore::ingest_string(R"({"id":"A","year":2000,"refs":["A","B"]})");
    CHECK(refs_of(s, "A") == V{"B"});
    CHECK(s.report().self_refs_dropped == 1);
}

TEST_CASE("dangling references are kept without reverse entries") {
    const std::string text = R"({"id":"B","year":2000,"refs":["Z"]})"
                             "\n";
    auto s = CorpusStore::ingest_string(text);
    CHECK(refs_of(s, "B") == V{"Z"});
    const auto z = s.find("Z");
    REQUIRE(z.has_value());
    CHECK_FALSE(s.is_known(*z));
    CHECK(s.citers(*z).empty());
    CHECK_THROWS_AS(s.paper_index("Z"), feg::NotFoundError);
    CHECK(s.serialize().find("\"id\":\"Z\"") == std::string::npos);

    // Independent re-scan of the input: count references whose target has
    // no record line.
    std::set<std::string> records;
    std::vector<std::string> targets;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        auto id_at = line.find("\"id\":\"") + 6;
        records.insert(line.substr(id_at, line.find('"', id_at) - id_at));
        auto open = line.find('[', line.find("\"refs\""));
        auto close = line.find(']', open);
        std::string body = line.substr(open + 1, close - open - 1);
        for (std::size_t at = body.find('"'); at != std::string::npos; at = body.find('"', body.find('"', at + 1) + 1))
            targets.push_back(body.substr(at + 1, body.find('"', at + 1) - at - 1));
    }
    std::size_t dangling = 0;
    for (const auto& t : targets) dangling += records.count(t) ? 0 : 1;
    CHECK(s.report().dangling == dangling);
    CHECK(s.report().dangling == 1);
}

TEST_CASE("duplicate references collapse") {
    auto s = CorpusStore::ingest_string(R"({"id":"A","year":2000,"refs":["B","B","C"]})");
    CHECK(refs_of(s, "A") == V{"B", "C"});
    CHECK(s.report().duplicate_refs_dropped == 1);
}

TEST_CASE("ingest errors") {
    SUBCASE("duplicate id names the id") {
        try {
            CorpusStore::ingest_string("{\"id\":\"A\",\"year\":1,\"refs\":[]}\n{\"id\":\"A\",\"year\":2,\"refs\":[]}\n");
            FAIL("expected an error");
        } catch (const feg::DataError& e) {
            CHECK(std::string(e.what()).find("'A'") != std::string::npos);
        }
    }
    SUBCASE("malformed record reports its line") {
        try {
            CorpusStore::ingest_string("{\"id\":\"A\",\"year\":1,\"refs\":[]}\n{\"id\":\"B\",\"year\":\n");
            FAIL("expected an error");
        } catch (const feg::DataError& e) {
            CHECK(std::string(e.what()).rfind("line 2:", 0) == 0);
        }
    }
    SUBCASE("schema violations") {
        CHECK_THROWS_AS(CorpusStore::ingest_string(R"({"id":"A","refs":[]})"), feg::DataError);
        CHECK_THROWS_AS(CorpusStore::ingest_string(R"({"id":"A","year":"x","refs":[]})"), feg::DataError);
        CHECK_THROWS_AS(CorpusStore::ingest_string(R"({"id":"A","year":1})"), feg::DataError);
        CHECK_THROWS_AS(CorpusStore::ingest_string(R"({"id":"A","year":1,"refs":[3]})"), feg::DataError);
        CHECK_THROWS_AS(CorpusStore::ingest_string(R"([1,2])"), feg::DataError);
        CHECK_THROWS_AS(
            CorpusStore::ingest_string(R"({"id":"A","year":1,"refs":[],"concepts":[{"id":"c","score":-1}]})"),
            feg::DataError);
    }
    SUBCASE("missing file is a usage error") {
        CHECK_THROWS_AS(CorpusStore::ingest_file("/nonexistent/corpus.jsonl"), feg::UsageError);
    }
}

TEST_CASE("optional fields round-trip into records") {
    auto s = CorpusStore::ingest_string(
        R"({"id":"A","year":2000,"refs":[],"title_tokens":["deep","net"],"abstract_tokens":["x"],"venue":"V1",)"
        R"("concepts":[{"id":"CS","level":0,"score":0.9,"parents":[]},{"id":"ML","level":1,"score":0.5,"parents":["CS"]}]})");
    const auto& r = s.record(s.paper_index("A"));
    CHECK(r.title_tokens == V{"deep", "net"});
    REQUIRE(r.abstract_tokens.has_value());
    CHECK(*r.abstract_tokens == V{"x"});
    CHECK(r.venue_id == std::optional<std::string>("V1"));
    REQUIRE(r.concepts.size() == 2);
    CHECK(r.concepts[1].parents == V{"CS"});
    CHECK(r.concepts[1].score == doctest::Approx(0.5));
}

TEST_CASE("citations_in_window") {
    auto s = CorpusStore::ingest_string(
        R"({"id":"P","year":2000,"refs":[]}
{"id":"E","year":1998,"refs":["P"]}
{"id":"Q1","year":2001,"refs":["P"]}
{"id":"Q2","year":2004,"refs":["P"]}
{"id":"Q3","year":2007,"refs":["P"]}
{"id":"L","year":2003,"refs":[]}
)");
    CHECK(ids_of(s, s.citations_in_window(s.paper_index("P"), 5)) == V{"Q1", "Q2"});
    CHECK(s.citations_in_window(s.paper_index("L"), 5).empty());
    CHECK(s.count_citations_in_window(s.paper_index("P"), 10) == 3);

    // The early citer stays in the raw adjacency.
    CHECK(citers_of(s, "P") == V{"E", "Q1", "Q2", "Q3"});
}

TEST_CASE("citations_in_window matches a linear scan on random corpora") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 20; ++round) {
        auto raw = oracle::random_dag(rng, 60, 0.08);
        oracle::Graph g(raw);
        auto s = CorpusStore::ingest_string(oracle::to_ndjson(raw));
        for (const auto& p : raw) {
            for (int window : {1, 3, 5}) {
                V expect = g.window_citers(p.id, window);
                std::sort(expect.begin(), expect.end());
                CHECK(ids_of(s, s.citations_in_window(s.paper_index(p.id), window)) == expect);
            }
        }
    }
}

TEST_CASE("select_cohort") {
    // Ten papers with hand-listed in-window citation counts.
    auto s = CorpusStore::ingest_string(
        R"({"id":"a","year":2000,"refs":[]}
{"id":"b","year":2000,"refs":["a"]}
{"id":"c","year":2001,"refs":["a","b"]}
{"id":"d","year":2001,"refs":["a","b"]}
{"id":"e","year":2002,"refs":["a","c"]}
{"id":"f","year":2003,"refs":["b","c","d"]}
{"id":"g","year":2004,"refs":["c","e"]}
{"id":"h","year":2009,"refs":["a","b","c"]}
{"id":"i","year":2010,"refs":["h"]}
{"id":"j","year":2011,"refs":["h","i"]}
)");
    feg::CohortParams params;
    params.min_refs = 0;
    params.min_citations = 0;
    params.year_min = 1900;
    params.year_max = 2100;
    CHECK(s.select_cohort(params).size() == 10);

    params.min_citations = 100;
    CHECK(s.select_cohort(params).empty());

    // Brute-force filter over the same rows: refs >= 1, >= 2 citers within
    // five years, published 2000..2005.
    params.min_refs = 1;
    params.min_citations = 2;
    params.year_min = 2000;
    params.year_max = 2005;
    CHECK(ids_of(s, s.select_cohort(params)) == V{"b", "c"});

    params.min_refs = 0;
    CHECK(ids_of(s, s.select_cohort(params)) == V{"a", "b", "c"});

    params.window_years = 0;
    CHECK_THROWS_AS(s.select_cohort(params), feg::UsageError);
}

TEST_CASE("select_cohort is monotone in min_citations") {
    std::mt19937_64 rng(11);
    auto raw = oracle::random_dag(rng, 150, 0.05);
    auto s = CorpusStore::ingest_string(oracle::to_ndjson(raw));
    feg::CohortParams params;
    params.min_refs = 0;
    params.year_min = 1900;
    params.year_max = 2100;
    std::vector<PaperIndex> previous;
    for (int m = 0; m <= 12; ++m) {
        params.min_citations = m;
        auto cohort = s.select_cohort(params);
        if (m > 0) CHECK(std::includes(previous.begin(), previous.end(), cohort.begin(), cohort.end()));
        previous = cohort;
    }
}

TEST_CASE("transpose property on random corpora") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 30; ++round) {
        auto raw = oracle::random_dag(rng, 80, 0.1);
        auto s = CorpusStore::ingest_string(oracle::to_ndjson(raw));
        for (PaperIndex a : s.papers()) {
            const auto refs = s.refs(a);
            CHECK(std::is_sorted(refs.begin(), refs.end()));
            for (PaperIndex b : refs) {
                if (!s.is_known(b)) continue;
                const auto c = s.citers(b);
                CHECK(std::binary_search(c.begin(), c.end(), a));
            }
            const auto citers = s.citers(a);
            CHECK(std::is_sorted(citers.begin(), citers.end()));
            for (PaperIndex q : citers) CHECK(s.cites(q, a));
        }
        // Index order is id order.
        for (std::size_t p = 1; p < s.node_count(); ++p) CHECK(s.id(p - 1) < s.id(p));
    }
}

TEST_CASE("serialization is deterministic and independent of record order") {
    std::mt19937_64 rng(5);
    auto raw = oracle::random_dag(rng, 120, 0.05);
    const auto a = CorpusStore::ingest_string(oracle::to_ndjson(raw)).serialize();
    const auto b = CorpusStore::ingest_string(oracle::to_ndjson(raw)).serialize();
    CHECK(a == b);
    std::reverse(raw.begin(), raw.end());
    for (auto& p : raw) std::reverse(p.refs.begin(), p.refs.end());
    CHECK(CorpusStore::ingest_string(oracle::to_ndjson(raw)).serialize() == a);
}

TEST_CASE("ingest report json") {
    auto s = CorpusStore::ingest_string(R"({"id":"A","year":1999,"refs":["A","Z","Z"]})");
    const auto j = s.report().to_json();
    CHECK(j.find("\"records\":1") != std::string::npos);
    CHECK(j.find("\"self_refs_dropped\":1") != std::string::npos);
    CHECK(j.find("\"dangling\":1") != std::string::npos);
    CHECK(j.find("\"min_year\":1999") != std::string::npos);
}
